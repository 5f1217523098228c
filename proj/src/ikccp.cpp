#include "xxz/ikccp.hpp"

#include <algorithm>

#include "xxz/bethe.hpp"

namespace xxz {

namespace {

constexpr double kPoleTol = 1e-14;

void check_pole(cplx den, const char* where) {
    if (std::abs(den) < kPoleTol) throw PoleError(std::string(where) + ": pole proximity");
}

void check_sizes(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, int cap) {
    if (xi.empty() || xi.size() != zeta.size()) throw InputError("ccp: need N values of xi and of zeta");
    if (static_cast<int>(xi.size()) > cap) throw InputError("ccp: N too large for the double sum");
}

IdentityCheckReport make_report(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta, cplx lhs,
                                cplx rhs) {
    IdentityCheckReport r;
    r.n = static_cast<int>(xi.size());
    r.delta = delta;
    r.xi = xi;
    r.zeta = zeta;
    r.lhs = lhs;
    r.rhs = rhs;
    r.relative_error = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    return r;
}

using lcplx = std::complex<long double>;

std::vector<lcplx> widen(const std::vector<cplx>& v) { return {v.begin(), v.end()}; }

lcplx lpow(lcplx z, int n) {
    lcplx r = 1.0L;
    for (int i = 0; i < n; ++i) r *= z;
    return r;
}

void check_pole(lcplx den, const char* where) { check_pole(cplx(den), where); }

lcplx geometric_factor_l(const std::vector<int>& sigma, const std::vector<int>& mu, const std::vector<lcplx>& xi,
                         const std::vector<lcplx>& zeta) {
    const int n = static_cast<int>(sigma.size());
    lcplx num = 1.0L, den = 1.0L, tail = 1.0L;
    for (int i = n - 1; i >= 1; --i) {
        const lcplx pair = xi[sigma[i]] * zeta[mu[i]];
        num *= lpow(pair, i);
        tail *= pair;
        const lcplx d = 1.0L - tail;
        check_pole(d, "geometric_factor");
        den *= d;
    }
    return num / den;
}

// Σ_{σ,μ} a(σ) b(μ) geometric_factor(σ, μ). The terms cancel heavily for
// N = 4, so the sum runs in extended precision.
template <class Fa, class Fb>
cplx double_sum(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, Fa a, Fb b) {
    const auto perms = permutations(static_cast<int>(xi.size()));
    const auto lx = widen(xi), lz = widen(zeta);
    std::vector<lcplx> av, bv;
    for (const auto& p : perms) {
        av.push_back(a(p, lx));
        bv.push_back(b(p, lz));
    }
    lcplx acc = 0.0L;
    for (std::size_t s = 0; s < perms.size(); ++s)
        for (std::size_t u = 0; u < perms.size(); ++u)
            acc += av[s] * bv[u] * geometric_factor_l(perms[s].sigma, perms[u].sigma, lx, lz);
    return cplx(acc);
}

lcplx a_coeff_l(const PermutationTerm& p, const std::vector<lcplx>& v, double delta) {
    const long double d = delta;
    lcplx a = 1.0L;
    for (const auto& [j, k] : p.inversions) {
        const lcplx xb = v[p.sigma[j]], xa = v[p.sigma[k]];
        const lcplx den = 1.0L + xa * xb - 2.0L * d * xa;
        check_pole(den, "s_matrix");
        a *= -(1.0L + xa * xb - 2.0L * d * xb) / den;
    }
    return a;
}

}  // namespace

cplx d_weight(cplx x, cplx y, double delta) {
    const cplx a = 1.0 - x * y;
    const cplx b = x + y - 2.0 * delta * x * y;
    check_pole(a, "d_weight");
    check_pole(b, "d_weight");
    return 1.0 / (a * b);
}

cplx ik_determinant(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta) {
    check_sizes(xi, zeta, 64);
    const auto n = static_cast<Eigen::Index>(xi.size());
    const long double d = delta;
    // extended precision: the determinant is much smaller than its entries
    Eigen::Matrix<lcplx, Eigen::Dynamic, Eigen::Dynamic> m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const lcplx x = xi[i], y = zeta[j];
            const lcplx a = 1.0L - x * y, b = x + y - 2.0L * d * x * y;
            check_pole(a, "d_weight");
            check_pole(b, "d_weight");
            m(i, j) = 1.0L / (a * b);
        }
    const cplx det(det_lu(m));
    require_finite(det, "ik_determinant");
    return det;
}

cplx geometric_factor(const std::vector<int>& sigma, const std::vector<int>& mu, const std::vector<cplx>& xi,
                      const std::vector<cplx>& zeta) {
    const int n = static_cast<int>(sigma.size());
    cplx num = 1.0, den = 1.0, tail = 1.0;
    for (int i = n - 1; i >= 1; --i) {
        const cplx pair = xi[sigma[i]] * zeta[mu[i]];
        num *= ipow(pair, i);
        tail *= pair;
        const cplx d = 1.0 - tail;
        check_pole(d, "geometric_factor");
        den *= d;
    }
    return num / den;
}

cplx ccp_lhs(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta) {
    check_sizes(xi, zeta, 5);
    auto a = [delta](const PermutationTerm& p, const std::vector<lcplx>& v) { return a_coeff_l(p, v, delta); };
    return double_sum(xi, zeta, a, a);
}

cplx ccp_rhs(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta) {
    check_sizes(xi, zeta, 64);
    const std::size_t n = xi.size();
    cplx prod = 1.0, cross = 1.0, den = 1.0;
    for (std::size_t j = 0; j < n; ++j) prod *= xi[j] * zeta[j];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cross *= xi[i] + zeta[j] - 2.0 * delta * xi[i] * zeta[j];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            den *= (1.0 + xi[i] * xi[j] - 2.0 * delta * xi[i]) * (1.0 + zeta[i] * zeta[j] - 2.0 * delta * zeta[i]);
    check_pole(den, "ccp_rhs");
    return (1.0 - prod) * cross / den * ik_determinant(xi, zeta, delta);
}

IdentityCheckReport ccp_check(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta) {
    return make_report(xi, zeta, delta, ccp_lhs(xi, zeta, delta), ccp_rhs(xi, zeta, delta));
}

cplx vandermonde(const std::vector<cplx>& v) {
    cplx p = 1.0;
    for (std::size_t j = 0; j < v.size(); ++j)
        for (std::size_t k = j + 1; k < v.size(); ++k) p *= v[k] - v[j];
    return p;
}

cplx q_poly_value(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta) {
    check_sizes(xi, zeta, 64);
    const cplx vd = vandermonde(xi) * vandermonde(zeta);
    if (std::abs(vd) < 1e-300) throw InputError("q_poly_value: coincident points");
    cplx cross = 1.0, geo = 1.0;
    for (const cplx& a : xi)
        for (const cplx& b : zeta) {
            cross *= a + b - 2.0 * delta * a * b;
            geo *= 1.0 - a * b;
        }
    return cross * ik_determinant(xi, zeta, delta) * geo / vd;
}

cplx q2_explicit(cplx x1, cplx x2, cplx z1, cplx z2, double d) {
    return 4.0 * d * d * z1 * z2 * x1 * x2 - 2.0 * d * z1 * z2 * x1 - 2.0 * d * z1 * z2 * x2 - 2.0 * d * z1 * x1 * x2 -
           2.0 * d * z2 * x1 * x2 + z1 * z2 * x1 * x2 + z1 * z2 + x1 * x2 + 1.0;
}

cplx u_factor(cplx xi, cplx xip, double delta) {
    check_pole(xip - xi, "u_factor");
    return (1.0 + xi * xip - 2.0 * delta * xi) / (xip - xi);
}

cplx idenU_lhs(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta) {
    check_sizes(xi, zeta, 5);
    auto uprod = [delta](const PermutationTerm& p, const std::vector<lcplx>& v) {
        const long double d = delta;
        lcplx r = 1.0L;
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j) {
                const lcplx a = v[p.sigma[i]], b = v[p.sigma[j]];
                check_pole(b - a, "u_factor");
                r *= (1.0L + a * b - 2.0L * d * a) / (b - a);
            }
        return r;
    };
    return double_sum(xi, zeta, uprod, uprod);
}

cplx idenU_rhs(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta) {
    cplx prod = 1.0, geo = 1.0;
    for (std::size_t j = 0; j < xi.size(); ++j) prod *= xi[j] * zeta[j];
    for (const cplx& a : xi)
        for (const cplx& b : zeta) geo *= 1.0 - a * b;
    check_pole(geo, "idenU_rhs");
    return (1.0 - prod) / geo * q_poly_value(xi, zeta, delta);
}

IdentityCheckReport idenU_check(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta) {
    return make_report(xi, zeta, delta, idenU_lhs(xi, zeta, delta), idenU_rhs(xi, zeta, delta));
}

}  // namespace xxz
