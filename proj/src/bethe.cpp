#include "xxz/bethe.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "xxz/special.hpp"

namespace xxz {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

cplx dispersion(cplx xi, double delta) {
    if (xi == cplx(0.0)) throw PoleError("dispersion: xi = 0");
    return xi + 1.0 / xi - 2.0 * delta;
}

cplx s_matrix(cplx xb, cplx xa, double delta) {
    const cplx den = 1.0 + xa * xb - 2.0 * delta * xa;
    if (std::abs(den) < 1e-14) {
        std::ostringstream os;
        os << "s_matrix: pole at (" << xb << ", " << xa << ")";
        throw PoleError(os.str());
    }
    return -(1.0 + xa * xb - 2.0 * delta * xb) / den;
}

std::vector<PermutationTerm> permutations(int n) {
    if (n < 1 || n > 8) throw InputError("permutations: n out of range");
    std::vector<int> s(n);
    std::iota(s.begin(), s.end(), 0);
    std::vector<PermutationTerm> out;
    do {
        PermutationTerm p;
        p.sigma = s;
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                if (s[j] > s[k]) p.inversions.emplace_back(j, k);
        p.sign = (p.inversions.size() % 2) ? -1 : 1;
        out.push_back(std::move(p));
    } while (std::next_permutation(s.begin(), s.end()));
    return out;
}

cplx a_coeff(const PermutationTerm& p, const std::vector<cplx>& xi, double delta) {
    if (xi.size() != p.sigma.size()) throw InputError("a_coeff: size mismatch");
    cplx a = 1.0;
    for (const auto& [j, k] : p.inversions) a *= s_matrix(xi[p.sigma[j]], xi[p.sigma[k]], delta);
    return a;
}

double small_radius(double delta, int n) {
    if (n == 1) return 1.0;
    return 0.9 * (std::sqrt(delta * delta + 1.0) - std::abs(delta));
}

double large_radius(double delta, int n) {
    if (n == 1) return 1.0;
    return 1.1 * (std::abs(delta) + std::sqrt(delta * delta + 1.0));
}

std::size_t WaveTable::offset(const ParticleConfig& x) const {
    if (x.size() != lo.size()) throw InputError("WaveTable: configuration size mismatch");
    std::size_t off = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo[i] || x[i] > hi[i]) throw InputError("WaveTable: configuration outside the table");
        off = off * static_cast<std::size_t>(hi[i] - lo[i] + 1) + static_cast<std::size_t>(x[i] - lo[i]);
    }
    return off;
}

namespace {

void check_box(const ModelParams& p, const std::vector<int>& lo, const std::vector<int>& hi) {
    p.validate();
    if (static_cast<int>(lo.size()) != p.n() || static_cast<int>(hi.size()) != p.n())
        throw InputError("wavefunction: box dimension must equal N");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (hi[i] < lo[i]) throw InputError("wavefunction: empty box");
    if (p.n() > 6) throw InputError("wavefunction: N > 6 is not supported");
}

int default_m_max(int n) {
    switch (n) {
        case 1:
        case 2: return 512;
        case 3: return 256;
        case 4: return 64;
        default: return 32;
    }
}

}  // namespace

WaveTable wavefunction_table_fixed(const ModelParams& p, const std::vector<int>& lo, const std::vector<int>& hi,
                                   ContourKind kind, int m, int workers) {
    check_box(p, lo, hi);
    const int n = p.n();
    double cost = 1.0;
    for (int i = 0; i < n; ++i) cost *= m * (i + 1.0);
    if (cost > 4e9) throw InputError("wavefunction: node count too large for N");

    const double rad = kind == ContourKind::small ? small_radius(p.delta, n) : large_radius(p.delta, n);
    const auto grid = discretize_contour(ContourCircle{0.0, rad}, m);
    const auto& z = grid.nodes;

    // per-variable factors w ξ^{-y-1} e^{-itε(ξ)}
    std::vector<std::vector<cplx>> g(n, std::vector<cplx>(m));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < m; ++k)
            g[j][k] = grid.weights[k] * ipow(z[k], -p.y[j] - 1) * std::exp(cplx(0.0, -p.t) * dispersion(z[k], p.delta));

    std::vector<cplx> stab;
    if (n > 1) {
        stab.resize(static_cast<std::size_t>(m) * m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) stab[a * m + b] = s_matrix(z[a], z[b], p.delta);
    }

    std::vector<RowMat> pw(n);
    std::vector<int> width(n);
    for (int i = 0; i < n; ++i) {
        width[i] = hi[i] - lo[i] + 1;
        pw[i].resize(m, width[i]);
        for (int k = 0; k < m; ++k) {
            cplx v = ipow(z[k], lo[i]);
            for (int x = 0; x < width[i]; ++x) {
                pw[i](k, x) = v;
                v *= z[k];
            }
        }
    }

    const auto perms = permutations(n);
    const std::size_t np = perms.size();
    // ends[σ][i]: positions a < i with (a, i) an inversion of σ
    std::vector<std::vector<std::vector<int>>> ends(np, std::vector<std::vector<int>>(n));
    for (std::size_t s = 0; s < np; ++s)
        for (const auto& [a, b] : perms[s].inversions) ends[s][b].push_back(a);
    std::size_t slice = 1;
    for (int i = 1; i < n; ++i) slice *= static_cast<std::size_t>(m);
    std::size_t rest = 1;
    for (int i = 1; i < n; ++i) rest *= static_cast<std::size_t>(width[i]);

    // H(k1, x2..xN): all axes but the first contracted
    RowMat h(m, static_cast<Eigen::Index>(rest));
    parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t k1) {
        std::vector<cplx> buf(slice, cplx(0.0));
        if (n == 1) {
            buf[0] = g[0][k1];
        } else {
            // partial[i][σ]: product of the factors of positions 0..i-1
            std::vector<std::vector<cplx>> partial(n, std::vector<cplx>(np));
            std::vector<int> k(n, 0);
            k[0] = static_cast<int>(k1);
            for (std::size_t s = 0; s < np; ++s) partial[1][s] = g[perms[s].sigma[0]][k1];
            Eigen::ArrayXcd v(m);
            std::function<void(int, std::size_t)> fill = [&](int i, std::size_t base) {
                if (i == n - 1) {
                    Eigen::Map<Eigen::ArrayXcd> out(buf.data() + base, m);
                    for (std::size_t s = 0; s < np; ++s) {
                        v = partial[i][s] * Eigen::Map<const Eigen::ArrayXcd>(g[perms[s].sigma[i]].data(), m);
                        for (int a : ends[s][i]) v *= Eigen::Map<const Eigen::ArrayXcd>(stab.data() + k[a] * m, m);
                        out += v;
                    }
                    return;
                }
                for (int ki = 0; ki < m; ++ki) {
                    k[i] = ki;
                    for (std::size_t s = 0; s < np; ++s) {
                        cplx f = partial[i][s] * g[perms[s].sigma[i]][ki];
                        for (int a : ends[s][i]) f *= stab[k[a] * m + ki];
                        partial[i + 1][s] = f;
                    }
                    fill(i + 1, (base + ki) * m);
                }
            };
            fill(1, 0);
        }
        // contract axes n-1 .. 1; layout [a][k][d]
        std::size_t outer = slice, done = 1;
        for (int i = n - 1; i >= 1; --i) {
            outer /= static_cast<std::size_t>(m);
            std::vector<cplx> next(outer * width[i] * done);
            for (std::size_t a = 0; a < outer; ++a) {
                Eigen::Map<const RowMat> in(buf.data() + a * m * done, m, static_cast<Eigen::Index>(done));
                Eigen::Map<RowMat> out(next.data() + a * width[i] * done, width[i], static_cast<Eigen::Index>(done));
                out.noalias() = pw[i].transpose() * in;
            }
            buf.swap(next);
            done *= static_cast<std::size_t>(width[i]);
        }
        for (std::size_t r = 0; r < rest; ++r) h(static_cast<Eigen::Index>(k1), static_cast<Eigen::Index>(r)) = buf[r];
    });

    const RowMat vals = pw[0].transpose() * h;
    WaveTable tab;
    tab.lo = lo;
    tab.hi = hi;
    tab.m = m;
    tab.values.assign(vals.data(), vals.data() + vals.size());

    // roundoff floor from the absolute size of the summands; on a circle
    // |ξ^{x-y-1}| depends only on x - y, so it factorizes per coordinate
    double smean = 0.0;
    for (const auto& s : stab) smean += std::abs(s);
    if (!stab.empty()) smean /= static_cast<double>(stab.size());
    const double base = std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(np)) *
                        std::pow(std::max(smean, 1.0), n * (n - 1) / 2.0);
    double gsum = 0.0;
    for (int k = 0; k < m; ++k) gsum += std::abs(grid.weights[k] * std::exp(cplx(0.0, -p.t) * dispersion(z[k], p.delta)));
    gsum /= rad;
    int ysum = 0;
    for (int j = 0; j < n; ++j) ysum += p.y[j];
    tab.errors.resize(tab.values.size());
    std::vector<int> x(n);
    for (std::size_t off = 0; off < tab.values.size(); ++off) {
        std::size_t r = off;
        int xsum = 0;
        for (int i = n - 1; i >= 0; --i) {
            xsum += lo[i] + static_cast<int>(r % static_cast<std::size_t>(width[i]));
            r /= static_cast<std::size_t>(width[i]);
        }
        tab.errors[off] = base * std::pow(gsum, n) * std::pow(rad, xsum - ysum);
    }
    return tab;
}

WaveTable wavefunction_table(const ModelParams& p, const std::vector<int>& lo, const std::vector<int>& hi,
                             ContourKind kind, const WaveOptions& opt) {
    check_box(p, lo, hi);
    const int m_max = opt.m_max > 0 ? opt.m_max : default_m_max(p.n());
    int m = std::min(std::max(opt.m_start, 8), m_max / 2);

    // largest difference among entries that are not at their roundoff floor
    auto max_diff = [](const WaveTable& a, const WaveTable& b, std::size_t* where) {
        double d = 0.0;
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            const double e = std::abs(a.values[i] - b.values[i]);
            if (e <= 10.0 * b.errors[i]) continue;
            if (e >= d) {
                d = e;
                if (where) *where = i;
            }
        }
        return d;
    };

    WaveTable prev = wavefunction_table_fixed(p, lo, hi, kind, m, opt.workers);
    double d_prev = -1.0;
    for (;;) {
        m *= 2;
        WaveTable cur = wavefunction_table_fixed(p, lo, hi, kind, m, opt.workers);
        std::size_t worst = 0;
        const double d = max_diff(prev, cur, &worst);
        double scale = 0.0;
        for (const auto& v : cur.values) scale = std::max(scale, std::abs(v));
        // geometric convergence: the next difference is about d (d / d_prev)^2
        double factor = 1.0;
        if (d_prev > 0.0 && d < 0.5 * d_prev) factor = (d / d_prev) * (d / d_prev);
        const double est = d * factor;
        if (est <= opt.atol + opt.rtol * scale) {
            for (std::size_t i = 0; i < cur.values.size(); ++i)
                cur.errors[i] = std::max({std::abs(cur.values[i] - prev.values[i]) * factor, cur.errors[i],
                                          std::numeric_limits<double>::epsilon() * std::abs(cur.values[i])});
            return cur;
        }
        if (2 * m > m_max)
            throw ConvergenceError("wavefunction_table: no convergence at node cap", prev.values[worst], cur.values[worst]);
        d_prev = d;
        prev = std::move(cur);
    }
}

StateVector wavefunction_on_basis(const ModelParams& p, const SectorBasis& basis, ContourKind kind,
                                  const WaveOptions& opt, double* max_error) {
    const int n = p.n();
    if (basis.particles() != n) throw InputError("wavefunction_on_basis: particle number mismatch");
    std::vector<int> lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
        lo[i] = basis.window().left + i;
        hi[i] = basis.window().right - (n - 1 - i);
    }
    const auto tab = wavefunction_table(p, lo, hi, kind, opt);
    StateVector out(static_cast<Eigen::Index>(basis.size()));
    double emax = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto x = basis.config(i);
        out[static_cast<Eigen::Index>(i)] = tab.at(x);
        emax = std::max(emax, tab.error_at(x));
    }
    if (max_error) *max_error = emax;
    return out;
}

QuadResult wavefunction(const ModelParams& p, const ParticleConfig& x, ContourKind kind, const WaveOptions& opt) {
    if (!is_strictly_increasing(x)) throw InputError("wavefunction: X must be strictly increasing");
    const auto tab = wavefunction_table(p, x, x, kind, opt);
    return {tab.values[0], tab.errors[0], tab.m};
}

cplx psi1_closed(double delta, double t, int x, int y) {
    return std::exp(cplx(0.0, 2.0 * delta * t)) * ipow(cplx(0.0, -1.0), x - y) * bessel_j(x - y, 2.0 * t);
}

cplx psi2_explicit(double delta, double t, int x1, int x2, int y1, int y2, double r, int m) {
    const auto g = discretize_contour(ContourCircle{0.0, r}, m);
    ComplexNeumaier acc;
    for (int a = 0; a < m; ++a) {
        const cplx xi1 = g.nodes[a];
        for (int b = 0; b < m; ++b) {
            const cplx xi2 = g.nodes[b];
            const cplx s21 = -(1.0 + xi1 * xi2 - 2.0 * delta * xi2) / (1.0 + xi1 * xi2 - 2.0 * delta * xi1);
            const cplx braces = std::pow(xi1, x1 - y1 - 1) * std::pow(xi2, x2 - y2 - 1) +
                                s21 * std::pow(xi2, x1 - y2 - 1) * std::pow(xi1, x2 - y1 - 1);
            const cplx e = std::exp(cplx(0.0, -t) * (xi1 + 1.0 / xi1 + xi2 + 1.0 / xi2 - 4.0 * delta));
            acc.add(g.weights[a] * g.weights[b] * braces * e);
        }
    }
    return acc.value();
}

}  // namespace xxz
