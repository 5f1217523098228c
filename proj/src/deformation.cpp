#include "xxz/deformation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "xxz/bethe.hpp"
#include "xxz/special.hpp"

namespace xxz {

// ===========================================================================
// Spectral functions
// ===========================================================================

namespace {

void check_spectral_arg(cplx z) {
    if (z == cplx(0.0)) throw PoleError("spectral: z = 0");
    if (z.real() < 0.0 && std::abs(z.imag()) < 1e-14) throw InputError("spectral: z on the branch cut of log");
}

double kind_sign(SpectralKind k) { return k == SpectralKind::G ? 1.0 : -1.0; }

}  // namespace

cplx spectral(SpectralKind kind, cplx z, double x, double t) {
    check_spectral_arg(z);
    return kind_sign(kind) * x * std::log(z) - kI * t * (z + 1.0 / z);
}

cplx spectral_d1(SpectralKind kind, cplx z, double x, double t) {
    check_spectral_arg(z);
    return kind_sign(kind) * x / z - kI * t * (1.0 - 1.0 / (z * z));
}

cplx spectral_d2(SpectralKind kind, cplx z, double x, double t) {
    check_spectral_arg(z);
    return -kind_sign(kind) * x / (z * z) - 2.0 * kI * t / (z * z * z);
}

SpectralPoint spectral_point(SpectralKind kind, cplx z, double x, double t) {
    return {kind, x, t, z, spectral(kind, z, x, t)};
}

CriticalPoints critical_points(double x, double t) {
    if (!(t > 0.0)) throw InputError("critical_points: needs t > 0");
    const cplx disc = std::sqrt(cplx(x * x - 4.0 * t * t, 0.0));
    const cplx den = 2.0 * kI * t;
    CriticalPoints c;
    c.xi = {(x + disc) / den, (x - disc) / den};
    c.zeta = {(-x + disc) / den, (-x - disc) / den};
    return c;
}

// ===========================================================================
// Contours
// ===========================================================================

namespace {

Grading flipped(Grading g) {
    switch (g) {
        case Grading::toward_start: return Grading::toward_end;
        case Grading::toward_end: return Grading::toward_start;
        default: return Grading::none;
    }
}

// mirror through the real axis, traversed backwards to stay positive
PiecewiseContour conjugate_contour(const PiecewiseContour& c) {
    PiecewiseContour out;
    out.orientation = c.orientation;
    for (auto it = c.segments.rbegin(); it != c.segments.rend(); ++it) {
        Segment s = it->kind == Segment::Kind::line
                        ? Segment::line(std::conj(it->b), std::conj(it->a), flipped(it->grade))
                        : Segment::arc(std::conj(it->center), it->radius, -it->theta1, -it->theta0, flipped(it->grade));
        s.min_panels = it->min_panels;
        out.segments.push_back(s);
    }
    return out;
}

}  // namespace

PiecewiseContour steep_contour(SteepKind kind, double r_outer, int ray_panels) {
    if (!(r_outer > std::sqrt(3.0) + 1e-9)) throw InputError("steep_contour: needs R_outer > sqrt(3)");
    const double h = 1.5;
    const double w = std::sqrt(r_outer * r_outer - h * h);
    const double th = std::atan2(h, w);
    const cplx ray_r = kI + std::polar(1.0, kPi / 6.0);
    const cplx ray_l = kI + std::polar(1.0, 5.0 * kPi / 6.0);
    PiecewiseContour c;
    c.segments.push_back(Segment::arc(0.0, r_outer, -kPi - th, th));
    c.segments.push_back(Segment::line(cplx(w, h), ray_r));
    c.segments.push_back(Segment::line(ray_r, kI, Grading::toward_end));
    c.segments.push_back(Segment::line(kI, ray_l, Grading::toward_start));
    c.segments.push_back(Segment::line(ray_l, cplx(-w, h)));
    c.segments[2].min_panels = ray_panels;
    c.segments[3].min_panels = ray_panels;
    return kind == SteepKind::plus ? c : conjugate_contour(c);
}

PiecewiseContour gamma_hat(double L, double delta, double eps1, double eps2, double bottom_im) {
    if (!(eps2 > 0.0 && eps2 < eps1 && eps1 < 1.0)) throw InputError("gamma_hat: needs 0 < eps2 < eps1 < 1");
    if (!(bottom_im < 0.0)) throw InputError("gamma_hat: lower edge must lie below the real axis");
    const double shift = 2.0 * delta;
    if (!(L > std::abs(shift) + eps1 + eps2)) throw InputError("gamma_hat: bumps do not fit on the top edge");
    if (delta != 0.0 && !(std::abs(shift) > eps1 + eps2)) throw InputError("gamma_hat: bumps overlap");

    PiecewiseContour c;
    const cplx bl(-L, bottom_im), br(L, bottom_im), tr(L, 1.0), tl(-L, 1.0);
    c.segments.push_back(Segment::line(bl, br));
    c.segments.push_back(Segment::line(br, tr));
    struct Bump {
        double re, r;
        bool outward;
    };
    std::vector<Bump> bumps;
    if (delta != 0.0) {
        bumps.push_back({0.0, eps1, true});
        bumps.push_back({shift, eps2, false});
        std::sort(bumps.begin(), bumps.end(), [](const Bump& a, const Bump& b) { return a.re > b.re; });
    }
    // top edge from right to left
    cplx cur = tr;
    for (const auto& b : bumps) {
        const cplx centre(b.re, 1.0);
        c.segments.push_back(Segment::line(cur, centre + b.r));
        c.segments.push_back(Segment::arc(centre, b.r, 0.0, b.outward ? kPi : -kPi));
        cur = centre - b.r;
    }
    c.segments.push_back(Segment::line(cur, tl));
    c.segments.push_back(Segment::line(tl, bl));
    return c;
}

Theorem4Radii theorem4_radii(double delta) {
    if (delta == 0.0 || !std::isfinite(delta)) throw InputError("theorem4_radii: needs a finite delta != 0");
    const double a = std::abs(delta);
    Theorem4Radii r;
    r.A = std::max(2.0 / a, 2.0 * (1.0 + 2.0 * a));
    r.R = 1.05 * r.A;
    r.Rp = 4.2 * r.A;
    return r;
}

// ===========================================================================
// Steep descent bound
// ===========================================================================

namespace {

// Re{G(ξ) - G(i)} = x ln|ξ| + t Im ξ (1 - 1/|ξ|²), with |ξ|² - 1 formed
// without cancellation
double re_g_shift(cplx z, double x, double t) {
    const double m = z.real() * z.real() + (z.imag() - 1.0) * (z.imag() + 1.0);
    return 0.5 * x * std::log1p(m) + t * z.imag() * m / (1.0 + m);
}

std::vector<cplx> arclength_samples(const PiecewiseContour& c, int n) {
    const double total = c.length();
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(n));
    std::size_t seg = 0;
    double start = 0.0;
    for (int k = 0; k < n; ++k) {
        const double s = (k + 0.5) / n * total;
        while (seg + 1 < c.segments.size() && s > start + c.segments[seg].length()) {
            start += c.segments[seg].length();
            ++seg;
        }
        const double len = c.segments[seg].length();
        out.push_back(c.segments[seg].point(std::clamp((s - start) / len, 0.0, 1.0)));
    }
    return out;
}

}  // namespace

Lemma61Report lemma61_bound_check(double t, double alpha, double r_outer, int samples) {
    if (!(alpha > 0.25 && alpha < 1.0 / 3.0)) throw InputError("lemma61_bound_check: needs 1/4 < alpha < 1/3");
    if (!(t >= 1.0)) throw InputError("lemma61_bound_check: needs t >= 1 so that the ball fits on the rays");
    if (samples < 1) throw InputError("lemma61_bound_check: needs samples >= 1");
    const double x = -2.0 * t;
    const double rho = std::pow(t, -alpha);
    const double scale = std::pow(t, 1.0 - 3.0 * alpha);

    auto pts = arclength_samples(steep_contour(SteepKind::plus, r_outer), samples);
    pts.push_back(kI);
    pts.push_back(kI + rho * std::polar(1.0, kPi / 6.0));
    pts.push_back(kI + rho * std::polar(1.0, 5.0 * kPi / 6.0));

    Lemma61Report r;
    r.t = t;
    r.alpha = alpha;
    r.samples = static_cast<int>(pts.size());
    r.max_re = -std::numeric_limits<double>::infinity();
    r.boundary_re = -std::numeric_limits<double>::infinity();
    r.c_empirical = std::numeric_limits<double>::infinity();
    for (const cplx z : pts) {
        const double v = re_g_shift(z, x, t);
        if (v > r.max_re) {
            r.max_re = v;
            r.argmax = z;
        }
        if (std::abs(z - kI) >= rho * (1.0 - 1e-12)) {
            r.boundary_re = std::max(r.boundary_re, v);
            r.c_empirical = std::min(r.c_empirical, -v / scale);
        }
    }
    r.nonpositive = r.max_re <= 1e-12;
    r.bound_holds = r.c_empirical > 0.0;
    return r;
}

// ===========================================================================
// τ-maps
// ===========================================================================

int TauMap::zeros() const { return static_cast<int>(std::count(images.begin(), images.end(), 0)); }

bool TauMap::admissible() const {
    const int n = this->n();
    std::vector<int> hits(static_cast<std::size_t>(n) + 1, 0);
    for (int v : images) {
        if (v < 0 || v > n) return false;
        if (v > 0 && ++hits[static_cast<std::size_t>(v)] > 1) return false;
    }
    return true;
}

TauSets tau_sets(const TauMap& tau) {
    if (!tau.admissible()) throw InputError("tau_sets: map is not admissible");
    const int n = tau.n();
    TauSets s;
    std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
    for (int k = 1; k <= n; ++k) {
        const int v = tau.images[static_cast<std::size_t>(k - 1)];
        if (v == 0) {
            s.K1.push_back(k);
        } else {
            s.K2.push_back(k);
            s.J2.push_back(v);
            used[static_cast<std::size_t>(v)] = true;
        }
    }
    for (int j = 1; j <= n; ++j)
        if (!used[static_cast<std::size_t>(j)]) s.J1.push_back(j);
    return s;
}

namespace {

void enumerate_rec(int n, int k, std::vector<int>& cur, std::vector<bool>& used, int zeros_left,
                   std::vector<TauMap>& out, bool admissible_only) {
    if (k == n) {
        if (zeros_left == 0 || zeros_left < 0) out.push_back(TauMap{cur});
        return;
    }
    for (int v = 0; v <= n; ++v) {
        if (v == 0) {
            if (admissible_only && zeros_left == 0) continue;
            cur[static_cast<std::size_t>(k)] = 0;
            enumerate_rec(n, k + 1, cur, used, admissible_only ? zeros_left - 1 : zeros_left, out, admissible_only);
            continue;
        }
        if (admissible_only && used[static_cast<std::size_t>(v)]) continue;
        cur[static_cast<std::size_t>(k)] = v;
        const bool was = used[static_cast<std::size_t>(v)];
        used[static_cast<std::size_t>(v)] = true;
        enumerate_rec(n, k + 1, cur, used, zeros_left, out, admissible_only);
        used[static_cast<std::size_t>(v)] = was;
    }
}

}  // namespace

std::vector<TauMap> enumerate_tau(int N, int n) {
    if (N < 1 || N > 4) throw InputError("enumerate_tau: needs 1 <= N <= 4");
    if (n < 0 || n > N) throw InputError("enumerate_tau: needs 0 <= n <= N");
    std::vector<TauMap> out;
    std::vector<int> cur(static_cast<std::size_t>(N), 0);
    std::vector<bool> used(static_cast<std::size_t>(N) + 1, false);
    enumerate_rec(N, 0, cur, used, n, out, true);
    // the recursion places zeros greedily; keep only exact counts
    out.erase(std::remove_if(out.begin(), out.end(), [n](const TauMap& t) { return t.zeros() != n; }), out.end());
    return out;
}

std::vector<TauMap> all_maps(int N) {
    if (N < 1 || N > 4) throw InputError("all_maps: needs 1 <= N <= 4");
    std::vector<TauMap> out;
    std::vector<int> cur(static_cast<std::size_t>(N), 0);
    std::vector<bool> used(static_cast<std::size_t>(N) + 1, false);
    enumerate_rec(N, 0, cur, used, -1, out, false);
    return out;
}

int dn_sign(const TauMap& tau, DnSign rule) {
    const auto s = tau_sets(tau);
    int parity = 0;
    for (std::size_t l = 0; l < s.K2.size(); ++l) parity += s.J2[l] - s.K2[l];
    if (rule == DnSign::derived)
        for (std::size_t a = 0; a < s.J2.size(); ++a)
            for (std::size_t b = a + 1; b < s.J2.size(); ++b)
                if (s.J2[a] > s.J2[b]) ++parity;
    return (parity % 2 == 0) ? 1 : -1;
}

// ===========================================================================
// Integrands
// ===========================================================================

namespace {

const std::vector<PermutationTerm>& perms_of(int n) {
    static const std::vector<std::vector<PermutationTerm>> cache = [] {
        std::vector<std::vector<PermutationTerm>> c;
        c.emplace_back();  // n = 0 is never expanded
        for (int k = 1; k <= 4; ++k) c.push_back(permutations(k));
        return c;
    }();
    if (n < 0 || n > 4) throw InputError("perms_of: size out of range");
    return cache[static_cast<std::size_t>(n)];
}

inline cplx xi_at(const std::vector<cplx>& v, int j) { return v[static_cast<std::size_t>(j - 1)]; }

// Π_{J1×K1} c · det(d)_{J1×K1} / (Π_{J1} X · Π_{K1} X), with the product
// expanded over bijections so that no c is divided out.
cplx in_core(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, const TauSets& s, double delta) {
    const int n1 = static_cast<int>(s.K1.size());
    cplx core = 0.0;
    if (n1 == 0) {
        core = 1.0;
    } else {
        for (const auto& pt : perms_of(n1)) {
            cplx term = static_cast<double>(pt.sign);
            for (int q = 0; q < n1; ++q) {
                const cplx z = xi_at(zeta, s.K1[static_cast<std::size_t>(q)]);
                for (int r = 0; r < n1; ++r) {
                    const cplx x = xi_at(xi, s.J1[static_cast<std::size_t>(r)]);
                    term *= (pt.sigma[static_cast<std::size_t>(q)] == r) ? 1.0 / (1.0 - x * z) : x + z - 2.0 * delta * x * z;
                }
            }
            core += term;
        }
    }
    cplx den = 1.0;
    for (std::size_t a = 0; a < s.J1.size(); ++a)
        for (std::size_t b = a + 1; b < s.J1.size(); ++b) {
            const cplx u = xi_at(xi, s.J1[a]), v = xi_at(xi, s.J1[b]);
            den *= 1.0 + u * v - 2.0 * delta * u;
        }
    for (std::size_t a = 0; a < s.K1.size(); ++a)
        for (std::size_t b = a + 1; b < s.K1.size(); ++b) {
            const cplx u = xi_at(zeta, s.K1[a]), v = xi_at(zeta, s.K1[b]);
            den *= 1.0 + u * v - 2.0 * delta * u;
        }
    return core / den;
}

cplx f_core(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, const TauSets& s, const ModelParams& p) {
    const int n = p.n();
    const double d = p.delta;
    const std::size_t M = s.K2.size();
    cplx res = 1.0;
    for (std::size_t l = 0; l < M; ++l) {
        const int tl = s.J2[l], kl = s.K2[l];
        const cplx a = xi_at(xi, tl);
        for (int k = tl + 1; k <= n; ++k) {
            if (std::find(s.J2.begin() + static_cast<long>(l) + 1, s.J2.end(), k) != s.J2.end()) continue;
            const cplx b = xi_at(xi, k);
            res *= (1.0 + a * b - 2.0 * d * b) / (1.0 + a * b - 2.0 * d * a);
        }
        for (int k = kl + 1; k <= n; ++k) {
            if (std::find(s.K2.begin() + static_cast<long>(l) + 1, s.K2.end(), k) != s.K2.end()) continue;
            const cplx z = xi_at(zeta, k);
            res *= (a + z - 2.0 * d * a * z) / (a + z - 2.0 * d);
        }
        res *= ipow(a, p.y[static_cast<std::size_t>(kl - 1)] - p.y[static_cast<std::size_t>(tl - 1)] - 1);
    }
    return res;
}

void check_vectors(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, const TauMap& tau) {
    if (static_cast<int>(xi.size()) != tau.n() || static_cast<int>(zeta.size()) != tau.n())
        throw InputError("deformation: xi and zeta need one entry per particle");
}

}  // namespace

cplx DN_tau(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, const TauMap& tau, double delta, DnSign rule) {
    check_vectors(xi, zeta, tau);
    const auto s = tau_sets(tau);
    const int n1 = static_cast<int>(s.K1.size());
    Eigen::MatrixXcd m(n1, n1);
    for (int r = 0; r < n1; ++r)
        for (int q = 0; q < n1; ++q) {
            const cplx x = xi_at(xi, s.J1[static_cast<std::size_t>(r)]), z = xi_at(zeta, s.K1[static_cast<std::size_t>(q)]);
            m(r, q) = 1.0 / ((1.0 - x * z) * (x + z - 2.0 * delta * x * z));
        }
    return static_cast<double>(dn_sign(tau, rule)) * (n1 == 0 ? cplx(1.0) : det_complex(m));
}

cplx IN_tau(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, const TauMap& tau, const ModelParams& p, int x,
            DnSign rule) {
    check_vectors(xi, zeta, tau);
    const auto s = tau_sets(tau);
    cplx v = static_cast<double>(dn_sign(tau, rule)) * in_core(xi, zeta, s, p.delta);
    for (int j : s.J1) {
        const cplx z = xi_at(xi, j);
        v *= ipow(z, x - p.y[static_cast<std::size_t>(j - 1)] - 1) * std::exp(-kI * p.t * dispersion(z, p.delta));
    }
    for (int k : s.K1) {
        const cplx z = xi_at(zeta, k);
        v *= ipow(z, x - p.y[static_cast<std::size_t>(k - 1)] - 1) * std::exp(kI * p.t * dispersion(z, p.delta));
    }
    return v;
}

cplx f_factor(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, const TauMap& tau, const ModelParams& p) {
    check_vectors(xi, zeta, tau);
    return f_core(xi, zeta, tau_sets(tau), p);
}

// ===========================================================================
// Series over τ-maps
// ===========================================================================

namespace {

struct TermLevel {
    std::vector<cplx> sum;
    std::vector<double> abs;
};

// One τ-term for x_min .. x_min + w - 1 on m-point trapezoid rules.
TermLevel term_level(const ModelParams& p, int x_min, int w, const TauMap& tau, const Theorem4Radii& rad, int m,
                     DnSign rule, int workers) {
    const int n = p.n();
    const auto s = tau_sets(tau);
    const double sign = dn_sign(tau, rule);
    const auto gx = discretize_contour(ContourCircle{0.0, rad.R}, m);
    const auto gz = discretize_contour(ContourCircle{0.0, rad.Rp}, m);

    std::vector<bool> in_j1(static_cast<std::size_t>(n) + 1, false);
    for (int j : s.J1) in_j1[static_cast<std::size_t>(j)] = true;
    // one-body factors at x_min
    std::vector<std::vector<cplx>> ox(static_cast<std::size_t>(n), std::vector<cplx>(static_cast<std::size_t>(m)));
    std::vector<std::vector<cplx>> oz(s.K1.size(), std::vector<cplx>(static_cast<std::size_t>(m)));
    for (int j = 1; j <= n; ++j)
        for (int a = 0; a < m; ++a) {
            const cplx z = gx.nodes[static_cast<std::size_t>(a)];
            cplx v = gx.weights[static_cast<std::size_t>(a)];
            if (in_j1[static_cast<std::size_t>(j)])
                v *= ipow(z, x_min - p.y[static_cast<std::size_t>(j - 1)] - 1) * std::exp(-kI * p.t * dispersion(z, p.delta));
            ox[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(a)] = v;
        }
    for (std::size_t q = 0; q < s.K1.size(); ++q)
        for (int b = 0; b < m; ++b) {
            const cplx z = gz.nodes[static_cast<std::size_t>(b)];
            oz[q][static_cast<std::size_t>(b)] = gz.weights[static_cast<std::size_t>(b)] *
                                                 ipow(z, x_min - p.y[static_cast<std::size_t>(s.K1[q] - 1)] - 1) *
                                                 std::exp(kI * p.t * dispersion(z, p.delta));
        }

    const int dims = n + static_cast<int>(s.K1.size());
    std::size_t tail = 1;
    for (int i = 1; i < dims; ++i) tail *= static_cast<std::size_t>(m);

    std::vector<TermLevel> parts(static_cast<std::size_t>(m));
    parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t a0) {
        std::vector<int> idx(static_cast<std::size_t>(dims));
        std::vector<cplx> xi(static_cast<std::size_t>(n)), zeta(static_cast<std::size_t>(n), cplx(0.0));
        TermLevel tl{std::vector<cplx>(static_cast<std::size_t>(w), 0.0), std::vector<double>(static_cast<std::size_t>(w), 0.0)};
        idx[0] = static_cast<int>(a0);
        for (std::size_t u = 0; u < tail; ++u) {
            std::size_t rem = u;
            for (int i = dims - 1; i >= 1; --i) {
                idx[static_cast<std::size_t>(i)] = static_cast<int>(rem % static_cast<std::size_t>(m));
                rem /= static_cast<std::size_t>(m);
            }
            cplx one = sign, pp = 1.0;
            for (int j = 1; j <= n; ++j) {
                const int a = idx[static_cast<std::size_t>(j - 1)];
                xi[static_cast<std::size_t>(j - 1)] = gx.nodes[static_cast<std::size_t>(a)];
                one *= ox[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(a)];
                if (in_j1[static_cast<std::size_t>(j)]) pp *= gx.nodes[static_cast<std::size_t>(a)];
            }
            for (std::size_t q = 0; q < s.K1.size(); ++q) {
                const int b = idx[static_cast<std::size_t>(n) + q];
                const cplx z = gz.nodes[static_cast<std::size_t>(b)];
                zeta[static_cast<std::size_t>(s.K1[q] - 1)] = z;
                one *= oz[q][static_cast<std::size_t>(b)];
                pp *= z;
            }
            const cplx val = one * in_core(xi, zeta, s, p.delta) * f_core(xi, zeta, s, p);
            const double app = std::abs(pp);
            cplx pw = 1.0;
            double aw = std::abs(val);
            for (int k = 0; k < w; ++k) {
                tl.sum[static_cast<std::size_t>(k)] += val * pw;
                tl.abs[static_cast<std::size_t>(k)] += aw;
                pw *= pp;
                aw *= app;
            }
        }
        parts[a0] = std::move(tl);
    });

    TermLevel out{std::vector<cplx>(static_cast<std::size_t>(w)), std::vector<double>(static_cast<std::size_t>(w), 0.0)};
    for (int k = 0; k < w; ++k) {
        ComplexNeumaier acc;
        for (const auto& pt : parts) {
            acc.add(pt.sum[static_cast<std::size_t>(k)]);
            out.abs[static_cast<std::size_t>(k)] += pt.abs[static_cast<std::size_t>(k)];
        }
        out.sum[static_cast<std::size_t>(k)] = acc.value();
    }
    return out;
}

int default_t4_m_max(int n) { return n == 1 ? 256 : 64; }

}  // namespace

cplx theorem4_term(const ModelParams& p, int x, const TauMap& tau, int m, DnSign sign) {
    p.validate();
    if (tau.n() != p.n()) throw InputError("theorem4_term: map size differs from N");
    return term_level(p, x, 1, tau, theorem4_radii(p.delta), m, sign, 1).sum[0];
}

Theorem4Result theorem4_sweep(const ModelParams& p, int x_min, int x_max, const Theorem4Options& opt) {
    p.validate();
    if (p.n() > 2) throw InputError("theorem4: N > 2 is not supported");
    if (x_max < x_min) throw InputError("theorem4: empty x range");
    const int n = p.n();
    const int w = x_max - x_min + 1;
    const auto rad = theorem4_radii(p.delta);
    const int m_max = opt.m_max > 0 ? opt.m_max : default_t4_m_max(n);
    std::vector<TauMap> maps;
    for (int k = 0; k <= n; ++k)
        for (auto& t : enumerate_tau(n, k)) maps.push_back(t);

    auto level = [&](int m, std::vector<std::vector<cplx>>& per_term, std::vector<double>& floor) {
        std::vector<cplx> tot(static_cast<std::size_t>(w), 0.0);
        floor.assign(static_cast<std::size_t>(w), 0.0);
        per_term.clear();
        for (const auto& t : maps) {
            auto lv = term_level(p, x_min, w, t, rad, m, opt.sign, opt.workers);
            for (int k = 0; k < w; ++k) {
                tot[static_cast<std::size_t>(k)] += lv.sum[static_cast<std::size_t>(k)];
                floor[static_cast<std::size_t>(k)] += 4.0 * std::numeric_limits<double>::epsilon() * lv.abs[static_cast<std::size_t>(k)];
            }
            per_term.push_back(lv.sum);
        }
        return tot;
    };

    int m = std::min(std::max(opt.m_start, 8), m_max / 2);
    std::vector<std::vector<cplx>> terms_prev, terms_cur;
    std::vector<double> floor;
    auto prev = level(m, terms_prev, floor);
    std::vector<double> d_prev(static_cast<std::size_t>(w), -1.0);
    for (;;) {
        m *= 2;
        auto cur = level(m, terms_cur, floor);
        std::vector<double> est(static_cast<std::size_t>(w));
        bool done = true;
        double worst = 0.0;
        for (int k = 0; k < w; ++k) {
            const std::size_t i = static_cast<std::size_t>(k);
            const double d = std::abs(cur[i] - prev[i]);
            double factor = 1.0;
            if (d_prev[i] > 0.0 && d < 0.5 * d_prev[i]) factor = (d / d_prev[i]) * (d / d_prev[i]);
            est[i] = d * factor + floor[i] + std::abs(cur[i].imag());
            if (d * factor > std::max(opt.tol, 10.0 * floor[i])) done = false;
            worst = std::max(worst, est[i]);
            d_prev[i] = d;
        }
        if (done || 2 * m > m_max) {
            if (!done && worst > opt.fail_tol)
                throw ConvergenceError("theorem4: error estimate above the acceptance level at the node cap", prev[0].real(),
                                       cur[0].real());
            Theorem4Result r;
            r.radii = rad;
            r.m = m;
            for (int k = 0; k < w; ++k) {
                r.x.push_back(x_min + k);
                r.value.push_back(cur[static_cast<std::size_t>(k)].real());
                r.abs_error.push_back(est[static_cast<std::size_t>(k)]);
            }
            for (std::size_t t = 0; t < maps.size(); ++t) r.terms.push_back({maps[t], terms_cur[t]});
            return r;
        }
        prev = std::move(cur);
    }
}

double theorem4_sum(const ModelParams& p, int x, const Theorem4Options& opt) {
    return theorem4_sweep(p, x, x, opt).value[0];
}

cplx theorem4_term_direct(const ModelParams& p, int x, const TauMap& tau, int m_xi, int m_small, int m_big,
                          bool stagger) {
    p.validate();
    const int n = p.n();
    if (tau.n() != n) throw InputError("theorem4_term_direct: map size differs from N");
    if (n > 2) throw InputError("theorem4_term_direct: N > 2 is not supported");
    for (int v : tau.images)
        if (v < 0 || v > n) throw InputError("theorem4_term_direct: image out of range");
    const auto rad = theorem4_radii(p.delta);
    std::vector<QuadGrid> gx;
    for (int j = 0; j < n; ++j)
        gx.push_back(discretize_contour(
            ContourCircle{0.0, rad.R, Orientation::positive, stagger ? static_cast<double>(j) / n : 0.0}, m_xi));
    const auto gz = discretize_contour(ContourCircle{0.0, rad.Rp}, m_big);
    TauMap zero{std::vector<int>(static_cast<std::size_t>(n), 0)};

    std::size_t outer = 1;
    for (int j = 0; j < n; ++j) outer *= static_cast<std::size_t>(m_xi);
    std::vector<int> counts(static_cast<std::size_t>(n));
    std::size_t inner = 1;
    for (int k = 0; k < n; ++k) {
        counts[static_cast<std::size_t>(k)] = tau.images[static_cast<std::size_t>(k)] == 0 ? m_big : m_small;
        inner *= static_cast<std::size_t>(counts[static_cast<std::size_t>(k)]);
    }

    ComplexNeumaier acc;
    std::vector<cplx> xi(static_cast<std::size_t>(n)), zeta(static_cast<std::size_t>(n));
    std::vector<cplx> centre(static_cast<std::size_t>(n));
    std::vector<double> radius(static_cast<std::size_t>(n));
    for (std::size_t u = 0; u < outer; ++u) {
        std::size_t rem = u;
        cplx wx = 1.0;
        for (int j = n - 1; j >= 0; --j) {
            const std::size_t a = rem % static_cast<std::size_t>(m_xi);
            rem /= static_cast<std::size_t>(m_xi);
            xi[static_cast<std::size_t>(j)] = gx[static_cast<std::size_t>(j)].nodes[a];
            wx *= gx[static_cast<std::size_t>(j)].weights[a];
        }
        for (int j = 0; j < n; ++j) {
            const cplx c = 1.0 / xi[static_cast<std::size_t>(j)];
            double r = 0.5 / rad.R;
            for (int l = 0; l < n; ++l)
                if (l != j) r = std::min(r, std::abs(c - 1.0 / xi[static_cast<std::size_t>(l)]) / 3.0);
            centre[static_cast<std::size_t>(j)] = c;
            radius[static_cast<std::size_t>(j)] = r;
        }
        for (std::size_t v = 0; v < inner; ++v) {
            std::size_t r2 = v;
            cplx wz = 1.0;
            bool skip = false;
            for (int k = n - 1; k >= 0; --k) {
                const int cnt = counts[static_cast<std::size_t>(k)];
                const std::size_t b = r2 % static_cast<std::size_t>(cnt);
                r2 /= static_cast<std::size_t>(cnt);
                const int img = tau.images[static_cast<std::size_t>(k)];
                if (img == 0) {
                    zeta[static_cast<std::size_t>(k)] = gz.nodes[b];
                    wz *= gz.weights[b];
                } else {
                    const double r = radius[static_cast<std::size_t>(img - 1)];
                    if (r == 0.0) skip = true;
                    const double ph = stagger ? static_cast<double>(k) / n : 0.0;
                    const cplx e = std::polar(1.0, 2.0 * kPi * (static_cast<double>(b) + ph) / cnt);
                    zeta[static_cast<std::size_t>(k)] = centre[static_cast<std::size_t>(img - 1)] + r * e;
                    wz *= -r * e / static_cast<double>(cnt);  // negatively oriented, dz/(2πi)
                }
            }
            if (skip) continue;
            // coincident nodes on a shared circle give equal columns of det(d)
            if (n == 2 && zeta[0] == zeta[1]) continue;
            acc.add(wx * wz * IN_tau(xi, zeta, zero, p, x));
        }
    }
    return acc.value();
}

Lemma72Report lemma72_check(const ModelParams& p, int x, int m_xi, int m_small, int m_big) {
    Lemma72Report r;
    for (const auto& t : all_maps(p.n())) {
        if (t.admissible()) continue;
        bool repeated_positive = false;
        for (int v = 1; v <= t.n(); ++v)
            if (std::count(t.images.begin(), t.images.end(), v) > 1) repeated_positive = true;
        if (!repeated_positive) continue;
        const cplx v = theorem4_term_direct(p, x, t, m_xi, m_small, m_big);
        r.maps.push_back(t);
        r.values.push_back(v);
        r.max_abs = std::max(r.max_abs, std::abs(v));
    }
    return r;
}

Lemma75Report lemma75_check(const ModelParams& p, int x) {
    p.validate();
    if (p.n() != 1) throw InputError("lemma75_check: needs N = 1");
    const auto rad = theorem4_radii(p.delta);
    const TauMap t0{{0}}, t1{{1}};
    Lemma75Report r;
    r.circles_zero = theorem4_term(p, x, t0, 256);
    r.circles_one = theorem4_term(p, x, t1, 64);

    auto steep = [&](int m, int ray_panels) {
        const auto gp = discretize_contour(steep_contour(SteepKind::plus, rad.R, ray_panels), m);
        const auto gm = discretize_contour(steep_contour(SteepKind::minus, rad.Rp, ray_panels), m);
        std::vector<cplx> xi(1), zeta(1);
        ComplexNeumaier acc;
        for (std::size_t a = 0; a < gp.size(); ++a) {
            xi[0] = gp.nodes[a];
            for (std::size_t b = 0; b < gm.size(); ++b) {
                zeta[0] = gm.nodes[b];
                acc.add(gp.weights[a] * gm.weights[b] * IN_tau(xi, zeta, t0, p, x));
            }
        }
        return acc.value();
    };
    const cplx coarse = steep(512, 24);
    r.steep_zero = steep(1024, 48);
    r.steep_change = std::abs(r.steep_zero - coarse);

    const double L = std::sqrt(rad.R * rad.R - 1.0);
    const auto gh = discretize_contour(gamma_hat(L, p.delta), 512);
    ComplexNeumaier h;
    for (std::size_t a = 0; a < gh.size(); ++a) h.add(gh.weights[a] / gh.nodes[a]);
    r.hat_one = h.value();
    r.diff = std::max(std::abs(r.circles_zero - r.steep_zero), std::abs(r.circles_one - r.hat_one));
    return r;
}

// ===========================================================================
// Ingredients of the large-t partial sum
// ===========================================================================

namespace {

void check_sigma(const std::vector<int>& sigma, const std::vector<int>& S) {
    const int n = static_cast<int>(sigma.size());
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    for (int v : sigma) {
        if (v < 1 || v > n || seen[static_cast<std::size_t>(v)]) throw InputError("sigma is not a permutation of 1..N");
        seen[static_cast<std::size_t>(v)] = true;
    }
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (S[i] < 1 || S[i] > n) throw InputError("S is not a subset of 1..N");
        if (i > 0 && S[i] <= S[i - 1]) throw InputError("S must be strictly increasing");
    }
}

std::vector<int> complement(const std::vector<int>& S, int n) {
    std::vector<int> c;
    for (int j = 1; j <= n; ++j)
        if (!std::binary_search(S.begin(), S.end(), j)) c.push_back(j);
    return c;
}

inline cplx b_ratio(cplx a, cplx b, double delta) {
    // (1 + ab - 2Δb)/(1 + ab - 2Δa) with a = ξ_{σ(k)}, b = ξ_{σ(j)}
    return (1.0 + a * b - 2.0 * delta * b) / (1.0 + a * b - 2.0 * delta * a);
}

}  // namespace

cplx b_factor(const std::vector<cplx>& xi, const std::vector<int>& sigma, const std::vector<int>& S, double delta) {
    check_sigma(sigma, S);
    if (xi.size() != sigma.size()) throw InputError("b_factor: xi needs one entry per particle");
    const auto sc = complement(S, static_cast<int>(sigma.size()));
    cplx res = 1.0;
    for (std::size_t a = 0; a < sc.size(); ++a)
        for (std::size_t b = a + 1; b < sc.size(); ++b) {
            const int sj = sigma[static_cast<std::size_t>(sc[a] - 1)], sk = sigma[static_cast<std::size_t>(sc[b] - 1)];
            if (sj > sk) res *= b_ratio(xi_at(xi, sk), xi_at(xi, sj), delta);
        }
    return res;
}

NuCounts nu_counts(const std::vector<int>& sigma, const std::vector<int>& S, int j) {
    check_sigma(sigma, S);
    const auto sc = complement(S, static_cast<int>(sigma.size()));
    if (!std::binary_search(sc.begin(), sc.end(), j)) throw InputError("nu_counts: j must lie outside S");
    NuCounts c;
    const int sj = sigma[static_cast<std::size_t>(j - 1)];
    for (int jp : sc) {
        const int sp = sigma[static_cast<std::size_t>(jp - 1)];
        if (jp < j && sp > sj) ++c.nu1;
        if (jp > j && sp < sj) ++c.nu2;
    }
    c.nu = j - sj + c.nu2 - c.nu1;
    return c;
}

cplx u_limit(cplx xi, double delta) {
    return (xi - (2.0 * delta + kI)) / ((2.0 * kI * delta + 1.0) * xi - kI);
}

namespace {

// Pieces of a contour, bisected until each is no longer than the larger of
// h0 and its distance to the nearest hot point.
std::vector<Segment> refine_pieces(const PiecewiseContour& c, const std::vector<cplx>& hot, double h0) {
    std::vector<Segment> out;
    std::function<void(const Segment&, int)> rec = [&](const Segment& s, int depth) {
        double dist = std::numeric_limits<double>::infinity();
        for (const cplx h : hot)
            dist = std::min({dist, std::abs(s.point(0.0) - h), std::abs(s.point(0.5) - h), std::abs(s.point(1.0) - h)});
        if (depth < 30 && s.length() > std::max(h0, dist)) {
            const cplx m = s.point(0.5);
            if (s.kind == Segment::Kind::line) {
                rec(Segment::line(s.a, m), depth + 1);
                rec(Segment::line(m, s.b), depth + 1);
            } else {
                const double tm = 0.5 * (s.theta0 + s.theta1);
                rec(Segment::arc(s.center, s.radius, s.theta0, tm), depth + 1);
                rec(Segment::arc(s.center, s.radius, tm, s.theta1), depth + 1);
            }
            return;
        }
        out.push_back(s);
    };
    for (const auto& s : c.segments) rec(s, 0);
    return out;
}

QuadGrid pieces_grid(const std::vector<Segment>& pieces, int sub) {
    std::vector<double> xs, ws;
    gauss_legendre(16, xs, ws);
    const cplx scale = 1.0 / (2.0 * kPi * kI);
    QuadGrid g;
    for (const auto& s : pieces)
        for (int p = 0; p < sub; ++p) {
            const double a = static_cast<double>(p) / sub, h = 0.5 / sub;
            for (std::size_t q = 0; q < xs.size(); ++q) {
                const double u = a + h * (xs[q] + 1.0);
                g.nodes.push_back(s.point(u));
                g.weights.push_back(scale * s.tangent(u) * (h * ws[q]));
            }
        }
    g.refinement_level = sub;
    return g;
}

struct HatGeometry {
    std::vector<Segment> pieces;
};

HatGeometry hat_geometry(double delta, const FOptions& opt) {
    const double R = delta == 0.0 ? 2.0 : theorem4_radii(delta).R;
    const double L = std::sqrt(R * R - 1.0);
    const auto c = gamma_hat(L, delta, opt.eps1, opt.eps2, opt.bottom_im);
    std::vector<cplx> hot;
    if (delta != 0.0) {
        const cplx s = kI + 2.0 * delta;
        for (const cplx h : {kI + opt.eps1, kI - opt.eps1, s + opt.eps2, s - opt.eps2, s + opt.eps1, s - opt.eps1})
            hot.push_back(h);
    }
    return {refine_pieces(c, hot, opt.h0)};
}

cplx f_level(const std::vector<int>& sigma, const std::vector<int>& sc, double delta, const ParticleConfig& y,
             const QuadGrid& g) {
    const int nv = static_cast<int>(sc.size());
    const int m = static_cast<int>(g.size());
    // one-body factor of the variable ξ_{σ(j)} for each j ∈ S^c
    std::vector<Eigen::VectorXcd> u(static_cast<std::size_t>(nv), Eigen::VectorXcd(m));
    for (int p = 0; p < nv; ++p) {
        const int j = sc[static_cast<std::size_t>(p)];
        const int sj = sigma[static_cast<std::size_t>(j - 1)];
        const long pw = y[static_cast<std::size_t>(j - 1)] - y[static_cast<std::size_t>(sj - 1)] - 1;
        int nuj = 0;
        {
            int nu1 = 0, nu2 = 0;
            for (int jp : sc) {
                const int sp = sigma[static_cast<std::size_t>(jp - 1)];
                if (jp < j && sp > sj) ++nu1;
                if (jp > j && sp < sj) ++nu2;
            }
            nuj = j - sj + nu2 - nu1;
        }
        for (int a = 0; a < m; ++a) {
            const cplx z = g.nodes[static_cast<std::size_t>(a)];
            u[static_cast<std::size_t>(p)](a) = g.weights[static_cast<std::size_t>(a)] * ipow(u_limit(z, delta), nuj) * ipow(kI * z, pw);
        }
    }
    // pair factor between the p-th and q-th variables (p < q in S^c order)
    auto pair = [&](int p, int q) {
        const int sj = sigma[static_cast<std::size_t>(sc[static_cast<std::size_t>(p)] - 1)];
        const int sk = sigma[static_cast<std::size_t>(sc[static_cast<std::size_t>(q)] - 1)];
        Eigen::MatrixXcd P = Eigen::MatrixXcd::Ones(m, m);
        if (sj > sk)
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b)
                    P(a, b) = b_ratio(g.nodes[static_cast<std::size_t>(b)], g.nodes[static_cast<std::size_t>(a)], delta);
        return std::make_pair(sj > sk, P);
    };
    const cplx pre = ipow(kI, nv);
    switch (nv) {
        case 0: return 1.0;
        case 1: return pre * u[0].sum();
        case 2: {
            auto [inv, P] = pair(0, 1);
            if (!inv) return pre * u[0].sum() * u[1].sum();
            return pre * (u[0].transpose() * P * u[1])(0, 0);
        }
        case 3: {
            auto [i12, P12] = pair(0, 1);
            auto [i13, P13] = pair(0, 2);
            auto [i23, P23] = pair(1, 2);
            if (!i12 && !i13 && !i23) return pre * u[0].sum() * u[1].sum() * u[2].sum();
            // W(a,b) = Σ_c P13(a,c) u3(c) P23(b,c)
            const Eigen::MatrixXcd W = P13 * u[2].asDiagonal() * P23.transpose();
            return pre * (u[0].transpose() * P12.cwiseProduct(W) * u[1])(0, 0);
        }
        default: throw InputError("F_of: at most three integration variables");
    }
}

}  // namespace

FResult F_of(const std::vector<int>& sigma, const std::vector<int>& S, double delta, const ParticleConfig& y,
             const FOptions& opt) {
    check_sigma(sigma, S);
    if (y.size() != sigma.size()) throw InputError("F_of: y needs one entry per particle");
    const auto sc = complement(S, static_cast<int>(sigma.size()));
    if (sc.size() > 3) throw InputError("F_of: at most three integration variables");
    FResult r;
    if (sc.empty()) {
        r.value = 1.0;
        return r;
    }
    const auto geo = hat_geometry(delta, opt);
    cplx prev = f_level(sigma, sc, delta, y, pieces_grid(geo.pieces, 1));
    for (int sub = 2; sub <= opt.max_sub; sub *= 2) {
        const auto g = pieces_grid(geo.pieces, sub);
        const cplx cur = f_level(sigma, sc, delta, y, g);
        r.value = cur;
        r.abs_error = std::abs(cur - prev);
        r.nodes = static_cast<int>(g.size());
        if (r.abs_error <= opt.tol) return r;
        prev = cur;
    }
    return r;
}

FResult f_empty_sum(double delta, const ParticleConfig& y, const FOptions& opt) {
    const int n = static_cast<int>(y.size());
    FResult r;
    for (const auto& pt : permutations(n)) {
        std::vector<int> sigma(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) sigma[static_cast<std::size_t>(j)] = pt.sigma[static_cast<std::size_t>(j)] + 1;
        const auto f = F_of(sigma, {}, delta, y, opt);
        r.value += static_cast<double>(pt.sign) * f.value;
        r.abs_error += f.abs_error;
        r.nodes = std::max(r.nodes, f.nodes);
    }
    return r;
}

PartialSum conjecture_partial_sum(const ModelParams& p, double s, const FOptions& opt) {
    p.validate();
    const int n = p.n();
    if (n > 3) throw InputError("conjecture_partial_sum: N <= 3");
    if (!(p.t > 0.0)) throw InputError("conjecture_partial_sum: needs t > 0");
    const double t13 = std::cbrt(p.t);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = (p.y[static_cast<std::size_t>(j)] + 1.0) / t13;

    // F depends on σ only through its restriction to S^c
    std::map<std::vector<int>, FResult> cache;
    ComplexNeumaier acc;
    double err = 0.0;
    for (const auto& pt : permutations(n)) {
        std::vector<int> sigma(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) sigma[static_cast<std::size_t>(j)] = pt.sigma[static_cast<std::size_t>(j)] + 1;
        for (int mask = 0; mask < (1 << n); ++mask) {
            std::vector<int> S, key(static_cast<std::size_t>(n), 0);
            for (int j = 1; j <= n; ++j) {
                if (mask & (1 << (j - 1)))
                    S.push_back(j);
                else
                    key[static_cast<std::size_t>(j - 1)] = sigma[static_cast<std::size_t>(j - 1)];
            }
            auto it = cache.find(key);
            if (it == cache.end()) it = cache.emplace(key, F_of(sigma, S, p.delta, p.y, opt)).first;
            const FResult& f = it->second;
            double kprod = 1.0;
            for (int k : S)
                kprod *= airy_kernel_closed(s + v[static_cast<std::size_t>(sigma[static_cast<std::size_t>(k - 1)] - 1)],
                                            s + v[static_cast<std::size_t>(k - 1)]);
            const double coef = pt.sign * ((S.size() % 2) ? -1.0 : 1.0) * std::pow(t13, -static_cast<double>(S.size())) * kprod;
            acc.add(coef * f.value);
            err += std::abs(coef) * f.abs_error;
        }
    }
    return {acc.value().real(), acc.value().imag(), err};
}

double conjecture_delta0_determinant(double t, const ParticleConfig& y, double s) {
    if (!(t > 0.0)) throw InputError("conjecture_delta0_determinant: needs t > 0");
    const int n = static_cast<int>(y.size());
    const double t13 = std::cbrt(t);
    Eigen::MatrixXd m(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            m(j, k) = (j == k ? 1.0 : 0.0) -
                      airy_kernel_closed(s + (y[static_cast<std::size_t>(j)] + 1.0) / t13, s + (y[static_cast<std::size_t>(k)] + 1.0) / t13) / t13;
    return n == 0 ? 1.0 : Eigen::PartialPivLU<Eigen::MatrixXd>(m).determinant();
}

// ===========================================================================
// Leading-order rates
// ===========================================================================

AppendixBReport appendixB_rate_check(const TauMap& tau, double delta, const ParticleConfig& y, const std::vector<double>& ts) {
    if (delta == 0.0) throw InputError("appendixB_rate_check: needs delta != 0");
    if (ts.size() < 2) throw InputError("appendixB_rate_check: needs at least two times");
    const int n = tau.n();
    if (static_cast<int>(y.size()) != n) throw InputError("appendixB_rate_check: y needs one entry per particle");
    const auto s = tau_sets(tau);
    if (s.K2.empty()) throw InputError("appendixB_rate_check: needs a map with residues");

    // σ extending τ, order preserving on K1 -> J1, and S = K1
    std::vector<int> sigma(static_cast<std::size_t>(n));
    for (std::size_t l = 0; l < s.K2.size(); ++l) sigma[static_cast<std::size_t>(s.K2[l] - 1)] = s.J2[l];
    for (std::size_t q = 0; q < s.K1.size(); ++q) sigma[static_cast<std::size_t>(s.K1[q] - 1)] = s.J1[q];

    ModelParams p{delta, 1.0, y};
    AppendixBReport r;
    r.t = ts;
    for (const double t : ts) {
        const double eps = std::pow(t, -1.0 / 3.0);
        std::vector<cplx> xi(static_cast<std::size_t>(n)), zeta(static_cast<std::size_t>(n), cplx(0.0));
        std::vector<cplx> xt(static_cast<std::size_t>(n)), zt(static_cast<std::size_t>(n));
        for (int j : s.J1) {
            xt[static_cast<std::size_t>(j - 1)] = cplx(0.4 + 0.3 * j, 0.5 - 0.2 * j);
            xi[static_cast<std::size_t>(j - 1)] = kI + kI * xt[static_cast<std::size_t>(j - 1)] * eps;
        }
        for (std::size_t l = 0; l < s.J2.size(); ++l)
            xi[static_cast<std::size_t>(s.J2[l] - 1)] = cplx(1.7 + 0.45 * static_cast<double>(l), 0.55 - 0.3 * static_cast<double>(l));
        for (int k : s.K1) {
            zt[static_cast<std::size_t>(k - 1)] = cplx(-0.35 - 0.25 * k, 0.3 + 0.1 * k);
            zeta[static_cast<std::size_t>(k - 1)] = -kI + kI * zt[static_cast<std::size_t>(k - 1)] * eps;
        }
        const cplx exact = f_core(xi, zeta, s, p);
        cplx lead = b_factor(xi, sigma, s.K1, delta);
        for (std::size_t l = 0; l < s.K2.size(); ++l) {
            const int kl = s.K2[l], tl = s.J2[l];
            const cplx a = xi[static_cast<std::size_t>(tl - 1)];
            lead *= ipow(u_limit(a, delta), nu_counts(sigma, s.K1, kl).nu) *
                    ipow(a, y[static_cast<std::size_t>(kl - 1)] - y[static_cast<std::size_t>(tl - 1)] - 1);
        }
        r.f_error.push_back(std::abs(exact - lead));
        if (!s.J1.empty() && !s.K1.empty()) {
            const int j = s.J1[0], k = s.K1[0];
            const cplx x = xi[static_cast<std::size_t>(j - 1)], z = zeta[static_cast<std::size_t>(k - 1)];
            const cplx d = 1.0 / ((1.0 - x * z) * (x + z - 2.0 * delta * x * z));
            const cplx lim = 1.0 / ((zt[static_cast<std::size_t>(k - 1)] - xt[static_cast<std::size_t>(j - 1)]) * (-2.0 * delta));
            r.d_error.push_back(std::abs(eps * d - lim));
        }
    }
    auto window_ok = [&](const std::vector<double>& e) {
        if (e.empty()) return true;
        for (std::size_t i = 0; i + 1 < e.size(); ++i) {
            const double expect = std::cbrt(r.t[i + 1] / r.t[i]);
            const double ratio = e[i] / e[i + 1];
            if (!(ratio >= expect / 2.0 && ratio <= 2.0 * expect)) return false;
        }
        const double expect = std::cbrt(r.t.back() / r.t.front());
        const double ratio = e.front() / e.back();
        return ratio >= expect / 2.0 && ratio <= 2.0 * expect;
    };
    r.f_ratio_ends = r.f_error.front() / r.f_error.back();
    if (!r.d_error.empty()) r.d_ratio_ends = r.d_error.front() / r.d_error.back();
    r.pass = window_ok(r.f_error) && window_ok(r.d_error);
    return r;
}

}  // namespace xxz
