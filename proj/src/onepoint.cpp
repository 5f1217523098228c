#include "xxz/onepoint.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <stdexcept>

#include "xxz/bethe.hpp"
#include "xxz/ed.hpp"
#include "xxz/special.hpp"

namespace xxz {

const char* method_name(OnePointMethod m) {
    switch (m) {
        case OnePointMethod::theorem2: return "theorem2";
        case OnePointMethod::detRep: return "detRep";
        case OnePointMethod::brute_force: return "brute_force";
        case OnePointMethod::oracle: return "oracle";
    }
    return "unknown";
}

const DistributionEntry& DistributionTable::at(int x) const {
    for (const auto& e : entries)
        if (e.x == x) return e;
    throw InputError("DistributionTable: x not in table");
}

OnePointRadii onepoint_radii(double delta, int n, double t) {
    const double a = std::abs(delta);
    const double r0 = n > 1 ? std::sqrt(a * a + 1.0) - a : 1.0;
    const double big0 = n > 1 ? 1.0 / r0 : 1.0;
    OnePointRadii best;
    double best_score = 1e300;
    // log error model: aliasing q^M against roundoff eps times the integrand
    // size, which grows like e^{t(R - 1/R + 1/r - r)} (Rr)^{x-y-1} per pair
    const double m_nom = 32.0;
    for (int i = 1; i <= 80; ++i) {
        const double r = 0.98 * r0 * i / 80.0;
        for (int k = 1; k <= 80; ++k) {
            const double R = big0 * (1.0 + 0.02 + 0.05 * k);
            if (R * r >= 0.95) break;
            double q = R * r;
            if (n > 1) {
                if (2.0 * a * r >= 1.0 || R <= 2.0 * a) continue;
                q = std::max({q, r * (r + 2.0 * a), r * r / (1.0 - 2.0 * a * r), 1.0 / (R * (R - 2.0 * a)),
                              (2.0 * a + 1.0 / R) / R});
            }
            if (q >= 0.95) continue;
            const double growth = n * (t * (R - 1.0 / R + 1.0 / r - r) + 7.0 * std::log(1.0 / (R * r)));
            const double score = std::max(m_nom * std::log(q), -36.0 + growth);
            if (score < best_score) {
                best_score = score;
                best = {r, R, q};
            }
        }
    }
    if (best.r == 0.0) throw InputError("onepoint_radii: no admissible radii");
    return best;
}

namespace {

int default_m_max(int n) {
    switch (n) {
        case 1: return 512;
        case 2: return 64;
        default: return 32;
    }
}

struct Level {
    std::vector<cplx> geq, at;
    std::vector<double> floor;  // eps times the sum of |terms|
};

Level sweep_level(const ModelParams& p, int x_min, int x_max, const OnePointRadii& rad, int m, int workers) {
    const int n = p.n();
    const int w = x_max - x_min + 1;
    const auto gx = discretize_contour(ContourCircle{0.0, rad.R}, m);
    const auto gz = discretize_contour(ContourCircle{0.0, rad.r}, m);
    const auto& xi = gx.nodes;
    const auto& ze = gz.nodes;

    // single-variable factors, including (ξζ)^{x_min}
    std::vector<std::vector<cplx>> fx(n, std::vector<cplx>(m)), fz(n, std::vector<cplx>(m));
    for (int j = 0; j < n; ++j)
        for (int a = 0; a < m; ++a) {
            fx[j][a] = gx.weights[a] * ipow(xi[a], x_min - p.y[j] - 1) * std::exp(cplx(0.0, -p.t) * dispersion(xi[a], p.delta));
            fz[j][a] = gz.weights[a] * ipow(ze[a], x_min - p.y[j] - 1) * std::exp(cplx(0.0, p.t) * dispersion(ze[a], p.delta));
        }

    // c = ξ+ζ-2Δξζ, e = c d = 1/(1-ξζ); the product Π c det(d) is expanded
    // over permutations so no c is ever divided out.
    std::vector<cplx> ctab(static_cast<std::size_t>(m) * m), etab(ctab.size()), xx(ctab.size()), zz(ctab.size());
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            const std::size_t ab = static_cast<std::size_t>(a) * m + b;
            ctab[ab] = xi[a] + ze[b] - 2.0 * p.delta * xi[a] * ze[b];
            const cplx g = 1.0 - xi[a] * ze[b];
            if (std::abs(g) < 1e-14) throw PoleError("onepoint: 1 - xi zeta vanishes on the grid");
            etab[ab] = 1.0 / g;
            xx[ab] = 1.0 + xi[a] * xi[b] - 2.0 * p.delta * xi[a];
            zz[ab] = 1.0 + ze[a] * ze[b] - 2.0 * p.delta * ze[a];
            if (n > 1 && (std::abs(xx[ab]) < 1e-14 || std::abs(zz[ab]) < 1e-14))
                throw PoleError("onepoint: pole of the denominator on the grid");
        }

    const auto perms = permutations(n);
    std::size_t tail = 1;
    for (int i = 1; i < n; ++i) tail *= static_cast<std::size_t>(m);
    std::size_t ztuples = tail * static_cast<std::size_t>(m);

    std::vector<std::vector<cplx>> part_geq(m, std::vector<cplx>(w)), part_at(m, std::vector<cplx>(w));
    std::vector<std::vector<double>> part_abs(m, std::vector<double>(w));
    parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t a1) {
        std::vector<int> ia(n), ib(n);
        std::vector<cplx> sg(w, 0.0), sa(w, 0.0);
        std::vector<double> sabs(w, 0.0);
        ia[0] = static_cast<int>(a1);
        for (std::size_t s = 0; s < tail; ++s) {
            std::size_t rem = s;
            for (int i = n - 1; i >= 1; --i) {
                ia[i] = static_cast<int>(rem % m);
                rem /= m;
            }
            cplx xfac = 1.0, pxi = 1.0, dx = 1.0;
            for (int j = 0; j < n; ++j) {
                xfac *= fx[j][ia[j]];
                pxi *= xi[ia[j]];
                for (int k = j + 1; k < n; ++k) dx *= xx[static_cast<std::size_t>(ia[j]) * m + ia[k]];
            }
            xfac /= dx;
            for (std::size_t u = 0; u < ztuples; ++u) {
                std::size_t r2 = u;
                for (int i = n - 1; i >= 0; --i) {
                    ib[i] = static_cast<int>(r2 % m);
                    r2 /= m;
                }
                cplx zfac = 1.0, pz = 1.0, dz = 1.0;
                for (int j = 0; j < n; ++j) {
                    zfac *= fz[j][ib[j]];
                    pz *= ze[ib[j]];
                    for (int k = j + 1; k < n; ++k) dz *= zz[static_cast<std::size_t>(ib[j]) * m + ib[k]];
                }
                cplx core = 0.0;
                for (const auto& pt : perms) {
                    cplx term = pt.sign;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) {
                            const std::size_t ij = static_cast<std::size_t>(ia[i]) * m + ib[j];
                            term *= (pt.sigma[i] == j) ? etab[ij] : ctab[ij];
                        }
                    core += term;
                }
                const cplx val = xfac * zfac * core / dz;
                const cplx pp = pxi * pz;
                const double app = std::abs(pp);
                double aw = std::abs(val) * (1.0 + app);
                cplx pw = 1.0;
                for (int x = 0; x < w; ++x) {
                    const cplx v = val * pw;
                    sg[x] += v;
                    sa[x] += v - v * pp;
                    sabs[x] += aw;
                    pw *= pp;
                    aw *= app;
                }
            }
        }
        part_geq[a1] = sg;
        part_at[a1] = sa;
        part_abs[a1] = sabs;
    });

    Level lv{std::vector<cplx>(w), std::vector<cplx>(w), std::vector<double>(w)};
    for (int x = 0; x < w; ++x) {
        ComplexNeumaier g, a;
        for (int a1 = 0; a1 < m; ++a1) {
            g.add(part_geq[a1][x]);
            a.add(part_at[a1][x]);
        }
        lv.geq[x] = g.value();
        lv.at[x] = a.value();
        double s = 0.0;
        for (int a1 = 0; a1 < m; ++a1) s += part_abs[a1][x];
        lv.floor[x] = 4.0 * std::numeric_limits<double>::epsilon() * s;
    }
    return lv;
}

}  // namespace

OnePointSweep onepoint_sweep(const ModelParams& p, int x_min, int x_max, const OnePointOptions& opt) {
    p.validate();
    if (x_max < x_min) throw InputError("onepoint: empty x range");
    if (p.n() > 3) throw InputError("onepoint: N > 3 is not supported by the full quadrature");
    const auto rad = onepoint_radii(p.delta, p.n(), p.t);
    const int m_max = opt.m_max > 0 ? opt.m_max : default_m_max(p.n());
    int m = std::min(std::max(opt.m_start, 8), m_max / 2);

    Level prev = sweep_level(p, x_min, x_max, rad, m, opt.workers);
    const std::size_t w = prev.geq.size();
    std::vector<double> d_prev(w, -1.0);
    for (;;) {
        m *= 2;
        Level cur = sweep_level(p, x_min, x_max, rad, m, opt.workers);
        std::vector<double> d(w), est_g(w), est_a(w);
        bool done = true;
        std::size_t worst = 0;
        double worst_excess = 0.0;
        for (std::size_t i = 0; i < w; ++i) {
            const double dg = std::abs(cur.geq[i] - prev.geq[i]), da = std::abs(cur.at[i] - prev.at[i]);
            d[i] = std::max(dg, da);
            double factor = 1.0;
            if (d_prev[i] > 0.0 && d[i] < 0.5 * d_prev[i]) factor = (d[i] / d_prev[i]) * (d[i] / d_prev[i]);
            est_g[i] = dg * factor;
            est_a[i] = da * factor;
            // below the summation floor the differences are roundoff, not aliasing
            const double tol = std::max(opt.atol + opt.rtol * std::abs(cur.geq[i]), 10.0 * cur.floor[i]);
            const double excess = d[i] * factor / tol;
            if (excess > 1.0) done = false;
            if (excess > worst_excess) {
                worst_excess = excess;
                worst = i;
            }
        }
        if (done) {
            OnePointSweep out;
            out.m = m;
            out.radii = rad;
            out.geq.params = out.at.params = p;
            out.geq.method = OnePointMethod::theorem2;
            out.geq.cumulative = true;
            out.at.method = OnePointMethod::detRep;
            for (int x = x_min; x <= x_max; ++x) {
                const std::size_t i = static_cast<std::size_t>(x - x_min);
                // a probability: the imaginary part is pure quadrature error
                const double eg = est_g[i] + std::abs(cur.geq[i].imag()) + cur.floor[i];
                const double ea = est_a[i] + std::abs(cur.at[i].imag()) + cur.floor[i];
                out.geq.entries.push_back({x, cur.geq[i].real(), eg});
                out.at.entries.push_back({x, cur.at[i].real(), ea});
            }
            return out;
        }
        if (2 * m > m_max) throw ConvergenceError("onepoint: no convergence at node cap", prev.geq[worst], cur.geq[worst]);
        d_prev = d;
        prev = std::move(cur);
    }
}

double prob_leftmost_at(const ModelParams& p, int x, const OnePointOptions& opt) {
    return onepoint_sweep(p, x, x, opt).at.entries[0].value;
}

double prob_leftmost_geq(const ModelParams& p, int x, const OnePointOptions& opt) {
    return onepoint_sweep(p, x, x, opt).geq.entries[0].value;
}

DistributionTable brute_force_table(const ModelParams& p, int x_min, int x_max, int workers) {
    p.validate();
    if (p.n() > 3) throw InputError("brute_force_table: N > 3 is not supported");
    if (x_max < x_min) throw InputError("brute_force_table: empty x range");
    const int n = p.n();
    const int right = std::max(p.y.back(), x_max + n - 1) + static_cast<int>(std::ceil(2.0 * p.t + 5.0 * std::cbrt(p.t) + 12.0));
    std::vector<int> lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
        lo[i] = x_min + i;
        hi[i] = right - (n - 1 - i);
    }
    hi[0] = x_max;
    WaveOptions wo;
    wo.workers = workers;
    const auto tab = wavefunction_table(p, lo, hi, ContourKind::small, wo);

    DistributionTable out;
    out.params = p;
    out.method = OnePointMethod::brute_force;
    for (int x = x_min; x <= x_max; ++x) {
        Neumaier<double> v, e;
        ParticleConfig c(n);
        c[0] = x;
        // odometer over x_2 < ... < x_N inside the box
        std::function<void(int)> rec = [&](int i) {
            if (i == n) {
                const cplx a = tab.at(c);
                const double err = tab.error_at(c);
                v.add(std::norm(a));
                e.add(2.0 * std::abs(a) * err + err * err);
                return;
            }
            for (int s = c[i - 1] + 1; s <= hi[i]; ++s) {
                c[i] = s;
                rec(i + 1);
            }
        };
        rec(1);
        out.entries.push_back({x, v.value(), e.value()});
    }
    return out;
}

double prob_leftmost_brute(const ModelParams& p, int x) { return brute_force_table(p, x, x).entries[0].value; }

DistributionTable oracle_table(const ModelParams& p, int x_min, int x_max, int workers) {
    const auto run = oracle_evolve(p, -1, workers);
    const auto marg = marginal_table(run.basis, run.psi, 1);
    DistributionTable out;
    out.params = p;
    out.method = OnePointMethod::oracle;
    for (int x = x_min; x <= x_max; ++x) {
        const auto it = marg.find(x);
        out.entries.push_back({x, it == marg.end() ? 0.0 : it->second, 1e-12});
    }
    return out;
}

double fprob_delta0(const ModelParams& p, int x) {
    p.validate();
    const int n = p.n();
    CMatrix k(n, n);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            k(j, l) = ipow(kI, p.y[j] - p.y[l]) * bessel_pair_sum(x - p.y[j], x - p.y[l], 2.0 * p.t);
    return det_complex(k).real();
}

}  // namespace xxz
