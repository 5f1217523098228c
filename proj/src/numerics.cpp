#include "xxz/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace xxz {

cplx pairwise_sum(const std::vector<cplx>& parts) {
    if (parts.empty()) return {};
    std::vector<cplx> level = parts;
    while (level.size() > 1) {
        std::vector<cplx> next((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
            ComplexNeumaier acc;
            acc.add(level[i]);
            acc.add(level[i + 1]);
            next[i / 2] = acc.value();
        }
        if (level.size() % 2) next.back() = level.back();
        level.swap(next);
    }
    return level[0];
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t w = 0; w < nt; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

// ===========================================================================
// contours
// ===========================================================================

Segment Segment::line(cplx from, cplx to, Grading g) {
    if (std::abs(to - from) == 0.0) throw InputError("degenerate contour segment");
    Segment s;
    s.kind = Kind::line;
    s.a = from;
    s.b = to;
    s.grade = g;
    return s;
}

Segment Segment::arc(cplx c, double r, double from, double to, Grading g) {
    if (!(r > 0.0) || from == to) throw InputError("degenerate contour arc");
    Segment s;
    s.kind = Kind::arc;
    s.center = c;
    s.radius = r;
    s.theta0 = from;
    s.theta1 = to;
    s.grade = g;
    return s;
}

cplx Segment::point(double s) const {
    if (kind == Kind::line) return a + s * (b - a);
    return center + radius * std::exp(kI * (theta0 + s * (theta1 - theta0)));
}

cplx Segment::tangent(double s) const {
    if (kind == Kind::line) return b - a;
    const double dth = theta1 - theta0;
    return kI * dth * radius * std::exp(kI * (theta0 + s * dth));
}

double Segment::length() const {
    if (kind == Kind::line) return std::abs(b - a);
    return radius * std::abs(theta1 - theta0);
}

double PiecewiseContour::closure_gap() const {
    double gap = 0.0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& cur = segments[i];
        const auto& nxt = segments[(i + 1) % segments.size()];
        gap = std::max(gap, std::abs(cur.end() - nxt.start()));
    }
    return gap;
}

double PiecewiseContour::length() const {
    double l = 0.0;
    for (const auto& s : segments) l += s.length();
    return l;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

namespace {

constexpr int kPanelOrder = 16;

const std::vector<double>& gl16_nodes() {
    static const auto data = [] {
        std::vector<double> x, w;
        gauss_legendre(kPanelOrder, x, w);
        return std::make_pair(x, w);
    }();
    return data.first;
}

const std::vector<double>& gl16_weights() {
    static const auto data = [] {
        std::vector<double> x, w;
        gauss_legendre(kPanelOrder, x, w);
        return w;
    }();
    return data;
}

// Panel breakpoints on [0,1]. With grading, the uniform panel touching the
// singular end is split geometrically (ratio 1/2) into `panels` more pieces.
std::vector<double> panel_breaks(int panels, Grading g) {
    std::vector<double> b;
    if (g == Grading::none) {
        for (int i = 0; i <= panels; ++i) b.push_back(static_cast<double>(i) / panels);
        return b;
    }
    const double h = 1.0 / panels;
    const int depth = std::min(panels, 40);  // deeper breaks round onto the endpoint
    b.push_back(0.0);
    for (int i = depth - 1; i >= 0; --i) b.push_back(h * std::ldexp(1.0, -i));
    for (int i = 2; i <= panels; ++i) b.push_back(i * h);
    if (g == Grading::toward_end) {
        std::vector<double> m(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) m[i] = 1.0 - b[b.size() - 1 - i];
        return m;
    }
    return b;
}

}  // namespace

QuadGrid discretize_contour(const ContourCircle& c, int m) {
    if (m < 8) throw InputError("discretize_contour: need at least 8 nodes");
    if (!(c.radius > 0.0)) throw InputError("discretize_contour: radius must be positive");
    QuadGrid g;
    g.nodes.resize(m);
    g.weights.resize(m);
    const double sgn = sign_of(c.orientation);
    for (int k = 0; k < m; ++k) {
        const double th = 2.0 * kPi * (k + c.phase) / m;
        const cplx u = c.radius * cplx(std::cos(th), std::sin(th));
        g.nodes[k] = c.center + u;
        g.weights[k] = sgn * u / static_cast<double>(m);
    }
    g.refinement_level = m;
    return g;
}

QuadGrid discretize_contour(const PiecewiseContour& c, int m) {
    if (m < 8) throw InputError("discretize_contour: need at least 8 nodes");
    if (c.segments.empty()) throw InputError("discretize_contour: empty contour");
    const double total = c.length();
    const auto& xs = gl16_nodes();
    const auto& ws = gl16_weights();
    const double sgn = sign_of(c.orientation);
    const cplx scale = sgn / (2.0 * kPi * kI);
    QuadGrid g;
    for (const auto& seg : c.segments) {
        if (seg.length() == 0.0) throw InputError("degenerate contour segment");
        int panels = static_cast<int>(std::ceil(m * seg.length() / total / kPanelOrder));
        panels = std::max(panels, 1);
        if (seg.grade != Grading::none) panels = std::max(panels, 4);
        panels = std::max(panels, seg.min_panels);
        const auto br = panel_breaks(panels, seg.grade);
        for (std::size_t p = 0; p + 1 < br.size(); ++p) {
            const double a = br[p], b = br[p + 1];
            const double h = 0.5 * (b - a);
            for (int q = 0; q < kPanelOrder; ++q) {
                const double s = a + h * (xs[q] + 1.0);
                g.nodes.push_back(seg.point(s));
                g.weights.push_back(scale * seg.tangent(s) * (h * ws[q]));
            }
        }
    }
    g.refinement_level = m;
    return g;
}

QuadGrid discretize_contour(const ContourSpec& c, int m) {
    return std::visit([m](const auto& cc) { return discretize_contour(cc, m); }, c);
}

// ===========================================================================
// quadrature
// ===========================================================================

cplx quadrature_sum(const Integrand& f, const std::vector<QuadGrid>& grids, int workers) {
    const std::size_t d = grids.size();
    if (d == 0) throw InputError("quadrature_sum: no dimensions");
    for (const auto& g : grids)
        if (g.size() == 0) throw InputError("quadrature_sum: empty grid");

    const std::size_t outer = grids[0].size();
    std::vector<cplx> partial(outer);
    parallel_for(outer, workers, [&](std::size_t i0) {
        std::vector<std::size_t> idx(d, 0);
        std::vector<cplx> z(d);
        idx[0] = i0;
        z[0] = grids[0].nodes[i0];
        ComplexNeumaier acc;
        for (;;) {
            cplx w = grids[0].weights[i0];
            for (std::size_t k = 1; k < d; ++k) {
                z[k] = grids[k].nodes[idx[k]];
                w *= grids[k].weights[idx[k]];
            }
            acc.add(w * f(z.data()));
            // odometer over the inner dimensions, last one fastest
            std::size_t k = d;
            while (k > 1) {
                --k;
                if (++idx[k] < grids[k].size()) break;
                idx[k] = 0;
                if (k == 1) k = 0;
            }
            if (k == 0 || d == 1) break;
        }
        partial[i0] = acc.value();
    });
    const cplx v = pairwise_sum(partial);
    require_finite(v, "quadrature_sum");
    return v;
}

QuadResult integrate_nd(const Integrand& f, const std::vector<ContourSpec>& contours,
                        const QuadOptions& opt) {
    if (contours.empty()) throw InputError("integrate_nd: no dimensions");
    auto level = [&](int m) {
        std::vector<QuadGrid> grids;
        grids.reserve(contours.size());
        for (const auto& c : contours) grids.push_back(discretize_contour(c, m));
        return quadrature_sum(f, grids, opt.workers);
    };
    int m = std::max(opt.m_start, 8);
    cplx prev = level(m);
    cplx cur = prev;
    while (2 * m <= opt.m_max) {
        m *= 2;
        cur = level(m);
        const double err = std::abs(cur - prev);
        if (err <= opt.atol + opt.rtol * std::abs(cur)) return {cur, err, m};
        if (2 * m > opt.m_max) break;
        prev = cur;
    }
    throw ConvergenceError("integrate_nd: no convergence at node cap", prev, cur);
}

cplx det_complex(const CMatrix& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) require_finite(a(i, j), "det_complex");
    return det_lu(a);
}

}  // namespace xxz
