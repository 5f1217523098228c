#include "xxz/freefermion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>

#include "xxz/bethe.hpp"
#include "xxz/special.hpp"

namespace xxz {

int bessel_truncation_size(double t) { return light_cone_padding(t); }

// ===========================================================================
// Discrete Bessel kernel
// ===========================================================================

KernelMatrix discrete_bessel_kernel(int x, double t, int size) {
    if (t < 0.0 || !std::isfinite(t)) throw InputError("discrete_bessel_kernel: t must be finite and >= 0");
    // order of J at row j is j - x + 2; orders past 2t + 10 t^{1/3} + 20 are negligible
    if (size <= 0) size = std::max(8, bessel_truncation_size(t) + x - 1);
    KernelMatrix k;
    k.offset = 1 - x;
    k.size = size;
    k.entries = Eigen::MatrixXd::Zero(size, size);
    if (t == 0.0) return k;

    const double z = 2.0 * t;
    const int extra = static_cast<int>(z + 40.0 + 10.0 * std::cbrt(z));
    const int nu0 = 1 - x;  // order J_{j-x+1} at j = 0
    const auto j = bessel_j_range(nu0, nu0 + size + extra + 2, z);
    auto jv = [&](int order) { return j[static_cast<std::size_t>(order - nu0)]; };

    // diagonal: tail sums D(ν) = Σ_{n>=0} J_{ν+n}², accumulated from the top
    std::vector<double> tails(static_cast<std::size_t>(size + extra + 2), 0.0);
    for (int i = size + extra; i >= 0; --i) {
        const double v = jv(nu0 + 1 + i);
        tails[static_cast<std::size_t>(i)] = tails[static_cast<std::size_t>(i) + 1] + v * v;
    }
    for (int a = 0; a < size; ++a) {
        k.entries(a, a) = tails[static_cast<std::size_t>(a)];
        for (int b = a + 1; b < size; ++b) {
            const double v = t * (jv(a - x + 1) * jv(b - x + 2) - jv(a - x + 2) * jv(b - x + 1)) / (a - b);
            k.entries(a, b) = v;
            k.entries(b, a) = v;
        }
    }
    // trace of the omitted block
    Neumaier<double> tail;
    for (int i = size; i <= size + extra; ++i) tail.add(tails[static_cast<std::size_t>(i)]);
    k.tail_bound = tail.value();
    return k;
}

double fredholm_det(const KernelMatrix& k) {
    if (!(k.tail_bound < 1e-12)) throw ConvergenceError("fredholm_det: truncation tail not negligible", 0.0, k.tail_bound);
    if (k.size == 0) return 1.0;
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k.size, k.size) - k.entries;
    return Eigen::PartialPivLU<Eigen::MatrixXd>(a).determinant();
}

FredholmResult bessel_fredholm(int x, double t) {
    const auto k1 = discrete_bessel_kernel(x, t);
    const auto k2 = discrete_bessel_kernel(x, t, 2 * k1.size);
    FredholmResult r;
    r.value = fredholm_det(k1);
    r.change = std::abs(fredholm_det(k2) - r.value);
    r.size = k1.size;
    if (r.change > 1e-10) throw ConvergenceError("bessel_fredholm: doubling the truncation changed det(I-L)", r.value, r.value + r.change);
    return r;
}

double toeplitz_rhs(int x, double t) {
    if (x > 1) throw InputError("toeplitz_rhs: needs x <= 1");
    if (t < 0.0 || !std::isfinite(t)) throw InputError("toeplitz_rhs: t must be finite and >= 0");
    const int n = 1 - x;
    if (n == 0) return std::exp(-t * t);
    // e^{-2t} I_{j-k}(2t), with the scale restored in the log
    const auto is = bessel_i_scaled_range(0, n, 2.0 * t);
    using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    LMatrix m(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) m(a, b) = is[static_cast<std::size_t>(std::abs(a - b))];
    const long double d = det_lu(m);
    if (d <= 0.0L) return 0.0;
    return static_cast<double>(std::exp(std::log(d) + 2.0L * t * n - static_cast<long double>(t) * t));
}

// ===========================================================================
// K_N at Δ = 0
// ===========================================================================

namespace {

Eigen::MatrixXcd kn_matrix_contour(const ModelParams& p, int x, double r, int m) {
    const int n = p.n();
    const auto g = discretize_contour(ContourCircle{0.0, r}, m);
    Eigen::MatrixXcd phi(n, m), psi(m, n), c(m, m);
    for (int a = 0; a < m; ++a) {
        const cplx z = g.nodes[static_cast<std::size_t>(a)];
        const cplx w = g.weights[static_cast<std::size_t>(a)];
        const cplx ex = std::exp(cplx(0.0, -p.t) * dispersion(z, 0.0));
        const cplx ez = std::exp(cplx(0.0, p.t) * dispersion(z, 0.0));
        for (int j = 0; j < n; ++j) {
            const cplx pw = ipow(z, x - p.y[static_cast<std::size_t>(j)] - 1);
            phi(j, a) = w * pw * ex;
            psi(a, j) = w * pw * ez;
        }
        for (int b = 0; b < m; ++b) c(a, b) = 1.0 / (1.0 - z * g.nodes[static_cast<std::size_t>(b)]);
    }
    return phi * c * psi;
}

}  // namespace

KdetResult kdet(const ModelParams& p, int x, const KdetOptions& opt) {
    p.validate();
    if (p.delta != 0.0) throw InputError("kdet: needs delta = 0");
    if (!(opt.radius > 0.0 && opt.radius < 1.0)) throw InputError("kdet: radius must lie in (0,1)");
    int m = std::max(opt.m_start, 8);
    cplx prev = det_complex(kn_matrix_contour(p, x, opt.radius, m));
    for (;;) {
        m *= 2;
        const cplx cur = det_complex(kn_matrix_contour(p, x, opt.radius, m));
        const double d = std::abs(cur - prev);
        if (d <= opt.tol) return {cur.real(), d + std::abs(cur.imag()), m};
        if (2 * m > opt.m_max) throw ConvergenceError("kdet: no convergence at node cap", prev, cur);
        prev = cur;
    }
}

KdetResult kdet(double t, int x, int n, const KdetOptions& opt) {
    return kdet(ModelParams{0.0, t, step_configuration(n)}, x, opt);
}

Eigen::MatrixXcd kn_matrix_bessel(const ModelParams& p, int x) {
    const int n = p.n();
    Eigen::MatrixXcd k(n, n);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            k(j, l) = ipow(kI, p.y[static_cast<std::size_t>(j)] - p.y[static_cast<std::size_t>(l)]) *
                      bessel_pair_sum(x - p.y[static_cast<std::size_t>(j)], x - p.y[static_cast<std::size_t>(l)], 2.0 * p.t);
    return k;
}

// ===========================================================================
// Tracy-Widom F₂
// ===========================================================================

double f2_nystrom(double s, int nodes) {
    if (!(s >= -8.0)) throw InputError("f2_nystrom: needs s >= -8");
    std::vector<double> u, w;
    gauss_legendre(nodes, u, w);
    const double c = 3.0;
    Eigen::VectorXd xs(nodes), sw(nodes);
    for (int i = 0; i < nodes; ++i) {
        const double v = 0.5 * (u[static_cast<std::size_t>(i)] + 1.0);  // (0, 1)
        xs[i] = s + c * v / (1.0 - v);
        sw[i] = std::sqrt(0.5 * w[static_cast<std::size_t>(i)] * c / ((1.0 - v) * (1.0 - v)));
    }
    Eigen::MatrixXd a(nodes, nodes);
    for (int i = 0; i < nodes; ++i)
        for (int j = i; j < nodes; ++j) {
            const double v = (i == j ? 1.0 : 0.0) - sw[i] * airy_kernel_closed(xs[i], xs[j]) * sw[j];
            a(i, j) = v;
            a(j, i) = v;
        }
    return Eigen::PartialPivLU<Eigen::MatrixXd>(a).determinant();
}

double f2_estimate(double s) {
    const double v40 = f2_nystrom(s, 40);
    const double v80 = f2_nystrom(s, 80);
    if (std::abs(v40 - v80) > 1e-8) throw ConvergenceError("f2_estimate: 40 and 80 nodes disagree", v40, v80);
    return v40;
}

// ===========================================================================
// Longest increasing subsequences
// ===========================================================================

namespace {

// log f^λ by the hook-length formula
double log_dim(const std::vector<int>& lambda, int k) {
    double lg = std::lgamma(k + 1.0);
    std::vector<int> conj(lambda.empty() ? 0 : static_cast<std::size_t>(lambda[0]), 0);
    for (int row : lambda)
        for (int c = 0; c < row; ++c) ++conj[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < lambda.size(); ++i)
        for (int c = 0; c < lambda[i]; ++c) lg -= std::log(static_cast<double>(lambda[i] - c + conj[static_cast<std::size_t>(c)] - static_cast<int>(i) - 1));
    return lg;
}

}  // namespace

double lis_count(int k, int n) {
    if (k < 0) throw InputError("lis_count: k must be >= 0");
    if (n >= k) return std::exp(std::lgamma(k + 1.0));
    if (n <= 0) return k == 0 ? 1.0 : 0.0;
    // RSK: LIS is the first row length
    Neumaier<double> acc;
    std::vector<int> lambda;
    std::function<void(int, int)> rec = [&](int left, int cap) {
        if (left == 0) {
            acc.add(std::exp(2.0 * log_dim(lambda, k)));
            return;
        }
        for (int part = std::min(left, cap); part >= 1; --part) {
            lambda.push_back(part);
            rec(left - part, part);
            lambda.pop_back();
        }
    };
    rec(k, n);
    return acc.value();
}

std::vector<long long> lis_histogram_bruteforce(int k) {
    if (k < 0 || k > 11) throw InputError("lis_histogram_bruteforce: k must lie in 0..11");
    std::vector<long long> h(static_cast<std::size_t>(k) + 1, 0);
    if (k == 0) {
        h[0] = 1;
        return h;
    }
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> piles;
    do {
        piles.clear();
        for (int v : perm) {
            auto it = std::lower_bound(piles.begin(), piles.end(), v);
            if (it == piles.end())
                piles.push_back(v);
            else
                *it = v;
        }
        ++h[piles.size()];
    } while (std::next_permutation(perm.begin(), perm.end()));
    return h;
}

double poissonized_lis_cdf(int n, double t) {
    if (t < 0.0 || !std::isfinite(t)) throw InputError("poissonized_lis_cdf: t must be finite and >= 0");
    if (n < 0) return 0.0;
    const double t2 = t * t;
    Neumaier<double> acc;
    for (int k = 0;; ++k) {
        // t^{2k}/(k!)² · count, with count <= k!
        const double logw = k * std::log(t2 > 0.0 ? t2 : 1e-300) - 2.0 * std::lgamma(k + 1.0);
        if (k > 0 && t2 == 0.0) break;
        const double bound = std::exp(k * std::log(t2) - std::lgamma(k + 1.0) - t2);
        if (k > n && k > t2 && bound < 1e-18) break;
        const double count = lis_count(k, n);
        if (count > 0.0) acc.add(std::exp(logw - t2 + std::log(count)));
    }
    return acc.value();
}

double poissonized_lis_cdf_bruteforce(int n, double t, int k_max, double* tail) {
    if (t < 0.0 || !std::isfinite(t)) throw InputError("poissonized_lis_cdf_bruteforce: t must be finite and >= 0");
    const double t2 = t * t;
    Neumaier<double> acc;
    static std::mutex mu;
    static std::map<int, std::vector<long long>> cache;
    for (int k = 0; k <= k_max; ++k) {
        std::vector<long long> h;
        {
            std::lock_guard<std::mutex> lock(mu);
            auto it = cache.find(k);
            if (it == cache.end()) it = cache.emplace(k, lis_histogram_bruteforce(k)).first;
            h = it->second;
        }
        long long count = 0;
        for (int l = 0; l <= std::min(n, k); ++l) count += h[static_cast<std::size_t>(l)];
        acc.add(std::pow(t2, k) / std::exp(2.0 * std::lgamma(k + 1.0)) * static_cast<double>(count));
    }
    if (tail) {
        // Poisson tail beyond k_max
        double term = std::exp(-t2), cdf = 0.0;
        for (int k = 0; k <= k_max; ++k) {
            cdf += term;
            term *= t2 / (k + 1);
        }
        *tail = std::max(0.0, 1.0 - cdf);
    }
    return std::exp(-t2) * acc.value();
}

}  // namespace xxz
