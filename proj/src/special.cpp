#include "xxz/special.hpp"

#include <algorithm>
#include <cmath>

namespace xxz {

namespace {

void check_arg(double x, const char* who) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw InputError(std::string(who) + ": argument must be finite and >= 0");
}

// J_0..J_kmax at x > 0.
std::vector<double> miller_j(int kmax, double x) {
    const int start = static_cast<int>(std::max<double>(kmax, x) + 20.0 + 16.0 * std::cbrt(x)) | 1;
    std::vector<double> v(static_cast<std::size_t>(start) + 2, 0.0);
    v[start + 1] = 0.0;
    v[start] = 1e-300;
    double norm = 0.0;
    for (int k = start; k >= 1; --k) {
        v[k - 1] = (2.0 * k / x) * v[k] - v[k + 1];
        if (std::abs(v[k - 1]) > 1e250) {
            for (int j = k - 1; j <= start + 1; ++j) v[j] *= 1e-250;
            norm *= 1e-250;
        }
        if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * v[k - 1];
    }
    norm += v[0];
    v.resize(static_cast<std::size_t>(kmax) + 1);
    for (auto& e : v) e /= norm;
    return v;
}

// e^{-x} I_0..I_kmax at x > 0.
std::vector<double> miller_i_scaled(int kmax, double x) {
    const int start = static_cast<int>(kmax + 40 + std::sqrt(120.0 * x));
    std::vector<double> v(static_cast<std::size_t>(start) + 2, 0.0);
    v[start] = 1e-300;
    double norm = 0.0;
    for (int k = start; k >= 1; --k) {
        v[k - 1] = (2.0 * k / x) * v[k] + v[k + 1];
        if (v[k - 1] > 1e250) {
            for (int j = k - 1; j <= start + 1; ++j) v[j] *= 1e-250;
            norm *= 1e-250;
        }
        if (k - 1 > 0) norm += 2.0 * v[k - 1];
    }
    norm += v[0];
    v.resize(static_cast<std::size_t>(kmax) + 1);
    for (auto& e : v) e /= norm;
    return v;
}

}  // namespace

std::vector<double> bessel_j_range(int nmin, int nmax, double x) {
    check_arg(x, "bessel_j");
    if (nmax < nmin) return {};
    const int kmax = std::max(std::abs(nmin), std::abs(nmax));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(nmax - nmin + 1));
    if (x == 0.0) {
        for (int n = nmin; n <= nmax; ++n) out.push_back(n == 0 ? 1.0 : 0.0);
        return out;
    }
    const auto v = miller_j(kmax, x);
    for (int n = nmin; n <= nmax; ++n) {
        const double a = v[static_cast<std::size_t>(std::abs(n))];
        out.push_back((n < 0 && (-n) % 2) ? -a : a);
    }
    return out;
}

double bessel_j(int n, double x) {
    if (std::abs(static_cast<long>(n)) > 1000000) throw InputError("bessel_j: order too large");
    return bessel_j_range(n, n, x)[0];
}

std::vector<double> bessel_i_scaled_range(int nmin, int nmax, double x) {
    check_arg(x, "bessel_i");
    if (nmax < nmin) return {};
    const int kmax = std::max(std::abs(nmin), std::abs(nmax));
    std::vector<double> out;
    if (x == 0.0) {
        for (int n = nmin; n <= nmax; ++n) out.push_back(n == 0 ? 1.0 : 0.0);
        return out;
    }
    const auto v = miller_i_scaled(kmax, x);
    for (int n = nmin; n <= nmax; ++n) out.push_back(v[static_cast<std::size_t>(std::abs(n))]);
    return out;
}

double bessel_i(int n, double x) {
    if (std::abs(static_cast<long>(n)) > 1000000) throw InputError("bessel_i: order too large");
    return bessel_i_scaled_range(n, n, x)[0] * std::exp(x);
}

BesselSeries bessel_series(int n_min, int n_max, double x) {
    BesselSeries s;
    s.n_min = n_min;
    s.n_max = n_max;
    s.argument = x;
    s.values = bessel_j_range(n_min, n_max, x);
    return s;
}

double bessel_pair_sum(int nu, int mu, double t) {
    check_arg(t, "bessel_pair_sum");
    const int lo = std::min(nu, mu);
    int span = static_cast<int>(t + 40.0 + 10.0 * std::cbrt(t)) + std::abs(nu - mu);
    for (;;) {
        const auto j = bessel_j_range(lo, std::max(nu, mu) + span, t);
        Neumaier<double> acc;
        int small = 0;
        for (int n = 0; n <= span; ++n) {
            const double term = j[static_cast<std::size_t>(nu + n - lo)] * j[static_cast<std::size_t>(mu + n - lo)];
            acc.add(term);
            small = std::abs(term) < 1e-18 ? small + 1 : 0;
            if (small >= 30 && nu + n > t && mu + n > t) return acc.value();
        }
        span *= 2;
    }
}

// ===========================================================================
// Airy
// ===========================================================================

namespace {

struct RayRule {
    std::vector<double> s, w;
};

// Composite Gauss-Legendre on [0, len].
RayRule ray_rule(double len, int panels) {
    std::vector<double> x, w;
    gauss_legendre(16, x, w);
    RayRule r;
    const double h = len / panels;
    for (int p = 0; p < panels; ++p)
        for (int q = 0; q < 16; ++q) {
            r.s.push_back(h * (p + 0.5 * (x[q] + 1.0)));
            r.w.push_back(0.5 * h * w[q]);
        }
    return r;
}

double ray_length(double x) { return 2.0 + std::cbrt(150.0) + std::sqrt(std::abs(x)); }

// (1/pi) Im[ e^{i pi/3} int_0^inf g(v) exp(v^3/3 - x v) ds ], v = c + s e^{i pi/3}
template <typename G>
double airy_ray(double x, G g) {
    const double c = std::sqrt(std::max(x, 0.0));
    const cplx dir = std::polar(1.0, kPi / 3.0);
    const auto rule = ray_rule(ray_length(x), 12);
    ComplexNeumaier acc;
    for (std::size_t k = 0; k < rule.s.size(); ++k) {
        const cplx v = c + rule.s[k] * dir;
        acc.add(rule.w[k] * g(v) * std::exp(v * v * v / 3.0 - x * v));
    }
    return (dir * acc.value()).imag() / kPi;
}

}  // namespace

double airy_ai(double x) {
    return airy_ray(x, [](cplx) { return cplx(1.0); });
}

double airy_ai_prime(double x) {
    return airy_ray(x, [](cplx v) { return -v; });
}

double airy_kernel(double x, double z) {
    if (x < -10.0 || z < -10.0) throw InputError("airy_kernel: arguments must be >= -10");
    // xi rays leave +c at angles +-pi/3, zeta rays leave -c at +-2pi/3; the
    // two contours never meet.
    const double c = std::max(0.5, std::sqrt(std::max({x, z, 0.0})));
    const double len = ray_length(std::max(std::abs(x), std::abs(z)));
    const auto rule = ray_rule(len, 12);
    const std::size_t m = rule.s.size();

    // xi contour: lower ray inward then upper ray outward.
    std::vector<cplx> xi(2 * m), wxi(2 * m);
    const cplx up = std::polar(1.0, kPi / 3.0);
    const cplx dn = std::conj(up);
    for (std::size_t k = 0; k < m; ++k) {
        xi[k] = c + rule.s[k] * dn;
        wxi[k] = -rule.w[k] * dn / (2.0 * kPi * kI);
        xi[m + k] = c + rule.s[k] * up;
        wxi[m + k] = rule.w[k] * up / (2.0 * kPi * kI);
    }
    // zeta = -xi with the orientation reversed, which keeps the weight
    // equal to that of xi.
    std::vector<cplx> ex(2 * m), ez(2 * m);
    for (std::size_t k = 0; k < 2 * m; ++k) {
        const cplx a = xi[k];
        ex[k] = wxi[k] * std::exp(a * a * a / 3.0 - x * a);
        const cplx b = -xi[k];
        ez[k] = wxi[k] * std::exp(-b * b * b / 3.0 + z * b);
    }
    // rays are cut where the integrand has dropped below 1e-14 of its peak
    double peak = 0.0;
    for (std::size_t k = 0; k < 2 * m; ++k) peak = std::max({peak, std::abs(ex[k]), std::abs(ez[k])});
    const double tail = std::max({std::abs(ex[m - 1]), std::abs(ez[m - 1]), std::abs(ex[2 * m - 1]), std::abs(ez[2 * m - 1])});
    if (tail > 1e-14 * peak)
        throw ConvergenceError("airy_kernel: ray truncation too short", cplx(peak), cplx(tail));

    ComplexNeumaier acc;
    for (std::size_t i = 0; i < 2 * m; ++i) {
        ComplexNeumaier row;
        for (std::size_t j = 0; j < 2 * m; ++j) row.add(ez[j] / (xi[i] + xi[j]));
        acc.add(ex[i] * row.value());
    }
    return acc.value().real();
}

double airy_kernel_closed(double x, double z) {
    const double ax = airy_ai(x), dx = airy_ai_prime(x);
    if (x == z) return dx * dx - x * ax * ax;
    const double az = airy_ai(z), dz = airy_ai_prime(z);
    return (ax * dz - dx * az) / (x - z);
}

}  // namespace xxz
