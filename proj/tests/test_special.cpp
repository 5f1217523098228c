#include <doctest.h>

#include <cmath>

#include "xxz/special.hpp"

using namespace xxz;

namespace {

// long double power series; fine for the small arguments used here
double j_series(int n, double x) {
    long double term = 1.0L;
    for (int k = 1; k <= n; ++k) term *= 0.5L * x / k;
    long double sum = 0.0L;
    for (int k = 0; k < 80; ++k) {
        sum += term;
        term *= -0.25L * x * x / ((k + 1.0L) * (k + 1.0L + n));
    }
    return static_cast<double>(sum);
}

double i_series(int n, double x) {
    long double term = 1.0L;
    for (int k = 1; k <= n; ++k) term *= 0.5L * x / k;
    long double sum = 0.0L;
    for (int k = 0; k < 80; ++k) {
        sum += term;
        term *= 0.25L * x * x / ((k + 1.0L) * (k + 1.0L + n));
    }
    return static_cast<double>(sum);
}

// Maclaurin series for Ai and Ai'
void airy_series(double x, double& ai, double& aip) {
    const long double c1 = 0.355028053887817239260L, c2 = 0.258819403792806798405L;
    const long double X = x;
    long double a = 1.0L, b = 1.0L;  // coefficients of x^{3k} and x^{3k+1}
    long double f = 1.0L, g = X, fp = 0.0L, gp = 1.0L;
    for (int k = 1; k < 120; ++k) {
        a /= (3.0L * k - 1.0L) * (3.0L * k);
        b /= (3.0L * k) * (3.0L * k + 1.0L);
        f += a * std::pow(X, 3 * k);
        g += b * std::pow(X, 3 * k + 1);
        fp += 3.0L * k * a * std::pow(X, 3 * k - 1);
        gp += (3.0L * k + 1.0L) * b * std::pow(X, 3 * k);
    }
    ai = static_cast<double>(c1 * f - c2 * g);
    aip = static_cast<double>(c1 * fp - c2 * gp);
}

}  // namespace

TEST_CASE("bessel_j trivial and oracle values") {
    CHECK(bessel_j(0, 0.0) == 1.0);
    CHECK(bessel_j(3, 0.0) == 0.0);
    CHECK(std::abs(bessel_j(0, 2.0) - j_series(0, 2.0)) < 1e-13);
    for (int n : {1, 2, 5, 11}) {
        for (double x : {0.3, 1.0, 4.0, 7.5}) {
            const double ref = j_series(n, x);
            CHECK(std::abs(bessel_j(n, x) - ref) <= 1e-13 * std::max(std::abs(ref), 1e-3));
        }
    }
    CHECK(bessel_j(-3, 1.7) == doctest::Approx(-bessel_j(3, 1.7)).epsilon(1e-15));
    CHECK(bessel_j(-4, 1.7) == doctest::Approx(bessel_j(4, 1.7)).epsilon(1e-15));
    CHECK_THROWS_AS(bessel_j(1, -1.0), InputError);
}

TEST_CASE("bessel_j large argument keeps the addition sum rule") {
    for (double x : {50.0, 1000.0, 1e4}) {
        const int k = static_cast<int>(x + 60.0 + 10.0 * std::cbrt(x));
        const auto j = bessel_j_range(-k, k, x);
        Neumaier<double> s;
        for (double v : j) s.add(v * v);
        CHECK(std::abs(s.value() - 1.0) < 1e-12);
    }
    // J_0(100) reference value
    CHECK(std::abs(bessel_j(0, 100.0) - 0.019985850304223122) < 1e-14);
}

TEST_CASE("bessel_i trivial and oracle values") {
    CHECK(bessel_i(0, 0.0) == 1.0);
    CHECK(bessel_i(2, 0.0) == 0.0);
    CHECK(std::abs(bessel_i(1, 2.0) - i_series(1, 2.0)) < 1e-13 * i_series(1, 2.0));
    for (int n : {0, 3, 7})
        for (double x : {0.5, 2.0, 6.0}) CHECK(bessel_i(n, x) == doctest::Approx(i_series(n, x)).epsilon(1e-13));
    CHECK(bessel_i(-2, 1.5) == doctest::Approx(bessel_i(2, 1.5)).epsilon(1e-15));
}

TEST_CASE("generating function") {
    for (double t : {0.5, 2.0, 5.0}) {
        const int k = static_cast<int>(std::ceil(2 * t)) + 40;
        const auto s = bessel_series(-k, k, 2 * t);
        for (double th : {0.3, 1.9, -2.4}) {
            const cplx xi = std::polar(1.0, th);
            ComplexNeumaier acc;
            for (int n = -k; n <= k; ++n) acc.add(std::pow(xi, n) * s.at(n));
            CHECK(std::abs(acc.value() - std::exp(t * (xi - 1.0 / xi))) < 1e-10);
        }
    }
}

TEST_CASE("bessel_pair_sum") {
    CHECK(bessel_pair_sum(0, 0, 0.0) == doctest::Approx(1.0));
    const double t = 2.0;
    const double rhs = t / 2.0 * (bessel_j(0, t) * bessel_j(0, t) - bessel_j(1, t) * bessel_j(-1, t));
    CHECK(std::abs(bessel_pair_sum(1, 0, t) - rhs) < 1e-12);
    for (int nu : {-3, 2, 5})
        for (int mu : {-1, 0, 4}) {
            if (nu == mu) continue;
            const double r = t / (2.0 * (nu - mu)) *
                             (bessel_j(nu - 1, t) * bessel_j(mu, t) - bessel_j(nu, t) * bessel_j(mu - 1, t));
            CHECK(std::abs(bessel_pair_sum(nu, mu, t) - r) < 1e-12);
        }
    // doubled truncation oracle
    const auto j = bessel_j_range(0, 200, t);
    Neumaier<double> s;
    for (double v : j) s.add(v * v);
    CHECK(std::abs(bessel_pair_sum(0, 0, t) - s.value()) < 1e-12);
}

TEST_CASE("Airy functions against the Maclaurin oracle") {
    for (double x : {-6.0, -2.5, 0.0, 0.7, 2.0, 4.5}) {
        double ai, aip;
        airy_series(x, ai, aip);
        CHECK(std::abs(airy_ai(x) - ai) < 1e-12);
        CHECK(std::abs(airy_ai_prime(x) - aip) < 1e-12);
    }
}

TEST_CASE("Airy kernel contour form") {
    CHECK(std::abs(airy_kernel(8.0, 8.0)) < 1e-6);
    CHECK(std::abs(airy_kernel(0.3, 1.1) - airy_kernel(1.1, 0.3)) < 1e-10);

    double ai, aip;
    airy_series(0.0, ai, aip);
    CHECK(std::abs(airy_kernel(0.0, 0.0) - aip * aip) < 1e-9);

    double a1, d1, a2, d2;
    airy_series(0.3, a1, d1);
    airy_series(1.1, a2, d2);
    const double closed = (a1 * d2 - d1 * a2) / (0.3 - 1.1);
    CHECK(std::abs(airy_kernel(0.3, 1.1) - closed) < 1e-9);
    CHECK(std::abs(airy_kernel(-3.0, 2.0) - airy_kernel_closed(-3.0, 2.0)) < 1e-9);
    CHECK(std::abs(airy_kernel(-9.5, -9.5) - airy_kernel_closed(-9.5, -9.5)) < 1e-9);
    CHECK_THROWS_AS(airy_kernel(-11.0, 0.0), InputError);
}
