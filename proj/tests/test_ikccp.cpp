#include <doctest.h>

#include <random>

#include "xxz/bethe.hpp"
#include "xxz/ikccp.hpp"

using namespace xxz;

namespace {

std::vector<cplx> ring(std::mt19937_64& rng, int n, double radius) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    std::vector<cplx> v(n);
    for (auto& z : v) z = std::polar(radius, u(rng));
    return v;
}

cplx cofactor_det(const CMatrix& a) {
    const auto n = a.rows();
    if (n == 1) return a(0, 0);
    cplx s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        CMatrix minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r)
            for (Eigen::Index c = 0, cc = 0; c < n; ++c)
                if (c != j) minor(r - 1, cc++) = a(r, c);
        s += ((j % 2) ? -1.0 : 1.0) * a(0, j) * cofactor_det(minor);
    }
    return s;
}

}  // namespace

TEST_CASE("weight d") {
    CHECK_THROWS_AS(d_weight(0.0, 0.0, 0.4), PoleError);
    CHECK(std::abs(d_weight(0.2, 0.3, 0.0) - 1.0 / (0.94 * 0.5)) < 1e-14);
    CHECK(std::abs(d_weight(0.2, 0.3, 0.0) - 2.127659574468085) < 1e-14);
    CHECK(std::abs(d_weight(cplx(0.1, 0.3), cplx(-0.4, 0.2), 0.7) - d_weight(cplx(-0.4, 0.2), cplx(0.1, 0.3), 0.7)) < 1e-14);
}

TEST_CASE("Izergin-Korepin determinant") {
    std::mt19937_64 rng(3);
    const auto xi = ring(rng, 3, 0.3), zeta = ring(rng, 3, 0.4);
    CHECK(std::abs(ik_determinant({xi[0]}, {zeta[0]}, 0.5) - d_weight(xi[0], zeta[0], 0.5)) < 1e-15);
    CHECK(std::abs(ik_determinant(xi, {zeta[0], zeta[0], zeta[1]}, 0.5)) < 1e-12);
    CMatrix d(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) d(i, j) = d_weight(xi[i], zeta[j], 0.5);
    const cplx ref = cofactor_det(d);
    CHECK(std::abs(ik_determinant(xi, zeta, 0.5) - ref) < 1e-12 * std::abs(ref));
}

TEST_CASE("double-sum identity, N=1 collapse and free point") {
    const cplx a(0.2, 0.1), b(-0.3, 0.2);
    const auto r = ccp_check({a}, {b}, 0.9);
    CHECK(std::abs(r.lhs - 1.0) < 1e-15);
    CHECK(std::abs(r.rhs - 1.0) < 1e-14);

    // Δ = 0: (1 - Πξζ) det(1/(1 - ξ_jζ_k)) on the right
    std::mt19937_64 rng(5);
    const auto xi = ring(rng, 2, 0.3), zeta = ring(rng, 2, 0.4);
    CMatrix c(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c(i, j) = 1.0 / (1.0 - xi[i] * zeta[j]);
    const cplx tw = (1.0 - xi[0] * xi[1] * zeta[0] * zeta[1]) * det_complex(c);
    CHECK(std::abs(ccp_lhs(xi, zeta, 0.0) - tw) < 1e-13);
}

TEST_CASE("double-sum identity at random points") {
    std::mt19937_64 rng(20);
    for (int n = 1; n <= 4; ++n)
        for (double delta : {-1.0, -0.3, 0.5, 2.0}) {
            double worst = 0.0;
            for (int s = 0; s < 20; ++s) {
                const auto xi = ring(rng, n, 0.3);
                const auto zeta = ring(rng, n, 0.4);
                const auto r = ccp_check(xi, zeta, delta);
                worst = std::max(worst, r.relative_error);
            }
            CHECK(worst < 1e-9);
        }
    for (int s = 0; s < 20; ++s) CHECK(ccp_check(ring(rng, 3, 0.3), ring(rng, 3, 0.4), 0.6).relative_error < 1e-9);
}

TEST_CASE("Q polynomial") {
    CHECK(std::abs(q_poly_value({0.3}, {cplx(0.1, 0.2)}, 0.7) - 1.0) < 1e-14);
    const double delta = 0.5;
    const cplx q = q_poly_value({0.1, 0.2}, {0.3, 0.4}, delta);
    CHECK(std::abs(q - q2_explicit(0.1, 0.2, 0.3, 0.4, delta)) < 1e-12);
    CHECK(std::abs(q - q_poly_value({0.2, 0.1}, {0.3, 0.4}, delta)) < 1e-12);
    CHECK(std::abs(q - q_poly_value({0.1, 0.2}, {0.4, 0.3}, delta)) < 1e-12);
    CHECK_THROWS_AS(q_poly_value({0.1, 0.1}, {0.3, 0.4}, delta), InputError);

    std::mt19937_64 rng(9);
    for (int s = 0; s < 10; ++s) {
        const auto xi = ring(rng, 2, 0.5), zeta = ring(rng, 2, 0.6);
        CHECK(std::abs(q_poly_value(xi, zeta, -0.4) - q2_explicit(xi[0], xi[1], zeta[0], zeta[1], -0.4)) < 1e-12);
    }
}

TEST_CASE("Q has degree N-1 in each variable") {
    std::mt19937_64 rng(17);
    for (int n = 2; n <= 4; ++n) {
        auto xi = ring(rng, n, 0.4);
        const auto zeta = ring(rng, n, 0.5);
        std::vector<cplx> pts, vals;
        for (int s = 0; s < n + 2; ++s) {
            xi[0] = std::polar(0.6, 0.7 + 0.9 * s);
            pts.push_back(xi[0]);
            vals.push_back(q_poly_value(xi, zeta, 0.8));
        }
        // Lagrange through the first n samples, evaluated at the last two
        for (int h = n; h < n + 2; ++h) {
            cplx p = 0.0;
            for (int i = 0; i < n; ++i) {
                cplx l = 1.0;
                for (int j = 0; j < n; ++j)
                    if (j != i) l *= (pts[h] - pts[j]) / (pts[i] - pts[j]);
                p += l * vals[i];
            }
            CHECK(std::abs(p - vals[h]) < 1e-9 * std::max(1.0, std::abs(vals[h])));
        }
    }
}

TEST_CASE("Q reduces to the free-fermion product as delta vanishes") {
    std::mt19937_64 rng(23);
    const auto xi = ring(rng, 3, 0.4), zeta = ring(rng, 3, 0.5);
    for (double delta : {1e-2, 1e-4, 1e-6}) {
        cplx den = 1.0;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                den *= (1.0 + xi[i] * xi[j] - 2.0 * delta * xi[i]) * (1.0 + zeta[i] * zeta[j] - 2.0 * delta * zeta[i]);
        CHECK(std::abs(q_poly_value(xi, zeta, delta) / den - 1.0) < 10.0 * delta);
    }
}

TEST_CASE("U-form identity") {
    std::mt19937_64 rng(31);
    const auto v = ring(rng, 2, 0.5);
    // the S-matrix is the ratio of U factors
    CHECK(std::abs(s_matrix(v[1], v[0], 0.3) - u_factor(v[1], v[0], 0.3) / u_factor(v[0], v[1], 0.3)) < 1e-13);
    CHECK_THROWS_AS(u_factor(0.2, 0.2, 0.1), PoleError);

    const auto one = idenU_check({0.3}, {0.2}, 0.5);
    CHECK(one.relative_error < 1e-14);
    for (int s = 0; s < 10; ++s) CHECK(idenU_check(ring(rng, 3, 0.3), ring(rng, 3, 0.4), -0.8).relative_error < 1e-9);
    for (int n = 1; n <= 4; ++n)
        for (double delta : {-1.0, -0.3, 0.5, 2.0})
            for (int s = 0; s < 5; ++s) CHECK(idenU_check(ring(rng, n, 0.3), ring(rng, n, 0.4), delta).relative_error < 1e-9);
}
