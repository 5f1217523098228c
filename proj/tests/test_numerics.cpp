#include <doctest.h>

#include <random>

#include "xxz/numerics.hpp"

using namespace xxz;

namespace {

// power series for J_n(x), n >= 0
double j_series(int n, double x) {
    double term = 1.0;
    for (int k = 1; k <= n; ++k) term *= 0.5 * x / k;
    double sum = 0.0;
    for (int k = 0; k < 60; ++k) {
        sum += term;
        term *= -0.25 * x * x / ((k + 1.0) * (k + 1.0 + n));
    }
    return sum;
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

cplx sum_grid(const QuadGrid& g, const std::function<cplx(cplx)>& f) {
    ComplexNeumaier acc;
    for (std::size_t k = 0; k < g.size(); ++k) acc.add(g.weights[k] * f(g.nodes[k]));
    return acc.value();
}

}  // namespace

TEST_CASE("circle trapezoid reproduces residues") {
    const auto g = discretize_contour(ContourCircle{}, 32);
    CHECK(std::abs(sum_grid(g, [](cplx z) { return 1.0 / z; }) - 1.0) < 1e-12);
    CHECK(std::abs(sum_grid(g, [](cplx) { return cplx(1.0); })) < 1e-12);

    const auto g64 = discretize_contour(ContourCircle{}, 64);
    const cplx j2 = sum_grid(g64, [](cplx z) { return std::pow(z, -3) * std::exp(z - 1.0 / z); });
    CHECK(std::abs(j2 - j_series(2, 2.0)) < 1e-12);
}

TEST_CASE("circle weights carry orientation") {
    for (auto o : {Orientation::positive, Orientation::negative}) {
        ContourCircle c{cplx(0.3, -0.2), 0.7, o, 0.5};
        const auto g = discretize_contour(c, 24);
        REQUIRE(g.nodes.size() == g.weights.size());
        const cplx s = sum_grid(g, [&](cplx z) { return 1.0 / (z - c.center); });
        CHECK(std::abs(s - sign_of(o)) < 1e-12);
    }
    CHECK_THROWS_AS(discretize_contour(ContourCircle{}, 4), InputError);
}

TEST_CASE("piecewise contour: square with an arc") {
    PiecewiseContour sq;
    sq.segments = {Segment::line({1, -1}, {1, 1}), Segment::arc(0.0, std::sqrt(2.0), kPi / 4, 3 * kPi / 4),
                   Segment::line({-1, 1}, {-1, -1}, Grading::toward_end), Segment::line({-1, -1}, {1, -1})};
    CHECK(sq.closure_gap() < 1e-12);
    const auto g = discretize_contour(sq, 128);
    CHECK(std::abs(sum_grid(g, [](cplx z) { return 1.0 / z; }) - 1.0) < 1e-12);
    CHECK(std::abs(sum_grid(g, [](cplx z) { return std::exp(z) / (z * z); }) - 1.0) < 1e-12);
    CHECK_THROWS_AS(Segment::line(1.0, 1.0), InputError);
}

TEST_CASE("integrate_nd basic integrals") {
    std::vector<ContourSpec> two{ContourCircle{}, ContourCircle{}};
    auto r = integrate_nd([](const cplx* z) { return 1.0 / (z[0] * z[1]); }, two);
    CHECK(std::abs(r.value - 1.0) < 1e-12);

    auto r1 = integrate_nd([](const cplx* z) { return 1.0 / z[0]; }, {ContourCircle{0.0, 0.5}});
    CHECK(std::abs(r1.value - 1.0) < 1e-12);
}

TEST_CASE("two-particle integrand at t=0 is a delta") {
    const double delta = 0.4;
    const double r = 0.9 * (std::sqrt(delta * delta + 1) - delta);
    auto f = [&](const cplx* z) {
        const cplx a = z[0], b = z[1];
        const cplx s21 = -(1.0 + a * b - 2 * delta * b) / (1.0 + a * b - 2 * delta * a);
        // X = Y = (0, 1)
        return std::pow(a, -1) * std::pow(b, -1) + s21 * std::pow(b, -2) * std::pow(a, 0);
    };
    auto res = integrate_nd(f, {ContourCircle{0.0, r}, ContourCircle{0.0, r}});
    CHECK(std::abs(res.value - 1.0) < 1e-10);
}

TEST_CASE("contour independence in an annulus") {
    const double t = 0.7;
    auto f = [&](const cplx* z) { return std::pow(z[0], -4) * std::exp(-kI * t * (z[0] + 1.0 / z[0])); };
    auto a = integrate_nd(f, {ContourCircle{0.0, 0.5}});
    auto b = integrate_nd(f, {ContourCircle{0.0, 0.9}});
    CHECK(std::abs(a.value - b.value) < 1e-10);
    CHECK(a.error <= 10 * std::max(a.error, 1e-16));
}

TEST_CASE("reduction is bit-identical for any worker count") {
    std::vector<QuadGrid> grids{discretize_contour(ContourCircle{0.0, 0.8}, 64),
                                discretize_contour(ContourCircle{0.0, 1.1}, 32)};
    Integrand f = [](const cplx* z) { return std::exp(z[0] * z[1]) / (z[0] * z[0] * z[1]); };
    const cplx a = quadrature_sum(f, grids, 1);
    const cplx b = quadrature_sum(f, grids, 3);
    const cplx c = quadrature_sum(f, grids, 7);
    CHECK(a.real() == b.real());
    CHECK(a.imag() == b.imag());
    CHECK(a.real() == c.real());
    CHECK(a.imag() == c.imag());
}

TEST_CASE("grid doubling is consistent with the reported error") {
    auto f = [](const cplx* z) { return std::exp(3.0 * z[0]) / std::pow(z[0], 5); };
    auto r = integrate_nd(f, {ContourCircle{}}, {8, 512, 1e-12, 1e-14, 1});
    // 3^4/4!
    CHECK(std::abs(r.value - 81.0 / 24.0) <= 10 * r.error + 1e-12);
}

TEST_CASE("non-convergence raises with the last two estimates") {
    auto f = [](const cplx* z) { return 1.0 / (z[0] - cplx(0.9999, 0.0)); };
    try {
        integrate_nd(f, {ContourCircle{}}, {8, 64, 1e-10, 1e-12, 1});
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(std::abs(e.previous - e.latest) > 1e-10);
    }
}

TEST_CASE("determinants") {
    CHECK(std::abs(det_complex(CMatrix::Identity(3, 3)) - 1.0) < 1e-15);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    CMatrix a(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = cplx(nd(rng), nd(rng));
    CHECK(std::abs(det_complex(a) - cofactor_det(a)) < 1e-12 * std::max(1.0, std::abs(cofactor_det(a))));

    CMatrix b = a;
    b.col(2) = b.col(0);
    CHECK(std::abs(det_complex(b)) < 1e-13 * b.norm());

    CMatrix z = a;
    z.row(1).setZero();
    CHECK(det_complex(z) == cplx(0.0));

    CMatrix bad = a;
    bad(0, 0) = cplx(std::nan(""), 0.0);
    CHECK_THROWS(det_complex(bad));
}

TEST_CASE("det_lu works for real scalars too") {
    Eigen::Matrix3d m;
    m << 2, 1, 0, 1, 3, 1, 0, 1, 4;
    CHECK(det_lu(m) == doctest::Approx(m.determinant()).epsilon(1e-14));
}
