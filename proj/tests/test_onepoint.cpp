#include <doctest.h>

#include "xxz/ed.hpp"
#include "xxz/onepoint.hpp"
#include "xxz/special.hpp"

using namespace xxz;

namespace {

// P(X_1 >= x) from the full ED marginal
double oracle_geq(const std::map<int, double>& marg, int x) {
    double s = 0.0;
    for (const auto& [site, v] : marg)
        if (site >= x) s += v;
    return s;
}

}  // namespace

TEST_CASE("radii keep all poles on the right side") {
    for (double d : {-1.5, -0.8, 0.0, 0.3, 0.5, 2.0})
        for (int n : {1, 2, 3}) {
            const auto r = onepoint_radii(d, n, 0.8);
            CHECK(r.R * r.r < 1.0);
            CHECK(r.ratio < 1.0);
            if (n > 1) {
                const double a = std::abs(d);
                CHECK(r.r < std::sqrt(a * a + 1.0) - a);
                CHECK(r.R > std::sqrt(a * a + 1.0) + a);
            }
        }
}

TEST_CASE("t = 0 gives the initial configuration") {
    for (int n : {1, 2}) {
        const ModelParams p{0.5, 0.0, step_configuration(n)};
        const auto sw = onepoint_sweep(p, -3, 4);
        for (int x = -3; x <= 4; ++x) {
            CHECK(std::abs(sw.geq.at(x).value - (x <= 1 ? 1.0 : 0.0)) < 1e-10);
            CHECK(std::abs(sw.at.at(x).value - (x == 1 ? 1.0 : 0.0)) < 1e-10);
        }
    }
}

TEST_CASE("one particle: squared Bessel function") {
    const ModelParams p{-0.4, 1.0, {0}};
    const auto sw = onepoint_sweep(p, -8, 8);
    for (int x = -8; x <= 8; ++x) {
        const double j = bessel_j(x, 2.0);
        CHECK(std::abs(sw.at.at(x).value - j * j) < 1e-12);
        CHECK(sw.at.at(x).abs_error < 1e-9);
    }
    CHECK(std::abs(prob_leftmost_brute(p, 3) - std::pow(bessel_j(3, 2.0), 2)) < 1e-12);
}

TEST_CASE("two particles against exact diagonalization") {
    const ModelParams p{0.5, 0.8, {1, 2}};
    const auto sw = onepoint_sweep(p, -5, 3);
    const auto run = oracle_evolve(p);
    const auto marg = marginal_table(run.basis, run.psi, 1);
    const auto brute = brute_force_table(p, -5, 3);
    for (int x = -5; x <= 3; ++x) {
        const double orc = marg.count(x) ? marg.at(x) : 0.0;
        CHECK(std::abs(sw.at.at(x).value - orc) < 1e-6);
        CHECK(std::abs(brute.at(x).value - orc) < 1e-6);
        CHECK(std::abs(sw.geq.at(x).value - oracle_geq(marg, x)) < 1e-6);
        // telescoping between the two integrals
        if (x < 3) CHECK(std::abs(sw.geq.at(x).value - sw.geq.at(x + 1).value - sw.at.at(x).value) < 2e-8);
        // monotone, and a probability
        if (x < 3) CHECK(sw.geq.at(x).value >= sw.geq.at(x + 1).value - 1e-8);
        CHECK(sw.geq.at(x).value <= 1.0 + 1e-8);
    }
    // far to the left the leftmost particle is almost surely to the right
    CHECK(std::abs(sw.geq.at(-5).value - 1.0) < 1e-6);
}

TEST_CASE("attractive regime, single point") {
    const ModelParams p{-0.8, 0.6, {1, 2}};
    const auto run = oracle_evolve(p);
    const auto marg = marginal_table(run.basis, run.psi, 1);
    CHECK(std::abs(prob_leftmost_geq(p, 1) - oracle_geq(marg, 1)) < 1e-6);
}

TEST_CASE("small anisotropy approaches the free-fermion determinant") {
    const ModelParams p{1e-6, 0.7, {0, 1}};
    const auto sw = onepoint_sweep(p, -3, 1);
    const ModelParams p0{0.0, 0.7, {0, 1}};
    for (int x = -3; x <= 1; ++x) CHECK(std::abs(sw.geq.at(x).value - fprob_delta0(p0, x)) < 1e-6);
}

TEST_CASE("free-fermion determinant against exact diagonalization") {
    const ModelParams p{0.0, 1.0, {0, 1, 3}};
    const auto run = oracle_evolve(p);
    const auto marg = marginal_table(run.basis, run.psi, 1);
    for (int x = -5; x <= 1; ++x) CHECK(std::abs(fprob_delta0(p, x) - oracle_geq(marg, x)) < 1e-10);
}
