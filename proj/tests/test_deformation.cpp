#include <doctest.h>

#include "xxz/bethe.hpp"
#include "xxz/deformation.hpp"
#include "xxz/freefermion.hpp"
#include "xxz/onepoint.hpp"

using namespace xxz;

namespace {

cplx winding(const PiecewiseContour& c, cplx a, int m = 2048) {
    const auto g = discretize_contour(c, m);
    cplx s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) s += g.weights[k] / (g.nodes[k] - a);
    return s;
}

std::vector<int> one_based(const std::vector<int>& s) {
    std::vector<int> o(s);
    for (auto& v : o) ++v;
    return o;
}

}  // namespace

// ===========================================================================
// spectral functions
// ===========================================================================

TEST_CASE("spectral derivatives match finite differences") {
    const double h = 1e-5;
    for (auto kind : {SpectralKind::G, SpectralKind::H})
        for (cplx z : {cplx(0.7, 1.2), cplx(-1.1, -0.4), cplx(2.0, 0.3)}) {
            const double x = -1.3, t = 0.8;
            const cplx d1 = (spectral(kind, z + h, x, t) - spectral(kind, z - h, x, t)) / (2 * h);
            const cplx d2 = (spectral_d1(kind, z + h, x, t) - spectral_d1(kind, z - h, x, t)) / (2 * h);
            CHECK(std::abs(d1 - spectral_d1(kind, z, x, t)) < 1e-8);
            CHECK(std::abs(d2 - spectral_d2(kind, z, x, t)) < 1e-8);
        }
}

TEST_CASE("critical points are roots of the first derivative") {
    for (double x : {-3.0, -1.0, 0.5, 4.0}) {
        const auto c = critical_points(x, 1.0);
        for (int k = 0; k < 2; ++k) {
            CHECK(std::abs(spectral_d1(SpectralKind::G, c.xi[k], x, 1.0)) < 1e-12);
            CHECK(std::abs(spectral_d1(SpectralKind::H, c.zeta[k], x, 1.0)) < 1e-12);
        }
    }
}

TEST_CASE("x = -2t merges the critical points at i and -i") {
    const double t = 3.0, x = -2 * t;
    const auto c = critical_points(x, t);
    CHECK(std::abs(c.xi[0] - kI) < 1e-12);
    CHECK(std::abs(c.xi[1] - kI) < 1e-12);
    CHECK(std::abs(c.zeta[0] + kI) < 1e-12);
    CHECK(std::abs(spectral_d1(SpectralKind::G, kI, x, t)) < 1e-12);
    CHECK(std::abs(spectral_d2(SpectralKind::G, kI, x, t)) < 1e-12);
    // cubic behaviour it δ³/3
    const cplx d = 1e-3 * std::polar(1.0, 0.4);
    const cplx ratio = (spectral(SpectralKind::G, kI + d, x, t) - spectral(SpectralKind::G, kI, x, t)) / (kI * t * d * d * d / 3.0);
    CHECK(std::abs(ratio - 1.0) < 0.01);
}

TEST_CASE("spectral rejects the origin and the cut") {
    CHECK_THROWS_AS(spectral(SpectralKind::G, 0.0, 1.0, 1.0), PoleError);
    CHECK_THROWS_AS(spectral(SpectralKind::H, cplx(-1.0, 0.0), 1.0, 1.0), InputError);
}

// ===========================================================================
// contours
// ===========================================================================

TEST_CASE("steep contours are closed and pass through i and -i") {
    for (double r : {3.0, 6.3}) {
        const auto p = steep_contour(SteepKind::plus, r);
        const auto m = steep_contour(SteepKind::minus, r);
        CHECK(p.closure_gap() < 1e-12);
        CHECK(m.closure_gap() < 1e-12);
        CHECK(std::abs(p.segments[2].end() - kI) < 1e-15);
        CHECK(std::abs(m.segments[2].start() + kI) < 1e-15);
        CHECK(std::abs(winding(p, 0.0) - 1.0) < 1e-10);
        CHECK(std::abs(winding(m, 0.0) - 1.0) < 1e-10);
        CHECK(std::abs(winding(p, cplx(0.0, -1.0))) > 0.9);
        CHECK(std::abs(winding(p, cplx(0.0, 2.0))) < 1e-10);
        CHECK(std::abs(winding(m, cplx(0.0, -2.0))) < 1e-10);
    }
    CHECK_THROWS_AS(steep_contour(SteepKind::plus, 1.5), InputError);
}

TEST_CASE("gamma hat keeps i inside and i + 2 delta outside") {
    for (double d : {1.0, -0.7}) {
        const double R = theorem4_radii(d).R;
        const auto c = gamma_hat(std::sqrt(R * R - 1.0), d);
        CHECK(c.closure_gap() < 1e-12);
        CHECK(std::abs(winding(c, kI) - 1.0) < 1e-9);
        CHECK(std::abs(winding(c, kI + 2.0 * d)) < 1e-9);
        CHECK(std::abs(winding(c, 0.0) - 1.0) < 1e-9);
        CHECK(std::abs(winding(c, (2.0 * d + kI) / (1.0 + 4.0 * d * d)) - 1.0) < 1e-9);
    }
    const auto bare = gamma_hat(2.0, 0.0);
    CHECK(bare.segments.size() == 4);
    CHECK_THROWS_AS(gamma_hat(1.0, 2.0), InputError);
    CHECK_THROWS_AS(gamma_hat(5.0, 0.05), InputError);
}

TEST_CASE("series radii") {
    const auto r = theorem4_radii(1.0);
    CHECK(r.A == doctest::Approx(6.0));
    CHECK(r.R > r.A);
    CHECK(r.Rp > 4.0 * r.A);
    CHECK(theorem4_radii(0.25).A == doctest::Approx(8.0));
    CHECK_THROWS_AS(theorem4_radii(0.0), InputError);
}

// ===========================================================================
// steep descent bound
// ===========================================================================

TEST_CASE("Re G - G(i) is nonpositive on the steep contour") {
    for (double t : {5.0, 20.0, 1e2, 1e4}) {
        const auto r = lemma61_bound_check(t, 0.3);
        CHECK(r.samples == 403);
        CHECK(r.nonpositive);
        CHECK(r.bound_holds);
        CHECK(std::abs(r.argmax - kI) < 1e-12);
    }
    const auto big = lemma61_bound_check(1e4, 0.3);
    CHECK(big.c_empirical > 0.25);
    CHECK(big.c_empirical < 0.4);
    CHECK_THROWS_AS(lemma61_bound_check(10.0, 0.4), InputError);
}

// ===========================================================================
// τ-maps
// ===========================================================================

TEST_CASE("admissible map counts") {
    for (int N = 1; N <= 4; ++N) {
        std::size_t total = 0;
        for (int n = 0; n <= N; ++n) {
            const auto maps = enumerate_tau(N, n);
            double expect = 1.0;
            for (int k = n + 1; k <= N; ++k) expect *= k;  // N!/n!
            for (int k = 1; k <= n; ++k) expect *= static_cast<double>(N - k + 1) / k;
            CHECK(maps.size() == static_cast<std::size_t>(expect));
            for (const auto& t : maps) CHECK(t.zeros() == n);
            total += maps.size();
        }
        std::size_t brute = 0;
        const auto all = all_maps(N);
        for (const auto& t : all) brute += t.admissible();
        CHECK(total == brute);
        CHECK(all.size() == static_cast<std::size_t>(std::pow(N + 1, N)));
    }
}

TEST_CASE("index sets of a map") {
    const auto s = tau_sets(TauMap{{3, 0, 1, 0}});
    CHECK(s.K1 == std::vector<int>{2, 4});
    CHECK(s.K2 == std::vector<int>{1, 3});
    CHECK(s.J2 == std::vector<int>{3, 1});
    CHECK(s.J1 == std::vector<int>{2, 4});
    CHECK_THROWS_AS(tau_sets(TauMap{{1, 1}}), InputError);
}

TEST_CASE("the two sign rules differ by the parity of the residue images") {
    for (const auto& t : enumerate_tau(3, 0)) {
        const auto s = tau_sets(t);
        int inv = 0;
        for (std::size_t a = 0; a < s.J2.size(); ++a)
            for (std::size_t b = a + 1; b < s.J2.size(); ++b) inv += s.J2[a] > s.J2[b];
        CHECK(dn_sign(t, DnSign::derived) * dn_sign(t, DnSign::printed) == (inv % 2 ? -1 : 1));
    }
}

TEST_CASE("all-zero map: f = 1 and the determinant of d") {
    const ModelParams p{0.7, 0.3, {0, 2, 3}};
    const std::vector<cplx> xi{cplx(2.1, 0.3), cplx(-1.4, 1.9), cplx(0.2, -2.6)};
    const std::vector<cplx> zeta{cplx(0.9, 7.0), cplx(-6.5, 1.0), cplx(3.3, -5.1)};
    const TauMap zero{{0, 0, 0}};
    CHECK(std::abs(f_factor(xi, zeta, zero, p) - 1.0) < 1e-15);
    CMatrix d(3, 3);
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            d(j, k) = 1.0 / ((1.0 - xi[j] * zeta[k]) * (xi[j] + zeta[k] - 2.0 * p.delta * xi[j] * zeta[k]));
    const cplx D = det_complex(d);
    CHECK(std::abs(DN_tau(xi, zeta, zero, p.delta) - D) < 1e-14 * std::abs(D));
    CHECK(std::abs(DN_tau(xi, zeta, zero, p.delta, DnSign::printed) - D) < 1e-14 * std::abs(D));
}

// ===========================================================================
// series over τ-maps
// ===========================================================================

TEST_CASE("one particle series equals the one-point function") {
    for (double d : {0.5, -1.5}) {
        const ModelParams p{d, 0.5, {0}};
        const auto r = theorem4_sweep(p, -3, 2);
        for (std::size_t k = 0; k < r.x.size(); ++k) {
            // |Δ| = 1.5 puts R' near 34, so the roundoff floor dominates at the right end
            const double dev = std::abs(r.value[k] - prob_leftmost_geq(p, r.x[k]));
            CHECK(dev < 1e-6);
            CHECK(dev <= r.abs_error[k] + 1e-13);
        }
    }
}

TEST_CASE("t = 0 series is the step function") {
    const ModelParams p{1.0, 0.0, {1, 2}};
    const auto r = theorem4_sweep(p, -1, 3);
    for (std::size_t k = 0; k < r.x.size(); ++k) CHECK(std::abs(r.value[k] - (r.x[k] <= 1 ? 1.0 : 0.0)) < 1e-9);
}

TEST_CASE("one residue: reduced term against the small circle") {
    const ModelParams p{1.0, 0.4, {1, 2}};
    for (const auto& t : {TauMap{{1, 0}}, TauMap{{0, 2}}}) {
        const cplx a = theorem4_term(p, 0, t, 64);
        const cplx b = theorem4_term_direct(p, 0, t, 32, 64, 48);
        CHECK(std::abs(a - b) < 1e-8);
    }
}

TEST_CASE("coincident nodes expose the sign of the reduced term") {
    // Without staggering the diagonal ξ1 = ξ2 is left out of the direct
    // term. For τ = (2,1) the reduced integrand there is ξ^{-2} times the
    // sign, so the direct value is minus the sign over m.
    const ModelParams p{1.0, 0.4, {1, 2}};
    const TauMap t{{2, 1}};
    const int m = 32;
    const cplx direct = theorem4_term_direct(p, 0, t, m, 64, 48, false);
    CHECK(std::abs(theorem4_term(p, 0, t, 64)) < 1e-12);
    CHECK(std::abs(direct + dn_sign(t, DnSign::derived) / static_cast<double>(m)) < 1e-6);
    CHECK(std::abs(direct + dn_sign(t, DnSign::printed) / static_cast<double>(m)) > 1e-2);
}

TEST_CASE("terms of non-admissible maps vanish") {
    const auto r = lemma72_check(ModelParams{1.0, 0.4, {1, 2}}, 0);
    CHECK(r.maps.size() == 2);
    CHECK(r.max_abs < 1e-9);
}

TEST_CASE("circles and steep contours give the same one-particle terms") {
    const auto r = lemma75_check(ModelParams{1.0, 0.5, {0}}, -1);
    CHECK(r.diff < 1e-7);
    CHECK(r.steep_change < 1e-9);
    CHECK(std::abs(r.hat_one - 1.0) < 1e-12);
}

// ===========================================================================
// large-t ingredients
// ===========================================================================

TEST_CASE("nu counts and B factor for the identity") {
    const std::vector<int> id{1, 2, 3};
    for (int j = 1; j <= 3; ++j) CHECK(nu_counts(id, {}, j).nu == 0);
    const std::vector<cplx> xi{cplx(0.3, 1.1), cplx(-0.5, 0.8), cplx(1.4, 0.2)};
    CHECK(std::abs(b_factor(xi, id, {}, 0.8) - 1.0) < 1e-15);
    const std::vector<int> sw{2, 1, 3};
    const auto n1 = nu_counts(sw, {}, 1), n2 = nu_counts(sw, {}, 2);
    CHECK(n1.nu2 == 1);
    CHECK(n1.nu == 0);
    CHECK(n2.nu1 == 1);
    CHECK(n2.nu == 0);
    CHECK(nu_counts(sw, {3}, 1).nu == 0);
    CHECK_THROWS_AS(nu_counts(sw, {1}, 1), InputError);
    // S removes the only inversion
    CHECK(std::abs(b_factor(xi, sw, {2}, 0.8) - 1.0) < 1e-15);
}

TEST_CASE("u limit") {
    for (double d : {1.0, -0.7}) {
        CHECK(std::abs(u_limit(2.0 * d + kI, d)) < 1e-15);
        // large-t limit of the single ratio at ξ_k = i(1 + ξ̃ ε)
        const cplx a(1.7, 0.4);
        const double eps = 1e-7;
        const cplx b = kI * (1.0 + cplx(0.3, -0.2) * eps);
        const cplx ratio = (1.0 + a * b - 2.0 * d * b) / (1.0 + a * b - 2.0 * d * a);
        CHECK(std::abs(ratio - u_limit(a, d)) < 1e-6);
    }
}

TEST_CASE("signed sum of F over permutations is one") {
    for (double d : {1.0, -0.7})
        for (const ParticleConfig& y : {ParticleConfig{0}, ParticleConfig{0, 1}, ParticleConfig{-2, 3}}) {
            const auto f = f_empty_sum(d, y);
            CHECK(std::abs(f.value - 1.0) < 1e-8);
        }
}

TEST_CASE("F with empty integrand is one") {
    CHECK(std::abs(F_of({1, 2, 3}, {1, 2, 3}, 1.0, {0, 1, 2}).value - 1.0) < 1e-15);
}

TEST_CASE("delta = 0 makes F an indicator") {
    const ParticleConfig y{1, 2, 3};
    for (const auto& pt : permutations(3)) {
        const auto sigma = one_based(pt.sigma);
        for (int mask = 0; mask < 8; ++mask) {
            std::vector<int> S;
            bool fixed = true;
            for (int j = 1; j <= 3; ++j) {
                if (mask & (1 << (j - 1)))
                    S.push_back(j);
                else if (sigma[j - 1] != j)
                    fixed = false;
            }
            CHECK(std::abs(F_of(sigma, S, 0.0, y).value - (fixed ? 1.0 : 0.0)) < 1e-9);
        }
    }
}

TEST_CASE("delta = 0 partial sum is the finite Airy determinant") {
    for (double t : {2.0, 50.0})
        for (double s : {-1.0, 0.5}) {
            const ModelParams p{0.0, t, {1, 2, 3}};
            const auto ps = conjecture_partial_sum(p, s);
            CHECK(std::abs(ps.value - conjecture_delta0_determinant(t, p.y, s)) < 1e-9);
            CHECK(std::abs(ps.imag) < 1e-9);
        }
}

TEST_CASE("N = 30 Airy determinant near the GUE distribution") {
    ParticleConfig y;
    for (int j = 1; j <= 30; ++j) y.push_back(j);
    CHECK(std::abs(conjecture_delta0_determinant(1e4, y, 0.0) - f2_estimate(0.0)) < 5e-2);
}

TEST_CASE("leading-order errors decay like t^(-1/3)") {
    const auto r = appendixB_rate_check(TauMap{{2, 0, 0}}, 1.0, {0, 1, 3});
    CHECK(r.pass);
    const double expect = std::cbrt(100.0);
    CHECK(r.f_ratio_ends > expect / 2);
    CHECK(r.f_ratio_ends < expect * 2);
    CHECK(r.d_ratio_ends > expect / 2);
    CHECK(r.d_ratio_ends < expect * 2);
    CHECK(appendixB_rate_check(TauMap{{0, 1}}, -0.7, {0, 2}).pass);
}
