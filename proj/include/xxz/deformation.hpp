#pragma once

#include <array>
#include <vector>

#include "xxz/model.hpp"
#include "xxz/numerics.hpp"

namespace xxz {

// ===========================================================================
// Spectral functions
// ===========================================================================

enum class SpectralKind { G, H };

// G(ξ) = x log ξ - it(ξ + 1/ξ),  H(ζ) = -x log ζ - it(ζ + 1/ζ); principal
// log. Throws PoleError at z = 0 and InputError within 1e-14 of the cut.
cplx spectral(SpectralKind kind, cplx z, double x, double t);
// First and second z-derivatives.
cplx spectral_d1(SpectralKind kind, cplx z, double x, double t);
cplx spectral_d2(SpectralKind kind, cplx z, double x, double t);

struct SpectralPoint {
    SpectralKind kind = SpectralKind::G;
    double x = 0.0, t = 0.0;
    cplx z{};
    cplx value{};
};
SpectralPoint spectral_point(SpectralKind kind, cplx z, double x, double t);

// Roots of G' (xi) and H' (zeta): (±x ± √(x²-4t²))/(2it).
struct CriticalPoints {
    std::array<cplx, 2> xi;
    std::array<cplx, 2> zeta;
};
CriticalPoints critical_points(double x, double t);

// ===========================================================================
// Contours
// ===========================================================================

enum class SteepKind { plus, minus };

// Γ+: the rays i + s e^{iπ/6}, i + s e^{i5π/6} (0 <= s <= 1), the level
// Im = 3/2 out to |z| = R_outer and the arc of radius R_outer below it.
// Γ- is the mirror image through the real axis. Both positively oriented;
// the rays are graded toward ±i.
PiecewiseContour steep_contour(SteepKind kind, double r_outer, int ray_panels = 0);

// Rectangle |Re| <= L, bottom_im <= Im <= 1 with an outward half-circle of
// radius eps1 at i and an inward one of radius eps2 at i + 2Δ; Δ = 0 gives
// the bare rectangle.
PiecewiseContour gamma_hat(double L, double delta, double eps1 = 0.2, double eps2 = 0.02, double bottom_im = -1.0);

// Radii of the series expansion: A = max(2/|Δ|, 2(1+2|Δ|)), R = 1.05 A,
// R' = 4.2 A.
struct Theorem4Radii {
    double A = 0.0, R = 0.0, Rp = 0.0;
};
Theorem4Radii theorem4_radii(double delta);

// ===========================================================================
// Steep descent bound
// ===========================================================================

struct Lemma61Report {
    double t = 0.0, alpha = 0.0;
    int samples = 0;
    double max_re = 0.0;          // max Re{G - G(i)} over all samples
    cplx argmax{};
    double boundary_re = 0.0;     // max Re{G - G(i)} over samples outside B(i, t^{-α})
    double c_empirical = 0.0;     // min over those samples of -Re{G - G(i)} / t^{1-3α}
    bool nonpositive = false;     // max_re <= 1e-12
    bool bound_holds = false;     // c_empirical > 0
};
// Samples Γ+ (radius r_outer) at x = -2t: `samples` points evenly in arc
// length plus ξ = i and the two ball boundary points on the rays.
Lemma61Report lemma61_bound_check(double t, double alpha, double r_outer = 6.3, int samples = 400);

// ===========================================================================
// τ-maps
// ===========================================================================

struct TauMap {
    std::vector<int> images;  // images[k-1] = τ(k) ∈ {0..N}
    int n() const { return static_cast<int>(images.size()); }
    int zeros() const;
    // |τ^{-1}(k)| <= 1 for every k >= 1
    bool admissible() const;
};

// K1 = τ^{-1}(0), K2 = {k_1 < ... < k_M}, J2 = (τ(k_1), ..., τ(k_M)) in that
// order, J1 the complement of J2; all 1-based and ascending except J2.
struct TauSets {
    std::vector<int> K1, K2, J1, J2;
};
TauSets tau_sets(const TauMap& tau);

// All admissible τ with |τ^{-1}(0)| = n; there are C(N,n) N!/n! of them.
std::vector<TauMap> enumerate_tau(int N, int n);
// Every map {1..N} -> {0..N}, admissible or not.
std::vector<TauMap> all_maps(int N);

// Sign in front of det(d)_{J1 x K1}. `printed` is (-1)^{Σ τ_ℓ - k_ℓ};
// `derived` adds the parity of the sequence τ_1..τ_M, which is what the
// successive residues produce.
enum class DnSign { derived, printed };
int dn_sign(const TauMap& tau, DnSign rule);

// ξ and ζ are indexed 1..N through xi[j-1], zeta[k-1]; entries outside the
// sets in use are ignored.
cplx DN_tau(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, const TauMap& tau, double delta,
            DnSign rule = DnSign::derived);
cplx IN_tau(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, const TauMap& tau, const ModelParams& p, int x,
            DnSign rule = DnSign::derived);
cplx f_factor(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, const TauMap& tau, const ModelParams& p);

// ===========================================================================
// Series over τ-maps
// ===========================================================================

struct Theorem4Options {
    DnSign sign = DnSign::derived;
    int m_start = 16;
    int m_max = 0;          // 0: 256 for N = 1, 64 for N = 2
    double tol = 1e-9;      // target error
    double fail_tol = 1e-6; // error estimate at the node cap that is still accepted
    int workers = 1;
};

struct Theorem4Term {
    TauMap tau;
    std::vector<cplx> values;  // one per x
};

struct Theorem4Result {
    std::vector<int> x;
    std::vector<double> value;
    std::vector<double> abs_error;
    std::vector<Theorem4Term> terms;
    Theorem4Radii radii;
    int m = 0;
};

// Σ_n Σ_{τ ∈ T_n} ∮_{C_R}^N ∮_{C_R'}^{|K1|} I_N(τ) f(τ) for x_min..x_max.
// N <= 2 and Δ != 0. Throws ConvergenceError if the estimate at the node
// cap exceeds fail_tol.
Theorem4Result theorem4_sweep(const ModelParams& p, int x_min, int x_max, const Theorem4Options& opt = {});
double theorem4_sum(const ModelParams& p, int x, const Theorem4Options& opt = {});

// One reduced term on m-point trapezoid rules (no refinement).
cplx theorem4_term(const ModelParams& p, int x, const TauMap& tau, int m, DnSign sign = DnSign::derived);

// The same term before the residues: the 2N-fold integrand of the
// all-zero map, ξ on C_R, ζ_k on C_R' when τ(k) = 0 and on a negatively
// oriented circle around 1/ξ_{τ(k)} otherwise. The circle radius is
// min(1/(2R), distance to the other 1/ξ_j over 3). Any τ, admissible or not.
// With `stagger` the ξ_j grids are rotated against each other; without it
// the coincident nodes ξ_j = ξ_l are left out, which shifts each term by its
// diagonal and makes the sign of the term visible.
cplx theorem4_term_direct(const ModelParams& p, int x, const TauMap& tau, int m_xi, int m_small, int m_big,
                          bool stagger = true);

// Terms of non-admissible maps, which the series drops.
struct Lemma72Report {
    std::vector<TauMap> maps;
    std::vector<cplx> values;
    double max_abs = 0.0;
};
Lemma72Report lemma72_check(const ModelParams& p, int x, int m_xi = 32, int m_small = 64, int m_big = 48);

// N = 1: the two τ-terms on (C_R, C_R') against (Γ+, Γ-) and Γ̂.
struct Lemma75Report {
    cplx circles_zero{}, steep_zero{};  // τ(1) = 0
    cplx circles_one{}, hat_one{};      // τ(1) = 1
    double diff = 0.0;                  // max of the two differences
    double steep_change = 0.0;          // change under panel doubling
};
Lemma75Report lemma75_check(const ModelParams& p, int x);

// ===========================================================================
// Ingredients of the large-t partial sum
// ===========================================================================

// σ as 1-based images sigma[j-1] = σ(j); S ascending, 1-based.
cplx b_factor(const std::vector<cplx>& xi, const std::vector<int>& sigma, const std::vector<int>& S, double delta);

struct NuCounts {
    int nu1 = 0, nu2 = 0, nu = 0;
};
NuCounts nu_counts(const std::vector<int>& sigma, const std::vector<int>& S, int j);

// (ξ - (2Δ + i)) / ((2iΔ + 1) ξ - i)
cplx u_limit(cplx xi, double delta);

struct FOptions {
    double eps1 = 0.2, eps2 = 0.02;
    double bottom_im = -1.5;  // lower edge of the quadrature rectangle
    double h0 = 0.2;          // smallest piece next to the bump junctions
    double tol = 1e-10;
    int max_sub = 4;          // panels per piece at the last refinement
};
struct FResult {
    cplx value{};
    double abs_error = 0.0;
    int nodes = 0;
};
// F(σ,S) = i^{|S^c|} ∮_{Γ̂} B Π_{j∈S^c} u(ξ_{σ(j)})^{ν(j)} (iξ_{σ(j)})^{y_j - y_{σ(j)} - 1}
// over the variables ξ_{σ(j)}, j ∈ S^c. |S^c| <= 3.
FResult F_of(const std::vector<int>& sigma, const std::vector<int>& S, double delta, const ParticleConfig& y,
             const FOptions& opt = {});

// Σ_σ (-1)^σ F(σ, ∅)
FResult f_empty_sum(double delta, const ParticleConfig& y, const FOptions& opt = {});

// Σ_σ (-1)^σ Σ_S (-1)^{|S|} t^{-|S|/3} F(σ,S) Π_{k∈S} K_Ai(s + v_{σ(k)}, s + v_k)
// with v_j = (y_j + 1)/t^{1/3}. N <= 3.
struct PartialSum {
    double value = 0.0;
    double imag = 0.0;
    double abs_error = 0.0;
};
PartialSum conjecture_partial_sum(const ModelParams& p, double s, const FOptions& opt = {});

// det(δ_jk - t^{-1/3} K_Ai(s + v_j, s + v_k)), the Δ = 0 value of the sum.
double conjecture_delta0_determinant(double t, const ParticleConfig& y, double s);

// ===========================================================================
// Leading-order rates
// ===========================================================================

struct AppendixBReport {
    std::vector<double> t;
    std::vector<double> f_error;  // |f - leading term| at the scaled points
    std::vector<double> d_error;  // |t^{-1/3} d(ξ,ζ) - 1/((ζ̃-ξ̃)(-2Δ))|
    double f_ratio_ends = 0.0;    // f_error(first) / f_error(last)
    double d_ratio_ends = 0.0;
    bool pass = false;
};
// ξ_j = i + iξ̃_j t^{-1/3} (j ∈ J1), ζ_k = -i + iζ̃_k t^{-1/3} (k ∈ K1);
// J2 variables fixed off the scaling. Checks that consecutive error ratios
// are 10^{1/3} and the end-to-end ratio 10^{2/3}, each within a factor 2.
AppendixBReport appendixB_rate_check(const TauMap& tau, double delta, const ParticleConfig& y,
                                     const std::vector<double>& ts = {1e2, 1e3, 1e4});

}  // namespace xxz
