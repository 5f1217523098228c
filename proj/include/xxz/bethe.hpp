#pragma once

#include <utility>
#include <vector>

#include "xxz/ed.hpp"
#include "xxz/model.hpp"

namespace xxz {

// ε(ξ) = ξ + 1/ξ - 2Δ
cplx dispersion(cplx xi, double delta);

// S(ξβ, ξα) = -(1 + ξαξβ - 2Δξβ) / (1 + ξαξβ - 2Δξα)
cplx s_matrix(cplx xb, cplx xa, double delta);

struct PermutationTerm {
    std::vector<int> sigma;                      // 0-based images
    std::vector<std::pair<int, int>> inversions;  // (j, k) with j < k and sigma[j] > sigma[k]
    int sign = 1;
};

// All permutations of {0..n-1} in lexicographic order.
std::vector<PermutationTerm> permutations(int n);

// Product of S(ξ_{σ(j)}, ξ_{σ(k)}) over the inversions of σ.
cplx a_coeff(const PermutationTerm& p, const std::vector<cplx>& xi, double delta);

enum class ContourKind { small, large };

// Radii that keep every S-matrix pole outside (small) or inside (large).
double small_radius(double delta, int n);
double large_radius(double delta, int n);

struct WaveOptions {
    int m_start = 32;
    int m_max = 0;  // 0: chosen from N
    double rtol = 1e-10;
    double atol = 1e-12;
    int workers = 1;
};

// ψ_N on the box lo[i] <= x_i <= hi[i]. Entries with non-increasing x are
// computed too but carry no meaning.
struct WaveTable {
    std::vector<int> lo, hi;
    std::vector<cplx> values;
    std::vector<double> errors;
    int m = 0;

    std::size_t offset(const ParticleConfig& x) const;
    cplx at(const ParticleConfig& x) const { return values[offset(x)]; }
    double error_at(const ParticleConfig& x) const { return errors[offset(x)]; }
};

// One quadrature level with m nodes per variable.
WaveTable wavefunction_table_fixed(const ModelParams& p, const std::vector<int>& lo, const std::vector<int>& hi,
                                   ContourKind kind, int m, int workers = 1);

// Doubles m until the table converges.
WaveTable wavefunction_table(const ModelParams& p, const std::vector<int>& lo, const std::vector<int>& hi,
                             ContourKind kind, const WaveOptions& opt = {});

// Every configuration of the window, aligned with the ED basis.
StateVector wavefunction_on_basis(const ModelParams& p, const SectorBasis& basis, ContourKind kind,
                                  const WaveOptions& opt = {}, double* max_error = nullptr);

QuadResult wavefunction(const ModelParams& p, const ParticleConfig& x, ContourKind kind, const WaveOptions& opt = {});

// e^{2iΔt} (-i)^{x-y} J_{x-y}(2t)
cplx psi1_closed(double delta, double t, int x, int y);

// Two-particle amplitude straight from the two-term integrand, on a circle
// of radius r with m nodes per variable.
cplx psi2_explicit(double delta, double t, int x1, int x2, int y1, int y2, double r, int m);

}  // namespace xxz
