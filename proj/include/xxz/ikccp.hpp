#pragma once

#include <vector>

#include "xxz/numerics.hpp"

namespace xxz {

// d(x, y) = 1 / ((1 - xy)(x + y - 2Δxy))
cplx d_weight(cplx x, cplx y, double delta);

// det(d(ξ_i, ζ_j))
cplx ik_determinant(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta);

struct IdentityCheckReport {
    int n = 0;
    double delta = 0.0;
    std::vector<cplx> xi, zeta;
    cplx lhs{}, rhs{};
    double relative_error = 0.0;
};

// Geometric factor of the double sum: Π_{i>=2} (ξ_{σ(i)}ζ_{μ(i)})^{i-1} over
// Π_{i>=2} (1 - Π_{j>=i} ξ_{σ(j)}ζ_{μ(j)}).
cplx geometric_factor(const std::vector<int>& sigma, const std::vector<int>& mu, const std::vector<cplx>& xi,
                      const std::vector<cplx>& zeta);

// Σ_{σ,μ} A_σ(ξ) A_μ(ζ) · geometric factor
cplx ccp_lhs(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta);
// (1 - Πξζ) Π(ξ_i + ζ_j - 2Δξ_iζ_j) D_N / Π_{i<j}(1 + ξ_iξ_j - 2Δξ_i)(1 + ζ_iζ_j - 2Δζ_i)
cplx ccp_rhs(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta);
IdentityCheckReport ccp_check(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta);

// Π_{j<k} (v_k - v_j)
cplx vandermonde(const std::vector<cplx>& v);

// Q_N = Π(ξ+ζ-2Δξζ) D_N Π(1-ξζ) / (Δ_N(ξ)Δ_N(ζ))
cplx q_poly_value(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta);
// the expanded nine-term Q_2
cplx q2_explicit(cplx xi1, cplx xi2, cplx zeta1, cplx zeta2, double delta);

// U(ξ, ξ') = (1 + ξξ' - 2Δξ) / (ξ' - ξ)
cplx u_factor(cplx xi, cplx xip, double delta);

// Σ_{σ,μ} Π_{i<j} U(ξ_{σ(i)},ξ_{σ(j)}) U(ζ_{μ(i)},ζ_{μ(j)}) · geometric factor
cplx idenU_lhs(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta);
// (1 - Πξζ) Q_N / Π(1 - ξ_jζ_k)
cplx idenU_rhs(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta);
IdentityCheckReport idenU_check(const std::vector<cplx>& xi, const std::vector<cplx>& zeta, double delta);

}  // namespace xxz
