#pragma once

#include <vector>

#include "xxz/model.hpp"

namespace xxz {

enum class OnePointMethod { theorem2, detRep, brute_force, oracle };
const char* method_name(OnePointMethod m);

struct DistributionEntry {
    int x = 0;
    double value = 0.0;
    double abs_error = 0.0;
};

// theorem2 tables hold F_N(x) = P(X_1 >= x); the other methods hold P(X_1 = x).
struct DistributionTable {
    ModelParams params;
    OnePointMethod method = OnePointMethod::theorem2;
    bool cumulative = false;
    std::vector<DistributionEntry> entries;

    const DistributionEntry& at(int x) const;
};

// Circle radii for the 2N-fold integral: ζ on C_r, ξ on C_R, R r < 1, all
// ξ-ξ poles inside C_R and ζ-ζ poles outside C_r.
struct OnePointRadii {
    double r = 0.0;
    double R = 0.0;
    double ratio = 0.0;  // worst pole-to-contour ratio
};
OnePointRadii onepoint_radii(double delta, int n, double t);

struct OnePointOptions {
    int m_start = 16;
    int m_max = 0;  // 0: chosen from N
    double rtol = 1e-10;
    double atol = 1e-12;
    int workers = 1;
};

// Both integrals on x_min..x_max from one quadrature sweep.
struct OnePointSweep {
    DistributionTable geq;  // theorem2
    DistributionTable at;   // detRep
    int m = 0;
    OnePointRadii radii;
};
OnePointSweep onepoint_sweep(const ModelParams& p, int x_min, int x_max, const OnePointOptions& opt = {});

double prob_leftmost_at(const ModelParams& p, int x, const OnePointOptions& opt = {});
double prob_leftmost_geq(const ModelParams& p, int x, const OnePointOptions& opt = {});

// Σ_{X, x_1 = x} |ψ_N(X;t)|^2 from the Bethe wavefunction.
DistributionTable brute_force_table(const ModelParams& p, int x_min, int x_max, int workers = 1);
double prob_leftmost_brute(const ModelParams& p, int x);

// First-particle marginal from exact diagonalization.
DistributionTable oracle_table(const ModelParams& p, int x_min, int x_max, int workers = 1);

// F_N(x) at Δ = 0 as det(i^{y_j-y_k} Σ_l J_{x-y_j+l}(2t) J_{x-y_k+l}(2t)).
double fprob_delta0(const ModelParams& p, int x);

}  // namespace xxz
