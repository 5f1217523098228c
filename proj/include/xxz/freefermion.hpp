#pragma once

#include <Eigen/Dense>
#include <vector>

#include "xxz/model.hpp"
#include "xxz/numerics.hpp"

namespace xxz {

// Finite section of a discrete or discretized operator. Row j of `entries`
// stands for the index offset + j.
struct KernelMatrix {
    int offset = 0;
    int size = 0;
    Eigen::MatrixXd entries;
    double tail_bound = 0.0;
};

// ⌈2t + 10 t^{1/3} + 20⌉
int bessel_truncation_size(double t);

// L(j,k) = Σ_{n>=0} J_{j-x+2+n}(2t) J_{k-x+2+n}(2t) on ℓ²({1-x, 2-x, ...}),
// j,k = 0..size-1. size <= 0 picks the truncation from t and x. The tail
// bound is the trace of the omitted block.
KernelMatrix discrete_bessel_kernel(int x, double t, int size = 0);

// det(I - K) of the finite section; throws if the tail is not negligible.
double fredholm_det(const KernelMatrix& k);

// det(I - L) with a doubled truncation as check.
struct FredholmResult {
    double value = 0.0;
    double change = 0.0;  // |det at size - det at 2 size|
    int size = 0;
};
FredholmResult bessel_fredholm(int x, double t);

// e^{-t²} det(I_{j-k}(2t))_{j,k=0..-x}; empty determinant for x = 1.
double toeplitz_rhs(int x, double t);

// det K_N with K_N(j,k) = ∮∮ φ_j(ξ)ψ_k(ζ)/(1-ξζ) on |ξ| = |ζ| = r at Δ = 0.
struct KdetOptions {
    double radius = 0.9;
    int m_start = 32;
    int m_max = 2048;
    double tol = 1e-13;
};
struct KdetResult {
    double value = 0.0;
    double abs_error = 0.0;
    int m = 0;
};
KdetResult kdet(const ModelParams& p, int x, const KdetOptions& opt = {});
// Step initial condition y_j = j, j = 1..n.
KdetResult kdet(double t, int x, int n, const KdetOptions& opt = {});

// The same matrix from Bessel sums, for comparison.
Eigen::MatrixXcd kn_matrix_bessel(const ModelParams& p, int x);

// Airy-kernel Fredholm determinant on (s, ∞) with `nodes` Gauss-Legendre
// nodes after the map x = s + c u/(1-u).
double f2_nystrom(double s, int nodes);
// 40 nodes, checked against 80; throws ConvergenceError past 1e-8.
double f2_estimate(double s);

// Number of permutations of k with longest increasing subsequence <= n.
// Hook-length sum of (f^λ)² over partitions with λ_1 <= n.
double lis_count(int k, int n);
// Histogram h[l] = #{σ ∈ S_k : LIS(σ) = l} by enumerating all permutations.
std::vector<long long> lis_histogram_bruteforce(int k);

// P(L(t) <= n) = e^{-t²} Σ_k t^{2k}/(k!)² #{σ ∈ S_k : LIS <= n}.
double poissonized_lis_cdf(int n, double t);
// Same with brute-force counts for k <= k_max; the remainder is bounded by
// e^{-t²} Σ_{k>k_max} t^{2k}/k! and returned in *tail.
double poissonized_lis_cdf_bruteforce(int n, double t, int k_max = 10, double* tail = nullptr);

}  // namespace xxz
