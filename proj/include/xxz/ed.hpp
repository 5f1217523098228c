#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Sparse>

#include "xxz/model.hpp"

namespace xxz {

struct LatticeWindow {
    int left = 0;
    int right = 0;  // inclusive
    int size() const { return right - left + 1; }
};

// All N-particle configurations inside a window, in lexicographic order.
class SectorBasis {
public:
    SectorBasis(LatticeWindow w, int n);

    const LatticeWindow& window() const { return window_; }
    int particles() const { return n_; }
    std::size_t size() const { return states_.size() / static_cast<std::size_t>(n_); }

    // sites of state i
    const int* state(std::size_t i) const { return states_.data() + i * static_cast<std::size_t>(n_); }
    ParticleConfig config(std::size_t i) const { return {state(i), state(i) + n_}; }

    // index of a configuration, or -1 when it is not in the window
    std::int64_t index_of(const int* sites) const;
    std::int64_t index_of(const ParticleConfig& x) const;

private:
    LatticeWindow window_;
    int n_;
    std::vector<int> states_;
    std::vector<std::vector<std::uint64_t>> binom_;
};

struct SparseHamiltonian {
    std::size_t dim = 0;
    std::vector<Eigen::Triplet<double>> entries;
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
};

// Open-boundary sector Hamiltonian. Hops have amplitude 1; each bond joining
// an occupied and an empty site contributes -delta to the diagonal, with the
// sites outside the window counted as empty.
SparseHamiltonian build_hamiltonian(const SectorBasis& basis, double delta);

using StateVector = Eigen::VectorXcd;

// e^{-itH} psi0 by Chebyshev expansion.
StateVector evolve(const SparseHamiltonian& h, const StateVector& psi0, double t, int workers = 1);

// Probability that the m-th particle (1-based) sits at x.
double marginal_mth_particle(const SectorBasis& basis, const StateVector& psi, int m, int x);
// The whole marginal of the m-th particle, keyed by site.
std::map<int, double> marginal_table(const SectorBasis& basis, const StateVector& psi, int m);

struct OracleRun {
    SectorBasis basis;
    StateVector psi;
};

// Evolves the configuration Y in a window padded by `padding` sites on each
// side (light_cone_padding(t) when negative).
OracleRun oracle_evolve(const ModelParams& p, int padding = -1, int workers = 1);

}  // namespace xxz
