#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "xxz/ed.hpp"
#include "xxz/special.hpp"

using namespace xxz;

namespace {

// dense e^{-itH} psi0 through a full eigendecomposition
StateVector dense_evolve(const SparseHamiltonian& h, const StateVector& psi0, double t) {
    Eigen::MatrixXd m = Eigen::MatrixXd(h.matrix);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::MatrixXcd v = es.eigenvectors().cast<cplx>();
    Eigen::VectorXcd ph(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) ph[i] = std::exp(cplx(0.0, -t * es.eigenvalues()[i]));
    return v * ph.asDiagonal() * v.adjoint() * psi0;
}

}  // namespace

TEST_CASE("basis ranking round-trips") {
    SectorBasis b({-2, 5}, 3);
    CHECK(b.size() == 56);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.index_of(b.config(i)) == static_cast<std::int64_t>(i));
    CHECK(b.index_of(ParticleConfig{-3, 0, 1}) == -1);
    CHECK(b.index_of(ParticleConfig{0, 0, 1}) == -1);
    CHECK_THROWS_AS(SectorBasis({0, 1}, 3), InputError);
}

TEST_CASE("single particle in three sites") {
    SectorBasis b({0, 2}, 1);
    const auto h = build_hamiltonian(b, 0.5);
    Eigen::MatrixXd m = Eigen::MatrixXd(h.matrix);
    Eigen::Matrix3d expect;
    expect << -1, 1, 0, 1, -1, 1, 0, 1, -1;
    CHECK((m - expect).norm() == 0.0);

    const auto h0 = build_hamiltonian(SectorBasis({0, 4}, 2), 0.0);
    Eigen::MatrixXd a = Eigen::MatrixXd(h0.matrix);
    CHECK(a.diagonal().norm() == 0.0);
    CHECK((a - a.transpose()).norm() == 0.0);
}

TEST_CASE("adjacent pair has fewer broken bonds") {
    SectorBasis b({0, 5}, 2);
    const auto h = build_hamiltonian(b, 1.0);
    Eigen::MatrixXd m = Eigen::MatrixXd(h.matrix);
    CHECK(m(b.index_of(ParticleConfig{2, 3}), b.index_of(ParticleConfig{2, 3})) == -2.0);
    CHECK(m(b.index_of(ParticleConfig{1, 4}), b.index_of(ParticleConfig{1, 4})) == -4.0);
}

TEST_CASE("evolution at t=0 is the identity") {
    const auto run = oracle_evolve({0.3, 0.0, {0, 2}});
    CHECK(std::abs(run.psi[run.basis.index_of(ParticleConfig{0, 2})] - 1.0) == 0.0);
    CHECK(std::abs(run.psi.norm() - 1.0) == 0.0);
}

TEST_CASE("one particle matches the Bessel propagator") {
    for (double delta : {-1.0, 0.0, 0.7})
        for (double t : {0.5, 1.0, 2.5}) {
            const auto run = oracle_evolve({delta, t, {3}});
            for (int x = -9; x <= 15; ++x) {
                const cplx ref = std::exp(cplx(0.0, 2 * delta * t)) * ipow(cplx(0.0, -1.0), x - 3) * bessel_j(x - 3, 2 * t);
                CHECK(std::abs(run.psi[run.basis.index_of(ParticleConfig{x})] - ref) < 1e-12);
            }
        }
}

TEST_CASE("Chebyshev agrees with dense diagonalization") {
    SectorBasis b({0, 9}, 3);
    const auto h = build_hamiltonian(b, -0.8);
    StateVector psi0 = StateVector::Zero(b.size());
    psi0[b.index_of(ParticleConfig{3, 4, 6})] = 1.0;
    const auto a = evolve(h, psi0, 1.3);
    const auto c = dense_evolve(h, psi0, 1.3);
    CHECK((a - c).norm() < 1e-11);
    CHECK(std::abs(a.norm() - 1.0) < 1e-12);
}

TEST_CASE("norm, marginals and window independence") {
    ModelParams p{0.5, 1.0, {1, 2, 3}};
    const auto run = oracle_evolve(p);
    CHECK(std::abs(run.psi.norm() - 1.0) < 1e-12);
    for (int m = 1; m <= 3; ++m) {
        Neumaier<double> s;
        for (const auto& [x, v] : marginal_table(run.basis, run.psi, m)) s.add(v);
        CHECK(std::abs(s.value() - 1.0) < 1e-12);
    }
    const auto wide = oracle_evolve(p, light_cone_padding(1.0) + 8);
    for (int x = -3; x <= 2; ++x)
        CHECK(std::abs(marginal_mth_particle(run.basis, run.psi, 1, x) - marginal_mth_particle(wide.basis, wide.psi, 1, x)) <
              1e-12);
    CHECK(marginal_mth_particle(run.basis, run.psi, 1, 0) ==
          doctest::Approx(marginal_table(run.basis, run.psi, 1).at(0)).epsilon(1e-14));
}

TEST_CASE("reflection symmetry of the two-particle marginals") {
    // Y = (0, 1) is symmetric about 1/2
    const auto run = oracle_evolve({-0.4, 0.9, {0, 1}});
    for (int x = -4; x <= 4; ++x)
        CHECK(std::abs(marginal_mth_particle(run.basis, run.psi, 1, x) - marginal_mth_particle(run.basis, run.psi, 2, 1 - x)) <
              1e-12);
}
