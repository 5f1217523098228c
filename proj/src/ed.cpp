#include "xxz/ed.hpp"

#include <algorithm>

#include "xxz/special.hpp"

namespace xxz {

SectorBasis::SectorBasis(LatticeWindow w, int n) : window_(w), n_(n) {
    if (n < 1) throw InputError("SectorBasis: need at least one particle");
    if (w.right <= w.left || w.size() < n) throw InputError("SectorBasis: window too small for the particle number");
    const int sites = w.size();
    binom_.assign(static_cast<std::size_t>(sites) + 1, std::vector<std::uint64_t>(static_cast<std::size_t>(n) + 1, 0));
    for (int a = 0; a <= sites; ++a) {
        binom_[a][0] = 1;
        for (int b = 1; b <= std::min(a, n); ++b) binom_[a][b] = binom_[a - 1][b - 1] + (b <= a - 1 ? binom_[a - 1][b] : 0);
    }
    const std::uint64_t dim = binom_[sites][n];
    if (dim > 50'000'000ULL) throw InputError("SectorBasis: sector dimension too large");
    states_.reserve(dim * static_cast<std::uint64_t>(n));

    std::vector<int> c(n);
    for (int i = 0; i < n; ++i) c[i] = i;
    for (;;) {
        for (int i = 0; i < n; ++i) states_.push_back(c[i] + w.left);
        int i = n - 1;
        while (i >= 0 && c[i] == sites - n + i) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < n; ++j) c[j] = c[j - 1] + 1;
    }
}

std::int64_t SectorBasis::index_of(const int* sites) const {
    const int m = window_.size();
    std::uint64_t rank = 0;
    int prev = -1;
    for (int i = 0; i < n_; ++i) {
        const int p = sites[i] - window_.left;
        if (p < 0 || p >= m || p <= prev) return -1;
        for (int v = prev + 1; v < p; ++v) rank += binom_[m - 1 - v][n_ - 1 - i];
        prev = p;
    }
    return static_cast<std::int64_t>(rank);
}

std::int64_t SectorBasis::index_of(const ParticleConfig& x) const {
    if (static_cast<int>(x.size()) != n_) return -1;
    return index_of(x.data());
}

SparseHamiltonian build_hamiltonian(const SectorBasis& basis, double delta) {
    const int n = basis.particles();
    const int left = basis.window().left, right = basis.window().right;
    SparseHamiltonian h;
    h.dim = basis.size();
    h.entries.reserve(h.dim * (2 * n + 1));
    std::vector<int> moved(n);
    for (std::size_t i = 0; i < h.dim; ++i) {
        const int* s = basis.state(i);
        int mismatched = 0;
        for (int k = 0; k < n; ++k) {
            const bool left_occupied = k > 0 && s[k - 1] == s[k] - 1;
            const bool right_occupied = k + 1 < n && s[k + 1] == s[k] + 1;
            mismatched += !left_occupied;
            mismatched += !right_occupied;
        }
        if (mismatched && delta != 0.0) h.entries.emplace_back(static_cast<int>(i), static_cast<int>(i), -delta * mismatched);
        for (int k = 0; k < n; ++k) {
            for (int step : {-1, 1}) {
                const int target = s[k] + step;
                if (target < left || target > right) continue;
                if (k > 0 && s[k - 1] == target) continue;
                if (k + 1 < n && s[k + 1] == target) continue;
                std::copy(s, s + n, moved.begin());
                moved[k] = target;
                const auto j = basis.index_of(moved.data());
                h.entries.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
            }
        }
    }
    h.matrix.resize(static_cast<Eigen::Index>(h.dim), static_cast<Eigen::Index>(h.dim));
    h.matrix.setFromTriplets(h.entries.begin(), h.entries.end());
    return h;
}

namespace {

void apply(const SparseHamiltonian& h, const StateVector& in, StateVector& out, double scale, double shift, int workers) {
    const auto& m = h.matrix;
    const std::size_t rows = h.dim;
    const std::size_t block = 4096;
    const std::size_t nblocks = (rows + block - 1) / block;
    parallel_for(nblocks, workers, [&](std::size_t b) {
        const std::size_t r1 = std::min(rows, (b + 1) * block);
        for (std::size_t r = b * block; r < r1; ++r) {
            cplx acc = -shift * in[static_cast<Eigen::Index>(r)];
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, static_cast<Eigen::Index>(r)); it; ++it)
                acc += it.value() * in[it.col()];
            out[static_cast<Eigen::Index>(r)] = scale * acc;
        }
    });
}

}  // namespace

StateVector evolve(const SparseHamiltonian& h, const StateVector& psi0, double t, int workers) {
    if (static_cast<std::size_t>(psi0.size()) != h.dim) throw InputError("evolve: state dimension mismatch");
    if (t == 0.0) return psi0;

    // Gershgorin bounds
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (Eigen::Index r = 0; r < h.matrix.rows(); ++r) {
        double diag = 0.0, off = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(h.matrix, r); it; ++it)
            if (it.col() == r)
                diag += it.value();
            else
                off += std::abs(it.value());
        if (first) {
            lo = diag - off;
            hi = diag + off;
            first = false;
        } else {
            lo = std::min(lo, diag - off);
            hi = std::max(hi, diag + off);
        }
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::runtime_error("evolve: spectral bound estimation failed");
    const double half = std::max(0.5 * (hi - lo), 1e-12);
    const double mid = 0.5 * (hi + lo);
    const double tau = t * half;

    int kmax = static_cast<int>(tau + 40.0 + 10.0 * std::cbrt(tau));
    auto jk = bessel_j_range(0, kmax, tau);

    // T_0 = psi0, T_1 = Hs psi0 with Hs = (H - mid)/half
    StateVector t_prev = psi0;
    StateVector t_cur(psi0.size());
    apply(h, t_prev, t_cur, 1.0 / half, mid, workers);
    StateVector acc = jk[0] * psi0 + 2.0 * cplx(0.0, -1.0) * jk[1] * t_cur;
    StateVector t_next(psi0.size());
    cplx phase(0.0, -1.0);
    for (int k = 2;; ++k) {
        if (k > kmax) {
            kmax *= 2;
            jk = bessel_j_range(0, kmax, tau);
        }
        phase *= cplx(0.0, -1.0);
        const double ck = 2.0 * jk[static_cast<std::size_t>(k)];
        if (std::abs(ck) < 1e-16 && k > tau) break;
        apply(h, t_cur, t_next, 2.0 / half, mid, workers);
        t_next -= t_prev;
        acc += (phase * ck) * t_next;
        std::swap(t_prev, t_cur);
        std::swap(t_cur, t_next);
    }
    return std::exp(cplx(0.0, -t * mid)) * acc;
}

double marginal_mth_particle(const SectorBasis& basis, const StateVector& psi, int m, int x) {
    if (m < 1 || m > basis.particles()) throw InputError("marginal_mth_particle: m out of range");
    Neumaier<double> acc;
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (basis.state(i)[m - 1] == x) acc.add(std::norm(psi[static_cast<Eigen::Index>(i)]));
    return acc.value();
}

std::map<int, double> marginal_table(const SectorBasis& basis, const StateVector& psi, int m) {
    if (m < 1 || m > basis.particles()) throw InputError("marginal_table: m out of range");
    std::map<int, Neumaier<double>> acc;
    for (std::size_t i = 0; i < basis.size(); ++i) acc[basis.state(i)[m - 1]].add(std::norm(psi[static_cast<Eigen::Index>(i)]));
    std::map<int, double> out;
    for (const auto& [x, v] : acc) out[x] = v.value();
    return out;
}

OracleRun oracle_evolve(const ModelParams& p, int padding, int workers) {
    p.validate();
    const int pad = padding < 0 ? light_cone_padding(p.t) : padding;
    SectorBasis basis({p.y.front() - pad, p.y.back() + pad}, p.n());
    const auto h = build_hamiltonian(basis, p.delta);
    StateVector psi0 = StateVector::Zero(static_cast<Eigen::Index>(basis.size()));
    psi0[basis.index_of(p.y)] = 1.0;
    StateVector psi = evolve(h, psi0, p.t, workers);
    return {std::move(basis), std::move(psi)};
}

}  // namespace xxz
