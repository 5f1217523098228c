#pragma once

#include <string>
#include <vector>

#include "xxz/numerics.hpp"

namespace xxz {

// Strictly increasing lattice sites x_1 < ... < x_N.
using ParticleConfig = std::vector<int>;

inline bool is_strictly_increasing(const ParticleConfig& x) {
    for (std::size_t i = 1; i < x.size(); ++i)
        if (x[i] <= x[i - 1]) return false;
    return true;
}

struct ModelParams {
    double delta = 0.0;
    double t = 0.0;
    ParticleConfig y;  // initial configuration; N = y.size()

    int n() const { return static_cast<int>(y.size()); }
    void validate() const {
        if (y.empty()) throw InputError("ModelParams: need at least one particle");
        if (!is_strictly_increasing(y)) throw InputError("ModelParams: initial sites must be strictly increasing");
        if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("ModelParams: t must be finite and >= 0");
        if (!std::isfinite(delta)) throw InputError("ModelParams: delta must be finite");
    }
};

// y_j = j, j = 1..n
inline ParticleConfig step_configuration(int n) {
    ParticleConfig y(n);
    for (int j = 0; j < n; ++j) y[j] = j + 1;
    return y;
}

// Padding that keeps the Bessel tail of the one-particle propagator below
// double precision.
inline int light_cone_padding(double t) {
    return static_cast<int>(std::ceil(2.0 * t + 10.0 * std::cbrt(t) + 20.0));
}

}  // namespace xxz
