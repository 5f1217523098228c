#pragma once

#include <vector>

#include "xxz/numerics.hpp"

namespace xxz {

// Integer-order Bessel J by Miller's backward recurrence.
double bessel_j(int n, double x);
// J_n(x) for n = nmin..nmax (inclusive); nmin may be negative.
std::vector<double> bessel_j_range(int nmin, int nmax, double x);

// Modified Bessel I of integer order.
double bessel_i(int n, double x);
// e^{-x} I_n(x) for n = nmin..nmax; avoids overflow for large x.
std::vector<double> bessel_i_scaled_range(int nmin, int nmax, double x);

// sum_{n>=0} J_{nu+n}(t) J_{mu+n}(t)
double bessel_pair_sum(int nu, int mu, double t);

struct BesselSeries {
    int n_min = 0;
    int n_max = 0;
    double argument = 0.0;
    std::vector<double> values;
    double at(int n) const { return values.at(static_cast<std::size_t>(n - n_min)); }
};

BesselSeries bessel_series(int n_min, int n_max, double x);

// Airy function and derivative from the steepest-ray contour integral.
double airy_ai(double x);
double airy_ai_prime(double x);

// Airy kernel as a double contour integral over rays at +-pi/3 (xi) and
// +-2pi/3 (zeta). Nodes of the zeta contour mirror those of the xi contour,
// so the result is symmetric in (x, z).
double airy_kernel(double x, double z);

// (Ai(x)Ai'(z) - Ai'(x)Ai(z)) / (x - z), with the diagonal limit.
double airy_kernel_closed(double x, double z);

}  // namespace xxz
