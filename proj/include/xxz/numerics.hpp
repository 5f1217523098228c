#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace xxz {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// ---- errors ---------------------------------------------------------------

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct PoleError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, cplx prev, cplx last)
        : std::runtime_error(what), previous(prev), latest(last) {}
    cplx previous;
    cplx latest;
};

inline void require_finite(cplx z, const char* where) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::domain_error(std::string("non-finite value in ") + where);
}

// ---- compensated summation ------------------------------------------------

// Neumaier variant of Kahan summation.
template <typename Real = double>
struct Neumaier {
    Real sum = 0;
    Real comp = 0;

    void add(Real x) {
        Real t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    Real value() const { return sum + comp; }
};

struct ComplexNeumaier {
    Neumaier<double> re, im;
    void add(cplx z) {
        re.add(z.real());
        im.add(z.imag());
    }
    cplx value() const { return {re.value(), im.value()}; }
};

// Fixed-order pairwise reduction of partial sums, each level compensated.
cplx pairwise_sum(const std::vector<cplx>& parts);

// ---- deterministic parallel loop -----------------------------------------

// Calls body(i) for i in [0, n) on up to `workers` threads. Work items write
// their own slots, so the caller's reduction order is unaffected.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

// ---- contours -------------------------------------------------------------

enum class Orientation { positive = 1, negative = -1 };

inline double sign_of(Orientation o) { return o == Orientation::positive ? 1.0 : -1.0; }

struct ContourCircle {
    cplx center{0.0, 0.0};
    double radius = 1.0;
    Orientation orientation = Orientation::positive;
    double phase = 0.0;  // angular offset of the first node, in units of the node spacing
};

// Panels are refined geometrically toward an endpoint when `grade` is set;
// used where the integrand has a corner singularity.
enum class Grading { none, toward_start, toward_end };

struct Segment {
    enum class Kind { line, arc } kind = Kind::line;
    cplx a{}, b{};            // line endpoints
    cplx center{};            // arc
    double radius = 0.0;
    double theta0 = 0.0, theta1 = 0.0;
    Grading grade = Grading::none;
    int min_panels = 0;       // lower bound on the panel count

    static Segment line(cplx from, cplx to, Grading g = Grading::none);
    static Segment arc(cplx c, double r, double from, double to, Grading g = Grading::none);

    cplx point(double s) const;  // s in [0,1]
    cplx tangent(double s) const;
    cplx start() const { return point(0.0); }
    cplx end() const { return point(1.0); }
    double length() const;
};

struct PiecewiseContour {
    std::vector<Segment> segments;
    Orientation orientation = Orientation::positive;

    // Largest gap between consecutive endpoints (including the closing one).
    double closure_gap() const;
    double length() const;
};

using ContourSpec = std::variant<ContourCircle, PiecewiseContour>;

struct QuadGrid {
    std::vector<cplx> nodes;
    std::vector<cplx> weights;  // include dz/(2 pi i) and the orientation sign
    int refinement_level = 0;
    std::size_t size() const { return nodes.size(); }
};

QuadGrid discretize_contour(const ContourCircle& c, int m);
// For piecewise contours m is the target node count; each segment receives a
// share proportional to its length, rounded up to whole 16-point panels.
QuadGrid discretize_contour(const PiecewiseContour& c, int m);
QuadGrid discretize_contour(const ContourSpec& c, int m);

// Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// ---- multidimensional quadrature -----------------------------------------

using Integrand = std::function<cplx(const cplx*)>;

struct QuadOptions {
    int m_start = 16;
    int m_max = 512;
    double rtol = 1e-10;
    double atol = 1e-12;
    int workers = 1;
};

struct QuadResult {
    cplx value{};
    double error = 0.0;  // |I(M) - I(2M)|
    int m = 0;           // node count of the returned level
};

// Tensor-product sum over the grids with compensated fixed-order reduction.
cplx quadrature_sum(const Integrand& f, const std::vector<QuadGrid>& grids, int workers = 1);

// Refines every dimension by doubling until |I(M) - I(2M)| <= atol + rtol |I(2M)|.
QuadResult integrate_nd(const Integrand& f, const std::vector<ContourSpec>& contours,
                        const QuadOptions& opt = {});

// ---- determinants ---------------------------------------------------------

// Partial-pivot LU determinant. A column without a nonzero pivot gives exactly 0.
template <typename Derived>
typename Derived::Scalar det_lu(const Eigen::MatrixBase<Derived>& a_in) {
    using Scalar = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (a_in.rows() != a_in.cols()) throw InputError("det_lu: matrix is not square");
    const Eigen::Index n = a_in.rows();
    if (n == 0) return Scalar(1);
    Mat a = a_in;
    Scalar det(1);
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index p = k;
        double best = std::abs(a(k, k));
        for (Eigen::Index i = k + 1; i < n; ++i) {
            double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best == 0.0) return Scalar(0);
        if (p != k) {
            a.row(p).swap(a.row(k));
            det = -det;
        }
        const Scalar piv = a(k, k);
        det *= piv;
        for (Eigen::Index i = k + 1; i < n; ++i) {
            const Scalar f = a(i, k) / piv;
            if (f == Scalar(0)) continue;
            a.block(i, k + 1, 1, n - k - 1) -= f * a.block(k, k + 1, 1, n - k - 1);
        }
    }
    return det;
}

cplx det_complex(const CMatrix& a);

// ---- small helpers ----------------------------------------------------------

// z^n for integer n by repeated squaring.
inline cplx ipow(cplx z, long n) {
    if (n < 0) return 1.0 / ipow(z, -n);
    cplx r(1.0, 0.0);
    while (n) {
        if (n & 1) r *= z;
        z *= z;
        n >>= 1;
    }
    return r;
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace xxz
