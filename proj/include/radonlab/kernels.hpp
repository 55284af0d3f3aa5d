#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace radonlab {

// Smooth transition h: R -> [0,1] with h = 0 for t <= 0 and h = 1 for t >= 1,
// built from exp(-1/t). Pinned explicitly so decay fits reproduce bit-for-bit.
double smooth_step(double t);

// Radial plateau: theta = 1 on |x| <= 1, theta = 0 on |x| >= 2.
double theta_profile(double r);

// Dyadic bump psi(x) = theta(|x|) - theta(2|x|): supported in {1/2 <= |x| <= 2},
// values in [0,1], and sum_j psi(2^-j x) = 1 for x != 0.
double psi_radial(double r);
double psi(std::span<const double> x);

// A radial cutoff profile; the default is the smooth psi above, tests may pin
// sharp surrogates (e.g. the indicator of [1/2, 1]).
struct BumpProfile {
    std::function<double(double)> radial = [](double r) { return psi_radial(r); };
    bool smooth = true;
    double eval(std::span<const double> x) const;
};

BumpProfile smooth_bump();
BumpProfile flat_bump(double r_lo, double r_hi);  // indicator of r_lo <= |x| <= r_hi

// Calderon-Zygmund kernel on R^d \ {0} with evaluator, gradient and descriptor.
// `normalization` is the factor already applied to meet the unit size/gradient
// bound; it rides along in the descriptor for bookkeeping.
struct CZKernel {
    int dim = 1;
    std::function<double(std::span<const double>)> eval;
    std::function<std::vector<double>(std::span<const double>)> grad;
    std::string descriptor;
    double normalization = 1.0;
};

// K_j(y) = bump(2^-j y) K(y); zero outside 2^{j-1} <= |y| <= 2^{j+1}; y = 0 rejected.
double kj_eval(const CZKernel& kernel, const BumpProfile& bump, long long j,
               std::span<const double> y);

struct CZBoundsReport {
    double size_gradient_max = 0.0;              // max of |y|^d |K| + |y|^{d+1} |grad K|
    std::vector<double> size_gradient_argmax;
    double cancellation_max = 0.0;               // max over lambda of |int_{1<=|y|<=lambda} K|
    double cancellation_lambda = 1.0;
    double rescale_needed = 1.0;                 // 1/max(1, size_gradient_max)
};

// Samples |y| >= 1 (log-spaced radii, uniform directions) and quadratures the
// cancellation integral for a ladder of lambda.
CZBoundsReport verify_cz_bounds(const CZKernel& kernel, int sample_budget);

// Registry addressed by name: "one_over_y", "sign_y_over_abs_pow(p)",
// "riesz_component(i)" with optional dimension. Kernels that violate the unit
// normalization come back rescaled, factor recorded in the descriptor.
CZKernel make_kernel(const std::string& spec, int dim = 1);
std::vector<std::string> kernel_registry_names();

// Lattice points of the j-th dyadic annulus with their kernel values.
struct AnnulusTable {
    long long j = 0;
    std::vector<std::vector<long long>> points;  // y in Z^d, 2^{j-1} <= |y| <= 2^{j+1}
    std::vector<double> weights;                 // K_j(y), all nonzero
    double l1() const;
};

AnnulusTable build_annulus_table(const CZKernel& kernel, const BumpProfile& bump, long long j);

// Quadrature of int |K_j| over R^d (d <= 2) for the normalization band checks.
double integral_abs_kj(const CZKernel& kernel, const BumpProfile& bump, long long j,
                       int cells_per_axis = 4096);

}  // namespace radonlab
