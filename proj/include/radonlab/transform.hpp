#pragma once

#include <functional>
#include <vector>

#include "radonlab/kernels.hpp"
#include "radonlab/lattice_fn.hpp"
#include "radonlab/poly_map.hpp"

namespace radonlab {

// T_P truncated to the dyadic scales [j_min, j_max]. Annulus tables are
// enumerated once at construction; applying with a range equals the sum of
// single-scale applications exactly. For finitely supported data the
// truncation is exact once 2^{j-1} exceeds every |y| the supports can reach.
class TruncatedTransform {
public:
    TruncatedTransform(PolynomialMap map, CZKernel kernel, BumpProfile bump, long long j_min,
                       long long j_max);

    const PolynomialMap& map() const { return map_; }
    const CZKernel& kernel() const { return kernel_; }
    long long j_min() const { return j_min_; }
    long long j_max() const { return j_max_; }
    const std::vector<AnnulusTable>& tables() const { return tables_; }

    // P(y) for every annulus point, aligned with tables()[s].points
    const std::vector<std::vector<std::vector<long long>>>& images() const { return images_; }
    const std::vector<long long>& image_min() const { return image_min_; }
    const std::vector<long long>& image_max() const { return image_max_; }

private:
    PolynomialMap map_;
    CZKernel kernel_;
    BumpProfile bump_;
    long long j_min_;
    long long j_max_;
    std::vector<AnnulusTable> tables_;
    std::vector<std::vector<std::vector<long long>>> images_;
    std::vector<long long> image_min_, image_max_;
};

enum class ApplyPath { direct, frequency };

// (Tf)(x) = sum_j sum_y f(x + P(y)) K_j(y). The two paths are independent
// computations that must agree to ~1e-9 relative; `frequency` goes through
// sampled multipliers and the grid FFT bridge.
LatticeFunction apply(const TruncatedTransform& transform, const LatticeFunction& f,
                      ApplyPath path = ApplyPath::direct);

// M_P f(x): sup over P-cubes containing x, restricted to the given dyadic
// sidelengths, of the windowed l^1 average.
LatticeFunction maximal(const PolynomialMap& map, const LatticeFunction& f,
                        const std::vector<double>& sidelengths);

// l^1-normalized single-scale average along P at scale j (the discrete model
// for the L^p-improving region probes).
LatticeFunction single_scale_average_kernel(const PolynomialMap& map, const BumpProfile& bump,
                                            long long j);

// Convolution g = k * f over finite supports.
LatticeFunction convolve(const LatticeFunction& kernel, const LatticeFunction& f);

struct OperatorNormEstimate {
    double lower_bound = 0.0;
    bool converged = false;
    int restarts_used = 0;
    LatticeFunction best_f;
    LatticeFunction best_g;
};

using ApplyFn = std::function<LatticeFunction(const LatticeFunction&)>;

// Alternating-ascent estimate of ||T||_{l^r -> l^{s'}} over functions supported
// in `domain`; g lives in the conjugate space of s'. Always a LOWER bound (any
// feasible pair certifies one); non-convergence within the budget is flagged.
OperatorNormEstimate estimate_operator_norm(const ApplyFn& apply_op, const ApplyFn& apply_adjoint,
                                            const Box& domain, const Box& range, double r,
                                            double s_prime, int restarts, int iterations,
                                            std::uint64_t seed);

// apply/adjoint pair for a convolution kernel (adjoint = reflected conjugate kernel)
std::pair<ApplyFn, ApplyFn> convolution_operator(const LatticeFunction& kernel);

// apply/adjoint pair for a truncated transform
std::pair<ApplyFn, ApplyFn> transform_operator(const TruncatedTransform& transform);

}  // namespace radonlab
