#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace radonlab {

// Integer-coefficient polynomial mapping P: Z^d -> Z^n with P(0) = 0.
// Terms are kept sorted lexicographically by multiindex so witness reports
// and serialization are deterministic.
class PolynomialMap {
public:
    struct Term {
        std::vector<int> alpha;        // multiindex in N_0^d, not all zero
        std::vector<long long> coeff;  // c_alpha in Z^n
    };

    PolynomialMap(int dim_domain, int dim_range, std::vector<Term> terms);

    int dim_domain() const { return d_; }
    int dim_range() const { return n_; }
    const std::vector<Term>& terms() const { return terms_; }

    // componentwise degrees D_i = deg P_i (every component must be nonzero)
    const std::vector<int>& degrees() const { return degrees_; }
    int degree() const { return degree_; }              // D = max_i D_i
    int sharp_degree() const { return sharp_degree_; }  // D_* = max coordinate of any multiindex

    // N_P = (1 + deg P) * (D_1 + ... + D_n), the exponent bookkeeping constant
    long long region_exponent() const;

    // {"d":..., "n":..., "coeffs":[{"alpha":[...],"c":[...]},...]}, exact integers only
    std::string to_json() const;
    static PolynomialMap from_json(const std::string& text);

private:
    int d_;
    int n_;
    std::vector<Term> terms_;
    std::vector<int> degrees_;
    int degree_;
    int sharp_degree_;
};

// Exact integer evaluation; throws std::overflow_error instead of wrapping.
std::vector<long long> evaluate(const PolynomialMap& map, std::span<const long long> point);

// Real-argument evaluation (used by coercivity probes and quadrature).
std::vector<double> evaluate_real(const PolynomialMap& map, std::span<const double> point);

struct ConditionCReport {
    bool satisfied = false;
    // one lexicographically minimal witness multiindex per component when satisfied;
    // empty entry marks the failing component otherwise
    std::vector<std::optional<std::vector<int>>> witnesses;
};

// Condition (C): each component has a top-degree term whose coefficient is the
// i-th standard unit vector. Total decision over the finite coefficient table.
ConditionCReport check_condition_c(const PolynomialMap& map);

struct CoercivityProbeResult {
    bool counterexample_found = false;
    std::vector<double> counterexample;  // the first offending grid point, scan order lexicographic
    long long points_checked = 0;
};

// Falsification probe for Condition (L): scans the real grid of the given step
// inside the annulus l0 <= |t| <= radius for a point with |P(t)| < |t|^beta.
// Finding none is NOT a proof of the condition; it is reported as such.
CoercivityProbeResult probe_condition_l(const PolynomialMap& map, double beta, double l0,
                                        double radius, double grid_step);

// Anisotropic gauge rho(x) = max_i |x_i|^{1/D_i}.
double rho(std::span<const int> degrees, std::span<const long long> x);

// Anisotropic box in Z^n: the i-th side covers an integer interval whose
// cardinality is ~ ell^{D_i}. Intervals are stored explicitly so that even
// cardinalities are representable; centered construction makes them as
// symmetric as possible (extra point goes right).
class PCube {
public:
    PCube(std::vector<int> degrees, std::vector<long long> lo, std::vector<long long> hi,
          double sidelength);

    // smallest realization around `center`: side cardinality round(ell^{D_i}), clamped to >= 1
    static PCube centered(std::vector<int> degrees, std::vector<long long> center, double sidelength);

    int dim() const { return static_cast<int>(lo_.size()); }
    const std::vector<int>& degrees() const { return degrees_; }
    const std::vector<long long>& lo() const { return lo_; }
    const std::vector<long long>& hi() const { return hi_; }
    double sidelength() const { return sidelength_; }

    std::vector<long long> center() const;        // floor midpoint per axis
    std::vector<long long> half_extents() const;  // max deviation from center per axis

    long long side_cardinality(int axis) const { return hi_[axis] - lo_[axis] + 1; }
    long long volume() const;
    bool contains(std::span<const long long> x) const;

    // visit all lattice points (row-major)
    template <typename F>
    void for_each_point(F&& f) const {
        std::vector<long long> x(lo_.begin(), lo_.end());
        for (;;) {
            f(std::span<const long long>(x));
            int axis = dim() - 1;
            while (axis >= 0) {
                if (++x[axis] <= hi_[axis]) break;
                x[axis] = lo_[axis];
                --axis;
            }
            if (axis < 0) return;
        }
    }

private:
    std::vector<int> degrees_;
    std::vector<long long> lo_;
    std::vector<long long> hi_;
    double sidelength_;
};

// 2^nu Q, defined inductively as nu successive doublings: same center, sidelength
// doubled, sides grown to the smallest cardinalities with |I_i|^{1/D_i} >= 2*ell.
PCube dilate(const PCube& cube, int nu);

}  // namespace radonlab
