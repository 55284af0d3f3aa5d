#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "radonlab/kernels.hpp"
#include "radonlab/lattice_fn.hpp"
#include "radonlab/poly_map.hpp"
#include "radonlab/rational.hpp"

namespace radonlab {

// a/q in [0,1)^n with gcd(a_1, ..., a_n, q) = 1.
struct ReducedFraction {
    long long q = 1;
    std::vector<long long> a;

    ReducedFraction() = default;
    ReducedFraction(long long q_, std::vector<long long> a_);

    static ReducedFraction zero(int n) { return ReducedFraction(1, std::vector<long long>(n, 0)); }
    int dim() const { return static_cast<int>(a.size()); }
    long long shell_index() const;  // k with 2^{k-1} <= q < 2^k
    std::vector<double> value() const;
};

enum class ArcRegime { paper, exploratory };

// delta governs arc widths, delta_prime the admitted denominators. The paper
// window (delta < 1/100, delta' < delta/10) keeps hypotheses honest but pushes
// all shell activity far beyond desk scale, so an exploratory mode with the
// relaxed constraint 0 < delta' < delta < 1 is provided; every output records
// which regime produced it.
struct ArcParameters {
    double delta = 0.009;
    double delta_prime = 0.0008;
    ArcRegime regime = ArcRegime::paper;

    ArcParameters() = default;
    ArcParameters(double d, double dp, ArcRegime r);
    double epsilon() const { return delta - delta_prime; }
    const char* regime_name() const { return regime == ArcRegime::paper ? "paper" : "exploratory"; }
};

// S(a/q) = q^{-d} sum_{r in [q]^d} e(P(r) . a/q), phases reduced mod q in
// integer arithmetic before exponentiation.
cplx weyl_sum(const PolynomialMap& map, const ReducedFraction& frac);

// Multiplicative route: splits q into coprime prime-power factors and takes the
// product of the factor sums. Agrees with direct summation; used as its oracle.
cplx weyl_sum_via_crt(const PolynomialMap& map, const ReducedFraction& frac);

// All reduced a/q with 2^{k-1} <= q < min(2^k, q_cap+1), q ascending then a
// lexicographic. Streaming to keep large shells out of memory.
void enumerate_shell(int n, long long k, long long q_cap,
                     const std::function<void(const ReducedFraction&)>& sink);
std::vector<ReducedFraction> shell_fractions(int n, long long k, long long q_cap);

struct WeylDecayFit {
    struct Row {
        long long q;
        double max_modulus;
    };
    std::vector<Row> rows;
    double ls_slope = 0.0;  // least squares of log2(max|S|) vs log2 q, zero rows excluded
};

// Per-q extremal Weyl modulus and its fitted decay exponent. Requires
// Condition (C) (the decay bound's hypothesis).
WeylDecayFit weyl_decay_fit(const PolynomialMap& map, long long q_max);

struct OscillatoryValue {
    cplx value{0.0, 0.0};
    double error_estimate = 0.0;
    long long evaluations = 0;
};

// Phi_j(eta) = int e(P(t) . eta) K_j(t) dt. Uniform panels sized so the phase
// advances < 0.1 rad per panel, Gauss-Legendre nodes inside, then a doubling
// pass verifies the 1e-8 absolute target. Throws when the panel budget cannot
// honor the phase rule, naming the required budget.
OscillatoryValue phi(const PolynomialMap& map, const CZKernel& kernel, const BumpProfile& bump,
                     long long j, std::span<const double> eta, double tol = 1e-8);

// Phi_j along the uniform ladder eta0 + t*deta, t = 0..count-1 (d = 1 only).
// Shares one quadrature grid across the ladder and advances phases by exact
// per-node rotations; verified against a doubled grid.
std::vector<cplx> phi_ladder(const PolynomialMap& map, const CZKernel& kernel,
                             const BumpProfile& bump, long long j, std::span<const double> eta0,
                             std::span<const double> deta, long long count, double tol = 1e-8);

// m_j as an exact trigonometric polynomial sampled alias-free: coefficients
// K_j(y) at integer frequencies P(y). grid_n must exceed twice the largest
// frequency magnitude per axis.
SampledMultiplier multiplier_mj(const PolynomialMap& map, const CZKernel& kernel,
                                const BumpProfile& bump, long long j, long long grid_n);

// smallest power-of-two grid that samples m_j alias-free
long long alias_free_grid(const PolynomialMap& map, const CZKernel& kernel,
                          const BumpProfile& bump, long long j);

// direct summation of m_j at one point, phases split into an exact mod-q part
// and a small real remainder when xi = a/q + eta
cplx mj_point(const PolynomialMap& map, const CZKernel& kernel, const BumpProfile& bump,
              long long j, std::span<const double> xi);

// componentwise |xi_i - a_i/q| <= 2^{-(D_i-1)j} 2^{-delta j}, distances mod 1
bool major_arc_contains(const PolynomialMap& map, const ArcParameters& params, long long j,
                        const ReducedFraction& frac, std::span<const double> xi);

double major_arc_halfwidth(const PolynomialMap& map, const ArcParameters& params, long long j,
                           int axis);

struct MainTermVariant {
    enum class Kind { single_shell, full_scale, shell_tail } kind = Kind::full_scale;
    long long k = 1;      // single_shell / shell_tail
    long long j_max = 0;  // shell_tail truncation
    static MainTermVariant Ljk(long long k);
    static MainTermVariant Lj();
    static MainTermVariant Lk_tail(long long k, long long j_max);
};

// L_{j,k}, L_j = sum_{1<=k<=j delta'} L_{j,k}, or the truncated L^{(k)} tail,
// evaluated on the uniform grid. Verifies that at most one shell-k fraction is
// active at any node (disjoint chi_k supports) and throws on violation.
SampledMultiplier main_term(const PolynomialMap& map, const CZKernel& kernel,
                            const BumpProfile& bump, const ArcParameters& params, long long j,
                            const MainTermVariant& variant, long long grid_n);

struct ErrorTermResult {
    SampledMultiplier error;       // E_j = m_j - L_j on the grid
    SampledMultiplier multiplier;  // the m_j samples used (direct route when L_j != 0)
    double sup_norm = 0.0;
    bool l_term_empty = true;      // j delta' < 1: L_j is an empty sum and E_j = m_j
};

// Grid resolution must resolve the narrowest major arc (step <= 2^{-(D-1)j -
// delta j}/4) whenever L_j has content; with an empty k-range there is nothing
// to resolve and any grid is accepted.
ErrorTermResult error_term(const PolynomialMap& map, const CZKernel& kernel,
                           const BumpProfile& bump, const ArcParameters& params, long long j,
                           long long grid_n);

struct ApproximationErrorReport {
    double max_deviation = 0.0;
    std::vector<double> deviations;
    bool q_within_paper_window = true;  // q <= 2^{delta' j}
};

// Lemma-style major-arc approximation error: max over the supplied offsets eta
// (with xi = a/q + eta required to stay inside M_j(a/q)) of
// |m_j(a/q + eta) - S(a/q) Phi_j(eta)|.
ApproximationErrorReport approximation_error(const PolynomialMap& map, const CZKernel& kernel,
                                             const BumpProfile& bump, const ArcParameters& params,
                                             long long j, const ReducedFraction& frac,
                                             const std::vector<std::vector<double>>& offsets);

struct OffArcReport {
    double max_modulus = 0.0;
    double decay_reference = 0.0;  // 2^{-(1-delta) j / D}
    double ratio = 0.0;
};

// sup |Phi_j(eta)| over offsets that all FAIL the major-arc test, compared
// against the stationary-phase reference rate.
OffArcReport off_arc_phi_report(const PolynomialMap& map, const CZKernel& kernel,
                                const BumpProfile& bump, const ArcParameters& params, long long j,
                                const ReducedFraction& frac,
                                const std::vector<std::vector<double>>& offsets);

struct MinorArcKernelResult {
    LatticeFunction kernel;    // F^{-1}[E_j] restricted to {rho(x) <= rho_max}
    double tail_l1 = 0.0;      // l^1 mass outside Q_* = {rho <= 2^{(D+1)j}} (within the grid)
    double sup_abs = 0.0;
    cplx zero_frequency_sum{0.0, 0.0};  // sum_x over the full inverse grid; equals E_j(0)
    bool refinement_converged = true;
    long long grid_used = 0;
};

MinorArcKernelResult minor_arc_kernel(const PolynomialMap& map, const CZKernel& kernel,
                                      const BumpProfile& bump, const ArcParameters& params,
                                      long long j, long long grid_n, double rho_max);

struct RegionReport {
    bool in_omega_m = false;
    bool major_condition_ok = false;
    long long n_p = 0;
};

// Exact rational evaluation of the proven sparse region: max(1/r, 1/s) <
// 1/2 + eps'/(2 N_P) with N_P = (1 + deg P) sum_i deg P_i, plus the major-arc
// side condition 1/D_* > (n+1)/2 (|1/r - 1/2| + |1/s - 1/2|).
RegionReport proven_region(const PolynomialMap& map, const Rational& eps_prime, const Rational& r,
                           const Rational& s);

}  // namespace radonlab
