#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "radonlab/lattice_fn.hpp"
#include "radonlab/poly_map.hpp"

namespace radonlab {

// A collection of P-cubes, optionally carrying explicit witness sets E_Q.
struct SparseCollection {
    std::vector<PCube> cubes;
    std::optional<std::vector<std::vector<std::vector<long long>>>> witnesses;
    double sigma = 0.5;

    std::string to_json() const;
    static SparseCollection from_json(const std::string& text, const std::vector<int>& degrees);
};

// Lambda_{r,s}(f,g) = sum_Q |Q| <f>_{Q,r} <g>_{Q,s}.
double sparse_form(const SparseCollection& collection, const LatticeFunction& f,
                   const LatticeFunction& g, double r, double s);

enum class SparsityStatus { certified, refuted, heuristic_certified, heuristic_refuted };

struct SparsityVerdict {
    SparsityStatus status = SparsityStatus::refuted;
    bool exact = true;
    // certified: one witness set per cube, pairwise disjoint, |E_Q| >= ceil(sigma |Q|)
    std::vector<std::vector<std::vector<long long>>> witnesses;
    // refuted: cube indices C with sum of demands > |union of points in C| (Hall violator)
    std::vector<std::size_t> cut_certificate;
};

// Decides existence of disjoint witnesses by integral max-flow
// (source -> cube with demand ceil(sigma|Q|), cube -> point, point -> sink).
// Falls back heuristically above the point budget, labeled as such.
SparsityVerdict verify_sparsity(const SparseCollection& collection, double sigma,
                                long long point_budget = 2'000'000);

// Calderon-Zygmund stopping time on an anisotropic triadic P-grid: the root
// covers supp f and supp g; a child is selected when its l^1 average of |f| or
// |g| exceeds C0 = 2/(1-sigma) times the parent's, which caps the selected
// volume at (1-sigma)|Q| and makes every output sigma-sparse by construction.
// Witness sets are materialized so the collection is certifiable post hoc.
SparseCollection build_sparse_collection(const LatticeFunction& f, const LatticeFunction& g,
                                         double sigma, const std::vector<int>& degrees,
                                         const std::vector<long long>& grid_shift);

struct SparseRatio {
    double ratio = 0.0;
    bool defined = false;       // false when <Tf,g> = 0 = Lambda (reported, not an error)
    double numerator = 0.0;
    double denominator = 0.0;
};

// |<Tf, g>| / Lambda^S_{r,s}(f,g) with S built from (f, g). A zero denominator
// against a nonzero numerator throws (the construction failed to cover).
SparseRatio sparse_ratio(const LatticeFunction& transformed_f, const LatticeFunction& f,
                         const LatticeFunction& g, double r, double s, double sigma,
                         const std::vector<int>& degrees);

struct FiniteSupportCheck {
    double max_ratio = 0.0;          // max over trials of lhs / rhs
    std::vector<double> lhs;         // sparse-domination constants per trial
    double rhs = 0.0;                // |Q_*|^{1/r + 1/s - 1} * ||T_K||_{r -> s'} estimate
    double operator_norm_bound = 0.0;
    bool all_collections_certified = true;
};

// Numeric check of the finite-support comparison: convolution kernels living on
// a P-cube Q_* centered at the origin are dominated at the claimed scale.
FiniteSupportCheck check_prop_finite_support(const LatticeFunction& kernel_on_qstar,
                                             const PCube& qstar, double r, double s, int trials,
                                             std::uint64_t seed);

struct MaximalSparseCheck {
    std::vector<double> ratios;
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    bool all_collections_certified = true;
};

// Ratio batch for M_P against Lambda_{1,1}.
MaximalSparseCheck check_maximal_sparse(const PolynomialMap& map,
                                        const std::vector<double>& sidelengths, int trials,
                                        long long support_radius, std::uint64_t seed);

}  // namespace radonlab
