#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radonlab/circle_method.hpp"
#include "radonlab/poly_map.hpp"

namespace radonlab {

// Built-in polynomial fixtures: t^k, the monomial curves (t, t^k), moment
// curves, and the Ionescu-Wainger universal family for small d, D.
std::vector<std::string> fixture_map_names();
PolynomialMap fixture_map(const std::string& name);
bool has_fixture_map(const std::string& name);

enum class ExperimentKind {
    weyl_decay,
    multiplier_approx,
    error_decay,
    sparse_constant,
    maximal_check,
    finite_support_check,
    region,
    admissibility,
};

const char* kind_name(ExperimentKind kind);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::weyl_decay;
    std::string map_name = "t3";          // fixture name, or inline JSON under map_inline
    std::optional<std::string> map_inline;
    std::string kernel = "one_over_y";
    double delta = 0.3;
    double delta_prime = 0.02;
    ArcRegime regime = ArcRegime::exploratory;
    long long j_min = 6;
    long long j_max = 14;
    long long q_cap = 500;
    long long grid_n = 1 << 20;
    int trials = 100;
    std::uint64_t seed = 1;
    std::string output = "experiment";    // writes <output>.csv and <output>.json
    double r = 2.0;
    double s = 2.0;
    double sigma = 0.5;
    std::string eps_prime = "0.06";       // exact decimal for region arithmetic
    std::string r_exact = "2";
    std::string s_exact = "2";
    long long support_radius = 512;
    // admissibility probe window
    double beta = 1.0;
    double l0 = 1.0;
    double probe_radius = 50.0;
    double grid_step = 0.25;

    PolynomialMap resolve_map() const;
    std::string canonical_json() const;   // sorted keys, stable formatting
    std::string params_hash() const;      // FNV-1a 64 of the canonical form

    static ExperimentConfig from_json_text(const std::string& text);   // throws with field diagnostics
    static ExperimentConfig from_json_file(const std::string& path);
};

struct ExperimentOutcome {
    int exit_code = 0;
    bool partial = false;
    std::string csv_path;
    std::string json_path;
    std::string summary_json;  // also written to json_path
};

// Runs one experiment, writing the CSV table and the JSON summary. Deterministic
// given the seed; every CSV row carries the regime and params hash.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

std::string radonlab_version();

}  // namespace radonlab
