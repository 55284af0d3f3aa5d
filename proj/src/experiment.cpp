#include "radonlab/experiment.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "radonlab/fit.hpp"
#include "radonlab/sparse.hpp"
#include "radonlab/transform.hpp"

namespace radonlab {

namespace {

PolynomialMap monomial_map(int k) {
    PolynomialMap::Term t;
    t.alpha = {k};
    t.coeff = {1};
    return PolynomialMap(1, 1, {t});
}

PolynomialMap curve_map(int k) {  // (t, t^k)
    PolynomialMap::Term a{{1}, {1, 0}};
    PolynomialMap::Term b{{k}, {0, 1}};
    return PolynomialMap(1, 2, {a, b});
}

PolynomialMap moment_map(int k) {  // (t, t^2, ..., t^k)
    std::vector<PolynomialMap::Term> terms;
    for (int e = 1; e <= k; ++e) {
        PolynomialMap::Term t;
        t.alpha = {e};
        t.coeff.assign(k, 0);
        t.coeff[e - 1] = 1;
        terms.push_back(std::move(t));
    }
    return PolynomialMap(1, k, std::move(terms));
}

PolynomialMap iw_universal_map(int d, int cap) {  // [P(t)]_alpha = t^alpha, 0 < |alpha| <= cap
    std::vector<std::vector<int>> alphas;
    std::vector<int> alpha(d, 0);
    for (;;) {
        int order = 0;
        for (int a : alpha) order += a;
        if (order > 0 && order <= cap) alphas.push_back(alpha);
        int axis = d - 1;
        while (axis >= 0) {
            if (++alpha[axis] <= cap) break;
            alpha[axis] = 0;
            --axis;
        }
        if (axis < 0) break;
    }
    const int n = static_cast<int>(alphas.size());
    std::vector<PolynomialMap::Term> terms;
    for (int i = 0; i < n; ++i) {
        PolynomialMap::Term t;
        t.alpha = alphas[i];
        t.coeff.assign(n, 0);
        t.coeff[i] = 1;
        terms.push_back(std::move(t));
    }
    return PolynomialMap(d, n, std::move(terms));
}

}  // namespace

std::vector<std::string> fixture_map_names() {
    std::vector<std::string> names;
    for (int k = 1; k <= 5; ++k) names.push_back("t" + std::to_string(k));
    for (int k = 2; k <= 4; ++k) names.push_back("curve_" + std::to_string(k));
    for (int k = 2; k <= 4; ++k) names.push_back("moment_" + std::to_string(k));
    names.push_back("iw_1_2");
    names.push_back("iw_1_3");
    names.push_back("iw_2_2");
    names.push_back("iw_2_3");
    return names;
}

bool has_fixture_map(const std::string& name) {
    for (const auto& n : fixture_map_names())
        if (n == name) return true;
    return false;
}

PolynomialMap fixture_map(const std::string& name) {
    if (name.size() == 2 && name[0] == 't' && name[1] >= '1' && name[1] <= '5')
        return monomial_map(name[1] - '0');
    if (name.rfind("curve_", 0) == 0) return curve_map(std::stoi(name.substr(6)));
    if (name.rfind("moment_", 0) == 0) return moment_map(std::stoi(name.substr(7)));
    if (name.rfind("iw_", 0) == 0) {
        const auto us = name.rfind('_');
        const int d = std::stoi(name.substr(3, us - 3));
        const int cap = std::stoi(name.substr(us + 1));
        return iw_universal_map(d, cap);
    }
    throw std::invalid_argument("unknown fixture map: " + name);
}

const char* kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::weyl_decay: return "weyl-decay";
        case ExperimentKind::multiplier_approx: return "multiplier-approx";
        case ExperimentKind::error_decay: return "error-decay";
        case ExperimentKind::sparse_constant: return "sparse-constant";
        case ExperimentKind::maximal_check: return "maximal-check";
        case ExperimentKind::finite_support_check: return "finite-support-check";
        case ExperimentKind::region: return "region";
        case ExperimentKind::admissibility: return "admissibility";
    }
    return "unknown";
}

namespace {

ExperimentKind kind_from_name(const std::string& name) {
    for (ExperimentKind k : {ExperimentKind::weyl_decay, ExperimentKind::multiplier_approx,
                             ExperimentKind::error_decay, ExperimentKind::sparse_constant,
                             ExperimentKind::maximal_check, ExperimentKind::finite_support_check,
                             ExperimentKind::region, ExperimentKind::admissibility})
        if (name == kind_name(k)) return k;
    throw std::invalid_argument("config field 'kind': unknown experiment kind '" + name + "'");
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

PolynomialMap ExperimentConfig::resolve_map() const {
    if (map_inline) return PolynomialMap::from_json(*map_inline);
    return fixture_map(map_name);
}

std::string ExperimentConfig::canonical_json() const {
    nlohmann::json j;
    j["beta"] = beta;
    j["delta"] = delta;
    j["delta_prime"] = delta_prime;
    j["eps_prime"] = eps_prime;
    j["grid_n"] = grid_n;
    j["grid_step"] = grid_step;
    j["j_max"] = j_max;
    j["j_min"] = j_min;
    j["kernel"] = kernel;
    j["kind"] = kind_name(kind);
    j["l0"] = l0;
    j["map"] = map_inline ? *map_inline : map_name;
    j["probe_radius"] = probe_radius;
    j["q_cap"] = q_cap;
    j["r"] = r;
    j["r_exact"] = r_exact;
    j["regime"] = regime == ArcRegime::paper ? "paper" : "exploratory";
    j["s"] = s;
    j["s_exact"] = s_exact;
    j["seed"] = seed;
    j["sigma"] = sigma;
    j["support_radius"] = support_radius;
    j["trials"] = trials;
    return j.dump();  // nlohmann objects serialize with sorted keys
}

std::string ExperimentConfig::params_hash() const {
    const std::string canon = canonical_json();
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig c;
    const auto need = [&](const char* field) {
        if (!j.contains(field))
            throw std::invalid_argument(std::string("config field '") + field + "': missing");
        return j.at(field);
    };
    const auto opt_num = [&](const char* field, double& slot) {
        if (!j.contains(field)) return;
        if (!j.at(field).is_number())
            throw std::invalid_argument(std::string("config field '") + field + "': must be a number");
        slot = j.at(field).get<double>();
    };
    const auto opt_int = [&](const char* field, long long& slot) {
        if (!j.contains(field)) return;
        if (!j.at(field).is_number_integer())
            throw std::invalid_argument(std::string("config field '") + field + "': must be an integer");
        slot = j.at(field).get<long long>();
    };

    c.kind = kind_from_name(need("kind").get<std::string>());
    if (j.contains("map")) {
        if (j.at("map").is_string()) {
            c.map_name = j.at("map").get<std::string>();
            if (!has_fixture_map(c.map_name))
                throw std::invalid_argument("config field 'map': unknown fixture '" + c.map_name + "'");
        } else if (j.at("map").is_object()) {
            c.map_inline = j.at("map").dump();
            PolynomialMap::from_json(*c.map_inline);  // validates now
            c.map_name = "(inline)";
        } else {
            throw std::invalid_argument("config field 'map': must be a fixture name or an object");
        }
    }
    if (j.contains("kernel")) c.kernel = j.at("kernel").get<std::string>();
    opt_num("delta", c.delta);
    opt_num("delta_prime", c.delta_prime);
    if (j.contains("regime")) {
        const std::string reg = j.at("regime").get<std::string>();
        if (reg == "paper")
            c.regime = ArcRegime::paper;
        else if (reg == "exploratory")
            c.regime = ArcRegime::exploratory;
        else
            throw std::invalid_argument("config field 'regime': must be 'paper' or 'exploratory'");
    }
    opt_int("j_min", c.j_min);
    opt_int("j_max", c.j_max);
    opt_int("q_cap", c.q_cap);
    opt_int("grid_n", c.grid_n);
    if (j.contains("trials")) {
        if (!j.at("trials").is_number_integer() || j.at("trials").get<long long>() < 1)
            throw std::invalid_argument("config field 'trials': must be a positive integer");
        c.trials = j.at("trials").get<int>();
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    opt_num("r", c.r);
    opt_num("s", c.s);
    opt_num("sigma", c.sigma);
    if (j.contains("eps_prime")) {
        if (j.at("eps_prime").is_string())
            c.eps_prime = j.at("eps_prime").get<std::string>();
        else
            c.eps_prime = fmt_double(j.at("eps_prime").get<double>());
    }
    if (j.contains("r_exact")) c.r_exact = j.at("r_exact").get<std::string>();
    if (j.contains("s_exact")) c.s_exact = j.at("s_exact").get<std::string>();
    opt_int("support_radius", c.support_radius);
    opt_num("beta", c.beta);
    opt_num("l0", c.l0);
    opt_num("probe_radius", c.probe_radius);
    opt_num("grid_step", c.grid_step);

    // window validation
    switch (c.kind) {
        case ExperimentKind::weyl_decay:
            if (c.q_cap < 1) throw std::invalid_argument("config field 'q_cap': must be >= 1");
            break;
        case ExperimentKind::multiplier_approx:
        case ExperimentKind::error_decay:
            if (c.j_min < 1 || c.j_max < c.j_min)
                throw std::invalid_argument("config field 'j_min'/'j_max': need 1 <= j_min <= j_max");
            ArcParameters(c.delta, c.delta_prime, c.regime);  // throws with window diagnostics
            break;
        case ExperimentKind::sparse_constant:
        case ExperimentKind::maximal_check:
        case ExperimentKind::finite_support_check:
            if (!(c.sigma > 0 && c.sigma < 1))
                throw std::invalid_argument("config field 'sigma': must lie in (0,1)");
            break;
        case ExperimentKind::region:
            Rational::parse(c.eps_prime);
            Rational::parse(c.r_exact);
            Rational::parse(c.s_exact);
            break;
        case ExperimentKind::admissibility:
            if (c.beta <= 0) throw std::invalid_argument("config field 'beta': must be positive");
            if (c.l0 <= 0) throw std::invalid_argument("config field 'l0': must be positive");
            if (c.probe_radius < c.l0)
                throw std::invalid_argument("config field 'probe_radius': must be >= l0");
            break;
    }
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string radonlab_version() { return "radonlab-0.1.0"; }

namespace {

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path);
        write_row(header);
    }
    void write_row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << escape(fields[i]);
        }
        out_ << "\r\n";  // RFC 4180
    }

private:
    static std::string escape(const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += "\"\"";
            else q += c;
        }
        return q + "\"";
    }
    std::ofstream out_;
};

struct RunContext {
    const ExperimentConfig& cfg;
    std::string hash;
    nlohmann::json summary;
};

void run_weyl_decay(RunContext& ctx, CsvWriter& csv) {
    const PolynomialMap map = ctx.cfg.resolve_map();
    const WeylDecayFit fit = weyl_decay_fit(map, ctx.cfg.q_cap);
    const char* regime = ctx.cfg.regime == ArcRegime::paper ? "paper" : "exploratory";
    std::vector<double> lx, ly;
    for (const auto& row : fit.rows) {
        csv.write_row({std::to_string(row.q), fmt_double(row.max_modulus), "ls_log2", regime,
                       ctx.hash});
        if (row.q >= 2 && row.max_modulus > 1e-14) {
            lx.push_back(std::log2(static_cast<double>(row.q)));
            ly.push_back(std::log2(row.max_modulus));
        }
    }
    ctx.summary["ls_slope"] = fit.ls_slope;
    if (lx.size() >= 3) {
        const SlopeBand band = bootstrap_slope_band(lx, ly, 1000, ctx.cfg.seed);
        ctx.summary["theil_sen_slope"] = band.slope;
        ctx.summary["slope_lo95"] = band.lo95;
        ctx.summary["slope_hi95"] = band.hi95;
    }
}

void run_multiplier_approx(RunContext& ctx, CsvWriter& csv) {
    const PolynomialMap map = ctx.cfg.resolve_map();
    const CZKernel kernel = make_kernel(ctx.cfg.kernel, map.dim_domain());
    const BumpProfile bump = smooth_bump();
    const ArcParameters params(ctx.cfg.delta, ctx.cfg.delta_prime, ctx.cfg.regime);
    const ReducedFraction frac = ReducedFraction::zero(map.dim_range());
    std::vector<double> js, logs;
    for (long long j = ctx.cfg.j_min; j <= ctx.cfg.j_max; ++j) {
        std::vector<std::vector<double>> offsets;
        for (double frac_of_width : {-1.0, -0.5, -0.25, 0.25, 0.5, 1.0}) {
            std::vector<double> eta(map.dim_range());
            for (int i = 0; i < map.dim_range(); ++i)
                eta[i] = frac_of_width * major_arc_halfwidth(map, params, j, i);
            offsets.push_back(std::move(eta));
        }
        const auto report = approximation_error(map, kernel, bump, params, j, frac, offsets);
        csv.write_row({std::to_string(j), fmt_double(report.max_deviation), "theil_sen_log2",
                       params.regime_name(), ctx.hash});
        js.push_back(static_cast<double>(j));
        logs.push_back(std::log2(std::max(report.max_deviation, 1e-300)));
    }
    const SlopeBand band = bootstrap_slope_band(js, logs, 1000, ctx.cfg.seed);
    ctx.summary["theil_sen_slope"] = band.slope;
    ctx.summary["slope_lo95"] = band.lo95;
    ctx.summary["slope_hi95"] = band.hi95;
    ctx.summary["epsilon"] = params.epsilon();
}

void run_error_decay(RunContext& ctx, CsvWriter& csv) {
    const PolynomialMap map = ctx.cfg.resolve_map();
    const CZKernel kernel = make_kernel(ctx.cfg.kernel, map.dim_domain());
    const BumpProfile bump = smooth_bump();
    const ArcParameters params(ctx.cfg.delta, ctx.cfg.delta_prime, ctx.cfg.regime);
    std::vector<double> js, logs;
    for (long long j = ctx.cfg.j_min; j <= ctx.cfg.j_max; ++j) {
        const auto result = error_term(map, kernel, bump, params, j, ctx.cfg.grid_n);
        csv.write_row({std::to_string(j), fmt_double(result.sup_norm), "theil_sen_log2",
                       params.regime_name(), ctx.hash});
        js.push_back(static_cast<double>(j));
        logs.push_back(std::log2(std::max(result.sup_norm, 1e-300)));
    }
    const SlopeBand band = bootstrap_slope_band(js, logs, 1000, ctx.cfg.seed);
    ctx.summary["theil_sen_slope"] = band.slope;
    ctx.summary["slope_lo95"] = band.lo95;
    ctx.summary["slope_hi95"] = band.hi95;
    ctx.summary["eps_prime_fit"] = -band.slope;
}

void run_sparse_constant(RunContext& ctx, CsvWriter& csv) {
    const PolynomialMap map = ctx.cfg.resolve_map();
    const CZKernel kernel = make_kernel(ctx.cfg.kernel, map.dim_domain());
    TruncatedTransform transform(map, kernel, smooth_bump(), 1, ctx.cfg.j_max);
    Box box;
    box.lo.assign(map.dim_range(), -ctx.cfg.support_radius);
    box.hi.assign(map.dim_range(), ctx.cfg.support_radius);
    Rng rng(ctx.cfg.seed);
    std::vector<double> ratios;
    bool all_certified = true;
    for (int trial = 0; trial < ctx.cfg.trials; ++trial) {
        Rng trng = rng.fork(static_cast<std::uint64_t>(trial) + 1);
        LatticeFunction f(box), g(box);
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = trng.next_unit() < 0.5 ? cplx{-1, 0} : cplx{1, 0};
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = trng.next_unit() < 0.5 ? cplx{-1, 0} : cplx{1, 0};
        const LatticeFunction tf = apply(transform, f);
        const SparseRatio ratio =
            sparse_ratio(tf, f, g, ctx.cfg.r, ctx.cfg.s, ctx.cfg.sigma, map.degrees());
        bool cert = false;
        if (ratio.defined) {
            const SparseCollection coll = build_sparse_collection(
                f, g, ctx.cfg.sigma, map.degrees(),
                std::vector<long long>(static_cast<std::size_t>(map.dim_range()), 0));
            cert = verify_sparsity(coll, ctx.cfg.sigma).status == SparsityStatus::certified;
            all_certified = all_certified && cert;
            ratios.push_back(ratio.ratio);
        }
        csv.write_row({std::to_string(trial), fmt_double(ratio.ratio), cert ? "1" : "0",
                       ctx.hash});
    }
    if (!ratios.empty()) {
        const double mx = *std::max_element(ratios.begin(), ratios.end());
        const double med = median_of(ratios);
        ctx.summary["max_ratio"] = mx;
        ctx.summary["median_ratio"] = med;
        ctx.summary["max_over_median"] = mx / med;
    }
    ctx.summary["all_collections_certified"] = all_certified;
}

void run_maximal_check(RunContext& ctx, CsvWriter& csv) {
    const PolynomialMap map = ctx.cfg.resolve_map();
    std::vector<double> sidelengths;
    for (double ell = 1; ell <= 16; ell *= 2) sidelengths.push_back(ell);
    const auto report = check_maximal_sparse(map, sidelengths, ctx.cfg.trials,
                                             ctx.cfg.support_radius, ctx.cfg.seed);
    for (std::size_t i = 0; i < report.ratios.size(); ++i)
        csv.write_row({std::to_string(i), fmt_double(report.ratios[i]), ctx.hash});
    ctx.summary["max_ratio"] = report.max_ratio;
    ctx.summary["median_ratio"] = report.median_ratio;
    ctx.summary["max_over_median"] =
        report.median_ratio > 0 ? report.max_ratio / report.median_ratio : 0.0;
    ctx.summary["all_collections_certified"] = report.all_collections_certified;
}

void run_finite_support_check(RunContext& ctx, CsvWriter& csv) {
    const PolynomialMap map = ctx.cfg.resolve_map();
    const PCube qstar = PCube::centered(map.degrees(),
                                        std::vector<long long>(map.dim_range(), 0), 3.0);
    LatticeFunction kernel_fn(Box{qstar.lo(), qstar.hi()});
    const double vol = static_cast<double>(qstar.volume());
    for (std::size_t i = 0; i < kernel_fn.size(); ++i) kernel_fn[i] = 1.0 / vol;
    const auto report = check_prop_finite_support(kernel_fn, qstar, ctx.cfg.r, ctx.cfg.s,
                                                  ctx.cfg.trials, ctx.cfg.seed);
    for (std::size_t i = 0; i < report.lhs.size(); ++i)
        csv.write_row({std::to_string(i), fmt_double(report.lhs[i]), fmt_double(report.rhs),
                       fmt_double(report.lhs[i] / report.rhs), ctx.hash});
    ctx.summary["max_ratio"] = report.max_ratio;
    ctx.summary["operator_norm_bound"] = report.operator_norm_bound;
    ctx.summary["rhs"] = report.rhs;
    ctx.summary["all_collections_certified"] = report.all_collections_certified;
}

void run_region(RunContext& ctx, CsvWriter& csv) {
    const PolynomialMap map = ctx.cfg.resolve_map();
    const Rational eps = Rational::parse(ctx.cfg.eps_prime);
    const Rational r = Rational::parse(ctx.cfg.r_exact);
    const Rational s = Rational::parse(ctx.cfg.s_exact);
    const RegionReport report = proven_region(map, eps, r, s);
    csv.write_row({r.str(), s.str(), eps.str(), report.in_omega_m ? "1" : "0",
                   report.major_condition_ok ? "1" : "0", std::to_string(report.n_p), ctx.hash});
    ctx.summary["in_Omega_m"] = report.in_omega_m;
    ctx.summary["major_condition_ok"] = report.major_condition_ok;
    ctx.summary["N_P"] = report.n_p;
    ctx.summary["eps_prime"] = eps.str();
}

void run_admissibility(RunContext& ctx, CsvWriter& csv) {
    const PolynomialMap map = ctx.cfg.resolve_map();
    const auto cond_c = check_condition_c(map);
    std::string witness_text;
    for (const auto& w : cond_c.witnesses) {
        if (!witness_text.empty()) witness_text += ";";
        if (w) {
            for (std::size_t i = 0; i < w->size(); ++i)
                witness_text += (i ? " " : "") + std::to_string((*w)[i]);
        } else {
            witness_text += "none";
        }
    }
    csv.write_row({"condition_C", cond_c.satisfied ? "true" : "false", witness_text, ctx.hash});
    const auto probe = probe_condition_l(map, ctx.cfg.beta, ctx.cfg.l0, ctx.cfg.probe_radius,
                                         ctx.cfg.grid_step);
    std::string cx;
    for (std::size_t i = 0; i < probe.counterexample.size(); ++i)
        cx += (i ? " " : "") + fmt_double(probe.counterexample[i]);
    csv.write_row({"condition_L_probe",
                   probe.counterexample_found ? "counterexample" : "no_counterexample_found", cx,
                   ctx.hash});
    ctx.summary["condition_C"] = cond_c.satisfied;
    ctx.summary["condition_L_probe"] =
        probe.counterexample_found ? "counterexample" : "no_counterexample_found";
    ctx.summary["points_checked"] = probe.points_checked;
}

std::vector<std::string> csv_header(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::weyl_decay:
            return {"q", "value", "fitted_model", "regime", "params_hash"};
        case ExperimentKind::multiplier_approx:
            return {"j", "value", "fitted_model", "regime", "params_hash"};
        case ExperimentKind::error_decay:
            return {"j", "value", "fitted_model", "regime", "params_hash"};
        case ExperimentKind::sparse_constant:
            return {"trial", "ratio", "certified", "params_hash"};
        case ExperimentKind::maximal_check: return {"trial", "ratio", "params_hash"};
        case ExperimentKind::finite_support_check:
            return {"trial", "lhs", "rhs", "lhs_over_rhs", "params_hash"};
        case ExperimentKind::region:
            return {"r", "s", "eps_prime", "in_omega_m", "major_condition_ok", "n_p",
                    "params_hash"};
        case ExperimentKind::admissibility: return {"check", "result", "detail", "params_hash"};
    }
    return {};
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    ExperimentOutcome outcome;
    outcome.csv_path = config.output + ".csv";
    outcome.json_path = config.output + ".json";

    RunContext ctx{config, config.params_hash(), nlohmann::json::object()};
    ctx.summary["kind"] = kind_name(config.kind);
    ctx.summary["params"] = nlohmann::json::parse(config.canonical_json());
    ctx.summary["params_hash"] = ctx.hash;
    ctx.summary["version"] = radonlab_version();

    CsvWriter csv(outcome.csv_path, csv_header(config.kind));
    try {
        switch (config.kind) {
            case ExperimentKind::weyl_decay: run_weyl_decay(ctx, csv); break;
            case ExperimentKind::multiplier_approx: run_multiplier_approx(ctx, csv); break;
            case ExperimentKind::error_decay: run_error_decay(ctx, csv); break;
            case ExperimentKind::sparse_constant: run_sparse_constant(ctx, csv); break;
            case ExperimentKind::maximal_check: run_maximal_check(ctx, csv); break;
            case ExperimentKind::finite_support_check: run_finite_support_check(ctx, csv); break;
            case ExperimentKind::region: run_region(ctx, csv); break;
            case ExperimentKind::admissibility: run_admissibility(ctx, csv); break;
        }
    } catch (const std::runtime_error& e) {
        // budget overruns leave partial results, flagged
        ctx.summary["partial"] = true;
        ctx.summary["budget_error"] = e.what();
        outcome.partial = true;
        outcome.exit_code = 3;
    }
    if (!outcome.partial) ctx.summary["partial"] = false;

    std::ofstream jf(outcome.json_path);
    if (!jf) throw std::runtime_error("cannot open " + outcome.json_path);
    outcome.summary_json = ctx.summary.dump(2);
    jf << outcome.summary_json << "\n";
    return outcome;
}

}  // namespace radonlab
