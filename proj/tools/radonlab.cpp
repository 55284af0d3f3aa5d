#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "radonlab/experiment.hpp"
#include "radonlab/kernels.hpp"
#include "radonlab/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"radonlab: numerical laboratory for discrete Radon transforms"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "cap the worker pool (env RADONLAB_THREADS overrides)");

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", config_path, "path to the config JSON")->required();

    CLI::App* fixtures = app.add_subcommand("fixtures", "list built-in maps and kernels");

    std::string region_map = "t3";
    std::string eps_prime = "0.06";
    std::string r_exact = "2";
    std::string s_exact = "2";
    CLI::App* region = app.add_subcommand("region", "evaluate the proven sparse region");
    region->add_option("--map", region_map, "fixture map name");
    region->add_option("--eps-prime", eps_prime, "decay exponent (exact decimal or p/q)");
    region->add_option("--r", r_exact, "exponent r (exact decimal or p/q)");
    region->add_option("--s", s_exact, "exponent s (exact decimal or p/q)");

    CLI11_PARSE(app, argc, argv);

    if (const char* env = std::getenv("RADONLAB_THREADS")) threads = std::atoi(env);
    if (threads > 0) radonlab::thread_cap().store(static_cast<unsigned>(threads));

    try {
        if (fixtures->parsed()) {
            std::printf("maps:\n");
            for (const auto& name : radonlab::fixture_map_names()) {
                const auto map = radonlab::fixture_map(name);
                std::printf("  %-10s d=%d n=%d deg=%d\n", name.c_str(), map.dim_domain(),
                            map.dim_range(), map.degree());
            }
            std::printf("kernels:\n");
            for (const auto& name : radonlab::kernel_registry_names())
                std::printf("  %s\n", name.c_str());
            return 0;
        }
        if (region->parsed()) {
            if (!radonlab::has_fixture_map(region_map)) {
                std::fprintf(stderr, "region: unknown fixture map '%s'\n", region_map.c_str());
                return 2;
            }
            const auto map = radonlab::fixture_map(region_map);
            const auto report = radonlab::proven_region(map, radonlab::Rational::parse(eps_prime),
                                                        radonlab::Rational::parse(r_exact),
                                                        radonlab::Rational::parse(s_exact));
            std::printf("{\"in_Omega_m\": %s, \"major_condition_ok\": %s, \"N_P\": %lld}\n",
                        report.in_omega_m ? "true" : "false",
                        report.major_condition_ok ? "true" : "false", report.n_p);
            return 0;
        }
        // run
        const auto config = radonlab::ExperimentConfig::from_json_file(config_path);
        const auto outcome = radonlab::run_experiment(config);
        std::printf("%s\n", outcome.summary_json.c_str());
        if (outcome.partial)
            std::fprintf(stderr, "warning: budget overrun, partial results written\n");
        return outcome.exit_code;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
