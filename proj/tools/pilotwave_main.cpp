#include "pilotwave/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"pilotwave: deterministic Bohmian trajectory experiments for an "
                 "entangled two-particle two-slit arrangement"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out_dir;

    CLI::App* run = app.add_subcommand("run", "run one experiment described by an INI config");
    run->add_option("config", config_path, "path to the experiment config")->required();
    run->add_option("--seed", seed, "override the configured random seed");
    run->add_option("--workers", workers,
                    "worker threads for ensemble evolution (default: all cores)");
    run->add_option("--out", out_dir,
                    "output directory (overrides PILOTWAVE_OUT and the config's [output] dir)");

    CLI::App* list = app.add_subcommand("list", "print the experiments and the keys they accept");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (list->parsed()) {
            pilotwave::print_experiment_list(std::cout);
            return 0;
        }
        pilotwave::ExperimentSpec spec = pilotwave::load_config_file(config_path);
        if (run->count("--seed") > 0) {
            spec.ensemble.master_seed = seed;
            spec.toy.seed = seed;
        }
        if (run->count("--out") > 0) {
            spec.output_dir = out_dir;
        } else if (const char* env = std::getenv("PILOTWAVE_OUT"); env != nullptr && *env != '\0') {
            spec.output_dir = env;
        }
        return pilotwave::run_experiment(spec, std::cout, workers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
