#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lab/config.hpp"
#include "lab/errors.hpp"
#include "lab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"gklab - curvature and regularity-at-infinity laboratory for polynomial "
                 "families of hypersurfaces"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    long long seed_override = -1;
    int workers_override = 0;

    CLI::App* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--seed", seed_override, "override the seed");
    run->add_option("--workers", workers_override, "worker pool size");
    run->add_option("--out", out_override, "output directory");

    CLI::App* list = app.add_subcommand("list", "print the built-in family corpus");

    CLI::App* validate = app.add_subcommand("validate", "validate a config file");
    validate->add_option("config", config_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            std::cout << lab::list_builtin_text();
            return 0;
        }
        lab::ExperimentConfig cfg = lab::parse_config_file(config_path);
        if (seed_override >= 0) {
            cfg.seed = static_cast<std::uint64_t>(seed_override);
            cfg.seed_set = true;
        }
        if (workers_override > 0) cfg.workers = workers_override;
        if (!out_override.empty()) cfg.out_dir = out_override;

        if (validate->parsed()) {
            lab::validate_config(cfg);
            std::cout << "config ok\n";
            return 0;
        }
        lab::RunResult res = lab::run_experiment(cfg);
        for (const std::string& a : res.artifacts) std::cout << cfg.out_dir << "/" << a << "\n";
        return 0;
    } catch (const lab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
