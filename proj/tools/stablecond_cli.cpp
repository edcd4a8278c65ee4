#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stablecond/config.hpp"
#include "stablecond/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stable-process hitting, conditioning and duality experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    unsigned workers = 0;
    std::uint64_t seed = 0;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", config_path, "config file (key = value, or resolved-config.json)")->required();
    auto* w_opt = run->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    auto* s_opt = run->add_option("--seed", seed, "master seed (u64)");
    auto* o_opt = run->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : stablecond::exit_error;
    }

    try {
        stablecond::RunConfig cfg = stablecond::parse_config(config_path);
        // command-line flags beat the file and the environment
        if (*w_opt) cfg.values["workers"] = workers;
        if (*s_opt) {
            cfg.values["seed"] = seed;
            cfg.seed_from_entropy = false;
        }
        if (*o_opt) cfg.values["out"] = out_dir;
        bool entropy = cfg.seed_from_entropy;
        stablecond::finalize_config(cfg);
        cfg.seed_from_entropy = entropy;
        if (entropy) std::cerr << "seed drawn from entropy: " << cfg.u64("seed") << '\n';
        return stablecond::run_experiment(cfg, cfg.str("out"), std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return stablecond::exit_error;
    }
}
