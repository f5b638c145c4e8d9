// Experiment runner: eecli <verb> [--config PATH] [--seed N] [--out DIR]
#include "ee/commands.hpp"
#include "ee/errors.hpp"

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include <iostream>
#include <optional>
#include <utility>

int main(int argc, char** argv) {
    CLI::App app{"Embedding expansion experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    const std::pair<const char*, const char*> verbs[] = {
        {"train", "train an embedder, log per-epoch metrics and save a checkpoint"},
        {"eval", "evaluate a checkpoint on the test split"},
        {"gradcheck", "compare analytic loss gradients with finite differences"},
        {"ablate", "sweep loss x n x normalization x seed"},
        {"bench", "time synthetic generation against the full loss"},
        {"expand", "dump one expanded batch with row provenance"},
    };
    for (const auto& [verb, help] : verbs) {
        CLI::App* sub = app.add_subcommand(verb, help);
        sub->add_option("--config", config_path, "YAML config file");
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out, "override the output directory");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string verb = app.get_subcommands().front()->get_name();

    try {
        ee::RunConfig config = config_path.empty() ? ee::parse_run_config("") : ee::load_run_config(config_path);
        if (seed) {
            config.seed = *seed;
        }
        if (out) {
            config.output_dir = *out;
        }
        config.resolve();
        return ee::run_verb(verb, config, std::cout);
    } catch (const ee::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ee::exit_code_for(e.category());
    } catch (const YAML::Exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
