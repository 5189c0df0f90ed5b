#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ailboost/acceptance.hpp"
#include "ailboost/experiment.hpp"
#include "ailboost/numfmt.hpp"

namespace {

using namespace ailboost;

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> expert_trajs;
};

ExperimentConfig load(const Common& common) {
    ExperimentConfig config = common.config_path.empty() ? ExperimentConfig{} : load_config(common.config_path);
    if (common.expert_trajs) {
        config.expert_trajs = *common.expert_trajs;
    }
    if (config.expert_trajs <= 0) {
        throw Error("expert trajectory count must be positive");
    }
    return config;
}

std::vector<std::uint64_t> seeds_of(const Common& common, const ExperimentConfig& config) {
    if (common.seed) {
        return {*common.seed};
    }
    if (config.seeds.empty()) {
        throw Error("no seed given and the config lists none");
    }
    return config.seeds;
}

std::ofstream open_output(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    return out;
}

void describe_env(const ExperimentConfig& config) {
    const auto mdp = build_env(config.env);
    const auto expert = generate_expert(mdp, 1, config.expert_termination, 0);
    std::cout << "name " << mdp.name << "\n"
              << "states " << mdp.num_states << "\n"
              << "actions " << mdp.num_actions << "\n"
              << "gamma " << format_double(mdp.discount) << "\n"
              << "expert_return " << format_double(expert.expert_return) << "\n"
              << "random_return " << format_double(expert.random_return) << "\n";
}

void add_common(CLI::App* cmd, Common& common, bool with_seed, bool with_out) {
    cmd->add_option("--config", common.config_path, "Experiment config file")->check(CLI::ExistingFile);
    if (with_seed) {
        cmd->add_option("--seed", common.seed, "Random seed");
    }
    if (with_out) {
        cmd->add_option("--out", common.out, "Output path");
    }
    cmd->add_option("--expert-trajs", common.expert_trajs, "Number of expert trajectories");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boosted adversarial imitation learning on tabular MDPs"};
    app.require_subcommand(1);

    Common common;

    auto* env = app.add_subcommand("env", "Inspect the environment zoo");
    env->require_subcommand(1);
    env->add_subcommand("list", "List environment names");
    auto* env_show = env->add_subcommand("show", "Print the sizes and reference returns of the configured env");
    env_show->add_option("--config", common.config_path, "Experiment config file")->check(CLI::ExistingFile);

    auto* expert = app.add_subcommand("expert", "Expert demonstrations");
    expert->require_subcommand(1);
    auto* expert_gen = expert->add_subcommand("gen", "Generate and save a demonstration dataset");
    add_common(expert_gen, common, true, true);
    expert_gen->get_option("--seed")->required();
    expert_gen->get_option("--out")->required();

    auto* train = app.add_subcommand("train", "Train and write a metrics CSV");
    add_common(train, common, true, true);
    std::string algo;
    bool oracle_mode = false;
    std::string ensemble_out;
    train->add_option("--algo", algo, "Algorithm")->check(CLI::IsMember(algorithm_names()));
    train->add_flag("--oracle-mode", oracle_mode, "Closed-form discriminator and soft value iteration");
    train->add_option("--ensemble-out", ensemble_out, "Also save the final policy ensemble");

    auto* eval = app.add_subcommand("eval", "Evaluate a saved ensemble");
    add_common(eval, common, true, false);
    std::string ensemble_path;
    std::optional<int> episodes;
    eval->add_option("--ensemble", ensemble_path, "Ensemble file")->required()->check(CLI::ExistingFile);
    eval->add_option("--episodes", episodes, "Evaluation episodes");
    eval->get_option("--seed")->required();

    auto* sweep = app.add_subcommand("sweep", "Parameter sweeps");
    sweep->require_subcommand(1);
    auto* sweep_schedules_cmd = sweep->add_subcommand("schedules", "Run the four update-schedule presets");
    add_common(sweep_schedules_cmd, common, true, true);
    std::vector<std::uint64_t> sweep_seeds;
    sweep_schedules_cmd->add_option("--seeds", sweep_seeds, "Seeds to run")->delimiter(',');

    auto* verify = app.add_subcommand("verify", "Run the exact-oracle acceptance checks");
    bool verify_all = false;
    std::vector<int> verify_ids;
    verify->add_flag("--all", verify_all, "Include the learning-run criteria");
    verify->add_option("--criterion", verify_ids, "Run only these criteria");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (env->parsed()) {
            if (env->got_subcommand("list")) {
                for (const auto& name : env_names()) {
                    std::cout << name << "\n";
                }
            } else {
                describe_env(load(common));
            }
            return 0;
        }

        if (expert_gen->parsed()) {
            const auto config = load(common);
            const auto mdp = build_env(config.env);
            const auto bundle = generate_expert(mdp, config.expert_trajs, config.expert_termination, *common.seed);
            save_dataset(common.out, bundle.data);
            std::cerr << "wrote " << bundle.data.records.size() << " records to " << common.out << "\n";
            return 0;
        }

        if (train->parsed()) {
            auto config = load(common);
            if (!algo.empty()) {
                config.algorithm = algo;
            }
            if (oracle_mode) {
                config.algo.oracle_mode = true;
            }
            const std::string out_path = common.out.empty() ? config.output : common.out;
            const auto seeds = seeds_of(common, config);
            auto out = open_output(out_path);
            bool header = true;
            for (auto seed : seeds) {
                const auto run = run_experiment(config, seed);
                write_metrics(out, config.algorithm, config.env.name, seed, run.metrics, header);
                header = false;
                if (!ensemble_out.empty()) {
                    const std::string path =
                        seeds.size() == 1 ? ensemble_out : ensemble_out + ".seed" + std::to_string(seed);
                    save_ensemble(path, run.ensemble);
                }
            }
            return 0;
        }

        if (eval->parsed()) {
            const auto config = load(common);
            const auto mdp = build_env(config.env);
            const auto ensemble = load_ensemble(ensemble_path);
            if (ensemble.components.front().policy.num_states() != mdp.num_states ||
                ensemble.components.front().policy.num_actions() != mdp.num_actions) {
                throw Error("ensemble shape does not match the configured environment");
            }
            const auto expert = generate_expert(mdp, 1, config.expert_termination, 0);
            const int n = episodes ? *episodes : config.eval_episodes;
            if (n <= 0) {
                throw Error("episode count must be positive");
            }
            Rng rng(*common.seed);
            const auto mc = evaluate_ensemble(mdp, ensemble, *mdp.env_reward, static_cast<std::size_t>(n),
                                              Termination::fixed_horizon(config.eval_horizon), rng);
            const double exact = ensemble_return(mdp, ensemble, *mdp.env_reward);
            std::cout << "episodes " << mc.episodes << "\n"
                      << "horizon " << config.eval_horizon << "\n"
                      << "mean_return " << format_double(mc.mean_return) << "\n"
                      << "stderr_return " << format_double(mc.stderr_return) << "\n"
                      << "mean_discounted_return " << format_double(mc.mean_discounted_return) << "\n"
                      << "stderr_discounted_return " << format_double(mc.stderr_discounted_return) << "\n"
                      << "exact_discounted_return " << format_double(exact) << "\n"
                      << "normalized_score "
                      << format_double(normalized_score(exact, expert.expert_return, expert.random_return)) << "\n";
            return 0;
        }

        if (sweep_schedules_cmd->parsed()) {
            const auto config = load(common);
            std::vector<std::uint64_t> seeds = sweep_seeds;
            if (seeds.empty()) {
                seeds = seeds_of(common, config);
            }
            const std::string dir = common.out.empty() ? "sweep_schedules" : common.out;
            const auto cells = sweep_schedules(config, seeds, dir);
            int failures = 0;
            for (const auto& cell : cells) {
                if (!cell.error.empty()) {
                    std::cerr << cell.preset.name << " seed " << cell.seed << ": " << cell.error << "\n";
                    ++failures;
                    continue;
                }
                std::cout << cell.preset.name << " seed " << cell.seed << " final_score "
                          << format_double(cell.metrics.back().normalized_score) << " steps_to_0.8 "
                          << steps_to_threshold(cell.metrics, 0.8) << " -> " << cell.path << "\n";
            }
            return failures == 0 ? 0 : 1;
        }

        if (verify->parsed()) {
            std::vector<int> ids = verify_ids;
            if (ids.empty()) {
                for (const auto& c : acceptance::criteria()) {
                    if (verify_all || c.exact_oracle) {
                        ids.push_back(c.id);
                    }
                }
            }
            bool ok = true;
            for (int id : ids) {
                const auto result = acceptance::run_criterion(id);
                std::cout << acceptance::format_result(result) << std::endl;
                ok = ok && result.passed;
            }
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
