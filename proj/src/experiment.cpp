#include "ailboost/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ailboost/baselines.hpp"
#include "ailboost/numfmt.hpp"

namespace ailboost {

namespace {

constexpr std::uint64_t kExpertStream = 10;

}  // namespace

PreparedExperiment prepare_experiment(const ExperimentConfig& config, std::uint64_t seed) {
    PreparedExperiment p;
    p.mdp = build_env(config.env);
    if (config.expert_dataset.empty()) {
        p.expert = generate_expert(p.mdp, config.expert_trajs, config.expert_termination,
                                   derive_seed(seed, kExpertStream));
    } else {
        // Only the statistics are needed; one short rollout keeps generate_expert's checks.
        p.expert = generate_expert(p.mdp, 1, Termination::fixed_horizon(1), 0);
        p.expert.data = load_dataset(config.expert_dataset);
        if (p.expert.data.env_name != p.mdp.name) {
            throw Error("expert dataset was recorded on '" + p.expert.data.env_name + "', config selects '" +
                        p.mdp.name + "'");
        }
        if (p.expert.data.discount != p.mdp.discount) {
            throw Error("expert dataset discount " + format_double(p.expert.data.discount) +
                        " does not match the environment's " + format_double(p.mdp.discount));
        }
        if (p.expert.data.empty()) {
            throw Error("expert dataset '" + config.expert_dataset + "' has no records");
        }
        require_within_bounds(p.expert.data, p.mdp.num_states, p.mdp.num_actions);
    }
    p.score = {p.expert.expert_return, p.expert.random_return};
    return p;
}

RunOutput run_prepared(const ExperimentConfig& config, const PreparedExperiment& p, std::uint64_t seed) {
    AilboostConfig algo = config.algo;
    algo.seed = seed;
    RunOutput out;
    if (config.algorithm == "ailboost") {
        auto r = run_ailboost(p.mdp, p.expert.data, p.expert.occupancy, algo, p.score);
        out.metrics = std::move(r.metrics);
        out.ensemble = std::move(r.ensemble);
        return out;
    }
    BaselineResult r;
    if (config.algorithm == "dac") {
        r = run_dac(p.mdp, p.expert.data, p.expert.occupancy, algo, p.score);
    } else if (config.algorithm == "gail") {
        r = run_gail_onpolicy(p.mdp, p.expert.data, p.expert.occupancy, algo, p.score);
    } else if (config.algorithm == "bc") {
        r = run_behavior_cloning(p.mdp, p.expert.data, p.expert.occupancy, config.bc_smoothing, algo.kl_smoothing,
                                 p.score);
    } else {
        throw Error("unknown algorithm '" + config.algorithm + "'");
    }
    out.metrics = std::move(r.metrics);
    out.ensemble = init_ensemble(r.policy);
    return out;
}

RunOutput run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
    return run_prepared(config, prepare_experiment(config, seed), seed);
}

std::string metrics_csv(const ExperimentConfig& config, std::uint64_t seed, const RunOutput& run) {
    std::ostringstream out;
    write_metrics(out, config.algorithm, config.env.name, seed, run.metrics);
    return out.str();
}

std::vector<SchedulePreset> schedule_presets() {
    return {
        {"policy1000_disc100", 1000, 100},
        {"policy1000_disc10", 1000, 10},
        {"policy1000_disc1", 1000, 1},
        {"policy100_disc100", 100, 100},
    };
}

std::vector<SweepCell> sweep_schedules(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                                       const std::string& out_dir) {
    if (seeds.empty()) {
        throw Error("sweep: seed list is empty");
    }
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
    }
    std::vector<SweepCell> cells;
    for (const auto& preset : schedule_presets()) {
        for (auto seed : seeds) {
            SweepCell cell;
            cell.preset = preset;
            cell.seed = seed;
            if (!out_dir.empty()) {
                cell.path = (std::filesystem::path(out_dir) /
                             (preset.name + "_seed" + std::to_string(seed) + ".csv"))
                                .string();
            }
            cells.push_back(std::move(cell));
        }
    }
    const long n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
        SweepCell& cell = cells[static_cast<std::size_t>(i)];
        try {
            ExperimentConfig c = config;
            c.algorithm = "ailboost";
            c.algo.policy_steps = cell.preset.policy_steps;
            c.algo.disc_steps = cell.preset.disc_steps;
            const RunOutput run = run_experiment(c, cell.seed);
            cell.metrics = run.metrics;
            if (!cell.path.empty()) {
                std::ofstream file(cell.path, std::ios::binary);
                if (!file) {
                    throw Error("cannot write '" + cell.path + "'");
                }
                write_metrics(file, c.algorithm, c.env.name, cell.seed, run.metrics);
            }
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    }
    return cells;
}

std::int64_t steps_to_threshold(const std::vector<IterationMetrics>& metrics, double threshold) {
    for (const auto& m : metrics) {
        if (m.normalized_score >= threshold) {
            return m.env_steps;
        }
    }
    return -1;
}

}  // namespace ailboost
