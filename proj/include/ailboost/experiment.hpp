#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ailboost/formats.hpp"

namespace ailboost {

/// Environment, demonstrations and normalization constants for one seed.
struct PreparedExperiment {
    TabularMdp mdp;
    ExpertBundle expert;
    ScoreReference score;
};

/// Demonstrations come from config.expert_dataset when set, otherwise they are
/// rolled out from the optimal policy with a seed derived from `seed`.
PreparedExperiment prepare_experiment(const ExperimentConfig& config, std::uint64_t seed);

struct RunOutput {
    std::vector<IterationMetrics> metrics;
    /// Single-component ensemble for the baselines.
    PolicyEnsemble ensemble;
};

RunOutput run_prepared(const ExperimentConfig& config, const PreparedExperiment& prepared, std::uint64_t seed);
RunOutput run_experiment(const ExperimentConfig& config, std::uint64_t seed);

/// Renders the metrics CSV of one run: the header followed by one row per round.
std::string metrics_csv(const ExperimentConfig& config, std::uint64_t seed, const RunOutput& run);

/// Policy updates and discriminator updates per round.
struct SchedulePreset {
    std::string name;
    int policy_steps = 0;
    int disc_steps = 0;
};

/// 1000/100, 1000/10, 1000/1 and 100/100.
std::vector<SchedulePreset> schedule_presets();

struct SweepCell {
    SchedulePreset preset;
    std::uint64_t seed = 0;
    std::string path;
    std::vector<IterationMetrics> metrics;
    std::string error;
};

/// Runs every (preset, seed) cell of `config`, in parallel when OpenMP is
/// available. Each cell writes its own CSV under `out_dir` when it is non-empty.
std::vector<SweepCell> sweep_schedules(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                                       const std::string& out_dir);

/// Environment samples consumed up to the first round whose normalized score
/// reaches `threshold`; -1 when it never does.
std::int64_t steps_to_threshold(const std::vector<IterationMetrics>& metrics, double threshold);

}  // namespace ailboost
