#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ailboost/boost.hpp"
#include "ailboost/dataset.hpp"
#include "ailboost/ensemble.hpp"
#include "ailboost/envs.hpp"

namespace ailboost {

/// Everything one `train` invocation needs.
struct ExperimentConfig {
    EnvSpec env;
    std::string algorithm = "ailboost";
    AilboostConfig algo;
    double bc_smoothing = 0.0;
    int expert_trajs = 10;
    Termination expert_termination = Termination::fixed_horizon(100);
    std::vector<std::uint64_t> seeds = {1};
    std::string output = "metrics.csv";
    /// Optional path to a dataset file; demonstrations are generated when empty.
    std::string expert_dataset;
    int eval_episodes = 1000;
    int eval_horizon = 200;
};

std::vector<std::string> algorithm_names();

/// Line-oriented `key = value` text with `[section]` headers and `#` comments.
/// Unknown sections or keys, duplicate keys and malformed values throw Error.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical text listing every key; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);

/// Header `version=1 env=<name> gamma=<g> records=<n>`, then one line per
/// record: `episode step s a r s_next done`.
void write_dataset(std::ostream& out, const ExpertDataset& data);
ExpertDataset read_dataset(std::istream& in);
void save_dataset(const std::string& path, const ExpertDataset& data);
ExpertDataset load_dataset(const std::string& path);

/// Header `version=1 components=<n> states=<S> actions=<A>`, then per
/// component a line `alpha=<w>` followed by S rows of A probabilities.
void write_ensemble(std::ostream& out, const PolicyEnsemble& ensemble);
PolicyEnsemble read_ensemble(std::istream& in);
void save_ensemble(const std::string& path, const PolicyEnsemble& ensemble);
PolicyEnsemble load_ensemble(const std::string& path);

inline constexpr const char* kMetricsHeader =
    "algo,env,seed,round,env_steps,reverse_kl,disc_objective,mean_return,normalized_score,fw_gap";

std::string metrics_row(const std::string& algo, const std::string& env, std::uint64_t seed,
                        const IterationMetrics& m);

/// Writes the header, then each row in a single write followed by a flush, so an
/// interrupted run leaves only complete rows.
void write_metrics(std::ostream& out, const std::string& algo, const std::string& env, std::uint64_t seed,
                   const std::vector<IterationMetrics>& metrics, bool with_header = true);

struct MetricsRow {
    std::string algo;
    std::string env;
    std::uint64_t seed = 0;
    IterationMetrics metrics;
};

/// Parses a metrics CSV, rejecting rows that do not match the header.
std::vector<MetricsRow> read_metrics(std::istream& in);

}  // namespace ailboost
