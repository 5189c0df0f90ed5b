#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ailboost/dataset.hpp"
#include "ailboost/divergence.hpp"
#include "ailboost/ensemble.hpp"
#include "ailboost/mdp.hpp"
#include "ailboost/replay.hpp"

namespace ailboost {

/// Which weights the replay buffer carries while the discriminator trains.
enum class BufferWeighting {
    /// Dataset D_i carries the current ensemble weight of pi_i, the policy that
    /// generated it (the newest dataset included).
    ensemble,
    /// Weights from before the newest policy was mixed in; the newest dataset
    /// gets weight zero. Ablation only.
    lagged,
};

/// Weak-learner reward used by the DAC-style baselines.
enum class DacReward {
    /// log(1 - D) - log D.
    logit,
    /// -log D.
    neg_log_d,
};

struct AilboostConfig {
    int rounds = 100;
    std::size_t samples_per_round = 1000;
    double mix_weight = 0.05;
    int disc_steps = 100;
    int policy_steps = 1000;
    double disc_lr = 1.0;
    std::size_t batch_size = 256;
    double temperature = 0.05;
    double clip = 10.0;
    double td_lr = 0.1;
    Termination termination = Termination::geometric();
    std::uint64_t seed = 0;
    /// Closed-form discriminator and full soft value iteration instead of SGD and TD.
    bool oracle_mode = false;
    int oracle_vi_iters = 2000;
    /// Continue discriminator ascent from the previous round's table.
    bool warm_start_discriminator = true;
    BufferWeighting weighting = BufferWeighting::ensemble;
    std::optional<std::size_t> max_components;
    /// Expert smoothing used only in the reverse-KL metric.
    double kl_smoothing = 1e-6;
    DacReward dac_reward = DacReward::logit;

    /// Throws Error on non-positive counts or an out-of-range mixing weight.
    void validate() const;
};

/// Expert and uniform-random returns used to normalize scores.
struct ScoreReference {
    double expert_return = 1.0;
    double random_return = 0.0;
};

struct IterationMetrics {
    int round = 0;
    std::int64_t env_steps = 0;
    double reverse_kl = 0.0;
    double disc_objective = 0.0;
    double mean_return = 0.0;
    double normalized_score = 0.0;
    /// <d_current - d_new, g>: nonnegative when the new policy is an exact
    /// maximizer of <d, -g>.
    double fw_gap = 0.0;
};

/// Raised when g, Q or the weights stop being finite. Carries the metrics of
/// the completed rounds.
class NonFiniteError : public Error {
public:
    NonFiniteError(const std::string& what, std::vector<IterationMetrics> partial)
        : Error(what), partial_(std::move(partial)) {}
    const std::vector<IterationMetrics>& partial_metrics() const { return partial_; }

private:
    std::vector<IterationMetrics> partial_;
};

/// State handed to an observer after each boosting round.
struct RoundSnapshot {
    int round = 0;
    const PolicyEnsemble* ensemble_before = nullptr;
    const PolicyEnsemble* ensemble_after = nullptr;
    const WeightedReplayBuffer* buffer = nullptr;
    const Discriminator* discriminator = nullptr;
    const MarkovPolicy* new_policy = nullptr;
    /// Mixture occupancy maintained by the (1 - alpha) d + alpha d_new update.
    const OccupancyMeasure* tracked_occupancy = nullptr;
};

using RoundObserver = std::function<void(const RoundSnapshot&)>;

struct AilboostResult {
    PolicyEnsemble ensemble;
    std::vector<IterationMetrics> metrics;
    /// Records the discriminator could draw from, per round.
    std::vector<std::size_t> discriminator_samples;
};

AilboostResult run_ailboost(const TabularMdp& mdp, const ExpertDataset& expert, const OccupancyMeasure& expert_occupancy,
                            const AilboostConfig& config, const ScoreReference& score,
                            const RoundObserver& observer = {});

struct WeakLearnerOptions {
    int steps = 1000;
    std::size_t batch_size = 256;
    double temperature = 0.05;
    double learning_rate = 0.1;
};

/// Tabular soft Q-learning on uniform buffer samples with rewards looked up in
/// `reward` at update time, so stored data is always relabeled with the latest
/// reward. Q starts from *q_state when it is non-empty, otherwise from
/// temperature * log(policy_init); the final Q is written back to q_state.
MarkovPolicy weak_learner_update(const TabularMdp& mdp, const MarkovPolicy& policy_init,
                                 const WeightedReplayBuffer& buffer, const RewardTable& reward,
                                 const WeakLearnerOptions& options, Rng& rng, StateActionTable* q_state = nullptr);

/// (mean - random) / (expert - random).
double normalized_score(double mean_return, double expert_return, double random_return);

}  // namespace ailboost
