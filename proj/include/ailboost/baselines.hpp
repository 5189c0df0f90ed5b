#pragma once

#include <vector>

#include "ailboost/boost.hpp"

namespace ailboost {

/// Logistic classifier table: D(s,a) = sigmoid(logits(s,a)), logits held in [-clip, clip].
struct BinaryDiscriminator {
    StateActionTable logits;
    double clip = 10.0;

    double probability(int s, int a) const;
};

/// Full-batch value of E_buffer[log D] + E_expert[log(1 - D)] given the two
/// empirical distributions as tables.
double dac_objective(const BinaryDiscriminator& disc, const StateActionTable& buffer_dist,
                     const StateActionTable& expert_dist);
StateActionTable dac_objective_gradient(const BinaryDiscriminator& disc, const StateActionTable& buffer_dist,
                                        const StateActionTable& expert_dist);

/// Gradient ascent on the logistic objective with uniform buffer sampling
/// (batch_size 0 selects full batch).
BinaryDiscriminator train_binary_discriminator(const ExpertDataset& expert, const WeightedReplayBuffer& buffer,
                                               int num_states, int num_actions, const DiscriminatorTraining& options,
                                               Rng& rng, const BinaryDiscriminator* warm_start = nullptr);

RewardTable dac_reward(const BinaryDiscriminator& disc, DacReward form);

/// Smoothed empirical conditional (count(s,a) + k) / (count(s) + k A); unseen states uniform.
MarkovPolicy behavior_cloning(const ExpertDataset& expert, int num_states, int num_actions, double smoothing);

struct BaselineResult {
    MarkovPolicy policy;
    std::vector<IterationMetrics> metrics;
    std::vector<std::size_t> discriminator_samples;
};

/// Same loop as run_ailboost, but the discriminator is a logistic classifier on
/// the unweighted buffer and the output is the single latest policy.
BaselineResult run_dac(const TabularMdp& mdp, const ExpertDataset& expert, const OccupancyMeasure& expert_occupancy,
                       const AilboostConfig& config, const ScoreReference& score);

/// DAC loop whose discriminator and weak learner only see the newest dataset.
BaselineResult run_gail_onpolicy(const TabularMdp& mdp, const ExpertDataset& expert,
                                 const OccupancyMeasure& expert_occupancy, const AilboostConfig& config,
                                 const ScoreReference& score);

/// Single-row metrics for a behavior-cloned policy.
BaselineResult run_behavior_cloning(const TabularMdp& mdp, const ExpertDataset& expert,
                                    const OccupancyMeasure& expert_occupancy, double smoothing,
                                    double kl_smoothing, const ScoreReference& score);

}  // namespace ailboost
