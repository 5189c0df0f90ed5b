#pragma once

#include <cstddef>
#include <vector>

#include "ailboost/dataset.hpp"
#include "ailboost/mdp.hpp"
#include "ailboost/replay.hpp"

namespace ailboost {

/// Witness table g(s,a), held inside [-clip, clip].
struct Discriminator {
    StateActionTable g;
    double clip = 10.0;
};

/// Reverse KL value; `infinite` is set when d has mass where the (smoothed)
/// expert occupancy has none, in which case `value` is +inf.
struct KlValue {
    double value = 0.0;
    bool infinite = false;
};

/// KL(d || (1 - eps) d_e + eps * uniform).
KlValue reverse_kl(const OccupancyMeasure& d, const OccupancyMeasure& d_expert, double smoothing);

/// Clipped log density ratio ln(d / d_e), the maximizer of the variational
/// objective. Cells with d_e = 0 < d are pinned at +clip, cells with d = 0 at -clip.
Discriminator optimal_discriminator(const OccupancyMeasure& d, const OccupancyMeasure& d_expert, double clip);

/// E_{d_e}[-exp(g)] + E_d[g]. Its maximum over g is KL(d || d_e) - 1.
double variational_objective(const Discriminator& disc, const OccupancyMeasure& d, const OccupancyMeasure& d_expert);

/// Finite-sample objective: mean over expert pairs of -exp(g) plus the
/// weighted buffer expectation of g.
double empirical_variational_objective(const Discriminator& disc, const ExpertDataset& expert,
                                       const WeightedReplayBuffer& buffer);

/// Full-batch gradient of the empirical objective with respect to each g(s,a).
StateActionTable empirical_objective_gradient(const Discriminator& disc, const ExpertDataset& expert,
                                              const WeightedReplayBuffer& buffer);

struct DiscriminatorTraining {
    int steps = 100;
    double learning_rate = 1.0;
    /// Samples per side per step; 0 selects deterministic full-batch ascent.
    std::size_t batch_size = 256;
    double clip = 10.0;
};

/// Gradient ascent on the empirical objective, starting from `warm_start`
/// (zeros when absent). Entries are clipped after every step. When `trace` is
/// given it receives the full-batch objective before the first and after every step.
Discriminator train_discriminator(const ExpertDataset& expert, const WeightedReplayBuffer& buffer, int num_states,
                                  int num_actions, const DiscriminatorTraining& options, Rng& rng,
                                  const Discriminator* warm_start = nullptr, std::vector<double>* trace = nullptr);

/// Weak-learner reward -g.
RewardTable discriminator_reward(const Discriminator& disc);

}  // namespace ailboost
