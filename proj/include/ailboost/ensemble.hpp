#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ailboost/mdp.hpp"

namespace ailboost {

struct EnsembleComponent {
    double weight = 1.0;
    MarkovPolicy policy;
};

/// Weighted set of Markov policies. Executed by drawing one component per
/// episode and running it for the whole episode.
struct PolicyEnsemble {
    std::vector<EnsembleComponent> components;

    std::size_t size() const { return components.size(); }
    std::vector<double> weights() const;
};

PolicyEnsemble init_ensemble(const MarkovPolicy& policy);

/// Scales existing weights by (1 - mix_weight), appends new_policy with weight
/// mix_weight, then renormalizes. With max_components set, only the most recent
/// components are kept (and renormalized).
PolicyEnsemble mix_in(const PolicyEnsemble& ensemble, const MarkovPolicy& new_policy, double mix_weight,
                      std::optional<std::size_t> max_components = std::nullopt);

/// Throws Error unless weights are nonnegative and sum to 1 within 1e-12.
void require_valid_weights(const PolicyEnsemble& ensemble);

std::size_t sample_component(const PolicyEnsemble& ensemble, Rng& rng);

/// sum_i alpha_i d^{pi_i}.
OccupancyMeasure ensemble_occupancy(const TabularMdp& mdp, const PolicyEnsemble& ensemble);

struct EvaluationResult {
    /// Undiscounted per-episode reward sum. Under geometric termination this is
    /// an unbiased estimate of the discounted return.
    double mean_return = 0.0;
    double stderr_return = 0.0;
    /// Per-episode sum of discount^t r_t.
    double mean_discounted_return = 0.0;
    double stderr_discounted_return = 0.0;
    std::size_t episodes = 0;
};

EvaluationResult evaluate_ensemble(const TabularMdp& mdp, const PolicyEnsemble& ensemble, const RewardTable& reward,
                                   std::size_t n_episodes, const Termination& termination, Rng& rng);

/// Exact discounted return of the ensemble, <d^ensemble, r> / (1 - discount).
double ensemble_return(const TabularMdp& mdp, const PolicyEnsemble& ensemble, const RewardTable& reward);

}  // namespace ailboost
