#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ailboost/rng.hpp"
#include "ailboost/table.hpp"

namespace ailboost {

struct Transition {
    int state = 0;
    int action = 0;
    int next_state = 0;
    bool terminal = false;

    bool operator==(const Transition&) const = default;
};

/// Samples gathered from one weak learner.
struct TransitionDataset {
    std::vector<Transition> records;
    int learner_round = 0;
};

struct RecordRef {
    std::size_t dataset = 0;
    std::size_t record = 0;
};

/// Keeps every dataset ever collected, each weighted by the ensemble weight of
/// the policy that generated it. Appending invalidates the weights until the
/// next set_weights call; weighted reads fail while they are stale.
class WeightedReplayBuffer {
public:
    void append_dataset(TransitionDataset dataset);
    void set_weights(std::span<const double> weights);
    void clear();

    bool stale() const { return stale_; }
    bool empty() const { return datasets_.empty(); }
    std::size_t dataset_count() const { return datasets_.size(); }
    std::size_t record_count() const { return record_count_; }
    const std::vector<TransitionDataset>& datasets() const { return datasets_; }
    const std::vector<double>& weights() const { return weights_; }
    const Transition& at(RecordRef ref) const { return datasets_[ref.dataset].records[ref.record]; }

    /// Dataset i with probability alpha_i, then a uniform record inside it.
    std::vector<RecordRef> sample_weighted_refs(std::size_t batch_size, Rng& rng) const;
    std::vector<StateAction> sample_weighted(std::size_t batch_size, Rng& rng) const;

    /// Uniform over the union of all records; ignores the weights.
    std::vector<RecordRef> sample_uniform_refs(std::size_t batch_size, Rng& rng) const;
    std::vector<Transition> sample_uniform(std::size_t batch_size, Rng& rng) const;

    /// sum_i alpha_i * mean_{(s,a) in D_i} f(s,a).
    double weighted_expectation(const std::function<double(int, int)>& f) const;

    /// Per-cell mass of the weighted empirical distribution sum_i alpha_i Uniform(D_i).
    StateActionTable weighted_distribution(int num_states, int num_actions) const;
    /// Per-cell mass of the uniform distribution over all records.
    StateActionTable uniform_distribution(int num_states, int num_actions) const;

private:
    void require_fresh() const;

    std::vector<TransitionDataset> datasets_;
    std::vector<double> weights_;
    std::vector<double> weight_cdf_;
    std::vector<std::size_t> size_prefix_;
    std::size_t record_count_ = 0;
    bool stale_ = false;
};

}  // namespace ailboost
