#include "ailboost/replay.hpp"

#include <algorithm>
#include <cmath>

#include "ailboost/numfmt.hpp"

namespace ailboost {

void WeightedReplayBuffer::append_dataset(TransitionDataset dataset) {
    if (dataset.records.empty()) {
        throw Error("append_dataset: dataset is empty");
    }
    record_count_ += dataset.records.size();
    size_prefix_.push_back(record_count_);
    datasets_.push_back(std::move(dataset));
    stale_ = true;
}

void WeightedReplayBuffer::set_weights(std::span<const double> weights) {
    if (weights.size() != datasets_.size()) {
        throw Error("set_weights: got " + std::to_string(weights.size()) + " weights for " +
                    std::to_string(datasets_.size()) + " datasets");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw Error("set_weights: invalid weight " + format_double(w));
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw Error("set_weights: weights sum to " + format_double(sum) + " != 1");
    }
    weights_.assign(weights.begin(), weights.end());
    weight_cdf_.resize(weights_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        acc += weights_[i];
        weight_cdf_[i] = acc;
    }
    stale_ = false;
}

void WeightedReplayBuffer::clear() {
    datasets_.clear();
    weights_.clear();
    weight_cdf_.clear();
    size_prefix_.clear();
    record_count_ = 0;
    stale_ = false;
}

void WeightedReplayBuffer::require_fresh() const {
    if (datasets_.empty()) {
        throw Error("replay buffer is empty");
    }
    if (stale_) {
        throw Error("weights not synchronized: call set_weights after append_dataset");
    }
}

std::vector<RecordRef> WeightedReplayBuffer::sample_weighted_refs(std::size_t batch_size, Rng& rng) const {
    if (batch_size == 0) {
        throw Error("sample_weighted: batch_size must be positive");
    }
    require_fresh();
    std::vector<RecordRef> out;
    out.reserve(batch_size);
    const double total = weight_cdf_.back();
    for (std::size_t k = 0; k < batch_size; ++k) {
        const double u = rng.uniform() * total;
        auto it = std::upper_bound(weight_cdf_.begin(), weight_cdf_.end(), u);
        std::size_t i = static_cast<std::size_t>(it - weight_cdf_.begin());
        // Rounding can push u to the very top; step back onto positive mass.
        i = std::min(i, weights_.size() - 1);
        while (weights_[i] == 0.0) {
            --i;
        }
        out.push_back({i, rng.uniform_index(datasets_[i].records.size())});
    }
    return out;
}

std::vector<StateAction> WeightedReplayBuffer::sample_weighted(std::size_t batch_size, Rng& rng) const {
    std::vector<StateAction> out;
    out.reserve(batch_size);
    for (auto ref : sample_weighted_refs(batch_size, rng)) {
        const auto& t = at(ref);
        out.push_back({t.state, t.action});
    }
    return out;
}

std::vector<RecordRef> WeightedReplayBuffer::sample_uniform_refs(std::size_t batch_size, Rng& rng) const {
    if (batch_size == 0) {
        throw Error("sample_uniform: batch_size must be positive");
    }
    if (datasets_.empty()) {
        throw Error("replay buffer is empty");
    }
    std::vector<RecordRef> out;
    out.reserve(batch_size);
    for (std::size_t k = 0; k < batch_size; ++k) {
        const std::size_t flat = rng.uniform_index(record_count_);
        auto it = std::upper_bound(size_prefix_.begin(), size_prefix_.end(), flat);
        const auto i = static_cast<std::size_t>(it - size_prefix_.begin());
        const std::size_t start = i == 0 ? 0 : size_prefix_[i - 1];
        out.push_back({i, flat - start});
    }
    return out;
}

std::vector<Transition> WeightedReplayBuffer::sample_uniform(std::size_t batch_size, Rng& rng) const {
    std::vector<Transition> out;
    out.reserve(batch_size);
    for (auto ref : sample_uniform_refs(batch_size, rng)) {
        out.push_back(at(ref));
    }
    return out;
}

double WeightedReplayBuffer::weighted_expectation(const std::function<double(int, int)>& f) const {
    require_fresh();
    double acc = 0.0;
    for (std::size_t i = 0; i < datasets_.size(); ++i) {
        if (weights_[i] == 0.0) {
            continue;
        }
        double sum = 0.0;
        for (const auto& t : datasets_[i].records) {
            sum += f(t.state, t.action);
        }
        acc += weights_[i] * (sum / static_cast<double>(datasets_[i].records.size()));
    }
    return acc;
}

StateActionTable WeightedReplayBuffer::weighted_distribution(int num_states, int num_actions) const {
    require_fresh();
    StateActionTable dist(num_states, num_actions, 0.0);
    for (std::size_t i = 0; i < datasets_.size(); ++i) {
        const double unit = weights_[i] / static_cast<double>(datasets_[i].records.size());
        for (const auto& t : datasets_[i].records) {
            dist(t.state, t.action) += unit;
        }
    }
    return dist;
}

StateActionTable WeightedReplayBuffer::uniform_distribution(int num_states, int num_actions) const {
    if (datasets_.empty()) {
        throw Error("replay buffer is empty");
    }
    StateActionTable dist(num_states, num_actions, 0.0);
    const double unit = 1.0 / static_cast<double>(record_count_);
    for (const auto& d : datasets_) {
        for (const auto& t : d.records) {
            dist(t.state, t.action) += unit;
        }
    }
    return dist;
}

}  // namespace ailboost
