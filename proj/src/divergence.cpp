#include "ailboost/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ailboost {

namespace {

void require_same_shape(const OccupancyMeasure& d, const OccupancyMeasure& d_expert) {
    if (!d.mass.same_shape(d_expert.mass)) {
        throw Error("occupancy shapes differ");
    }
}

double full_batch_objective(const StateActionTable& g, const StateActionTable& p, const StateActionTable& q) {
    double acc = 0.0;
    auto gv = g.values();
    auto pv = p.values();
    auto qv = q.values();
    for (std::size_t i = 0; i < gv.size(); ++i) {
        acc += pv[i] * gv[i] - qv[i] * std::exp(gv[i]);
    }
    return acc;
}

}  // namespace

KlValue reverse_kl(const OccupancyMeasure& d, const OccupancyMeasure& d_expert, double smoothing) {
    require_same_shape(d, d_expert);
    if (!(smoothing >= 0.0 && smoothing <= 1.0)) {
        throw Error("reverse_kl: smoothing must lie in [0,1]");
    }
    auto dv = d.mass.values();
    auto ev = d_expert.mass.values();
    const double uniform = 1.0 / static_cast<double>(dv.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < dv.size(); ++i) {
        if (dv[i] <= 0.0) {
            continue;
        }
        const double target = (1.0 - smoothing) * ev[i] + smoothing * uniform;
        if (target <= 0.0) {
            return {std::numeric_limits<double>::infinity(), true};
        }
        acc += dv[i] * std::log(dv[i] / target);
    }
    return {acc, false};
}

Discriminator optimal_discriminator(const OccupancyMeasure& d, const OccupancyMeasure& d_expert, double clip) {
    require_same_shape(d, d_expert);
    if (!(clip > 0.0)) {
        throw Error("optimal_discriminator: clip must be positive");
    }
    Discriminator disc{StateActionTable(d.mass.num_states(), d.mass.num_actions()), clip};
    auto dv = d.mass.values();
    auto ev = d_expert.mass.values();
    auto gv = disc.g.values();
    for (std::size_t i = 0; i < gv.size(); ++i) {
        if (dv[i] <= 0.0) {
            gv[i] = -clip;
        } else if (ev[i] <= 0.0) {
            gv[i] = clip;
        } else {
            gv[i] = std::clamp(std::log(dv[i] / ev[i]), -clip, clip);
        }
    }
    return disc;
}

double variational_objective(const Discriminator& disc, const OccupancyMeasure& d, const OccupancyMeasure& d_expert) {
    require_same_shape(d, d_expert);
    return full_batch_objective(disc.g, d.mass, d_expert.mass);
}

double empirical_variational_objective(const Discriminator& disc, const ExpertDataset& expert,
                                       const WeightedReplayBuffer& buffer) {
    if (expert.empty()) {
        throw Error("empirical_variational_objective: expert dataset is empty");
    }
    double expert_term = 0.0;
    for (const auto& r : expert.records) {
        expert_term -= std::exp(disc.g(r.state, r.action));
    }
    expert_term /= static_cast<double>(expert.records.size());
    const double buffer_term = buffer.weighted_expectation([&](int s, int a) { return disc.g(s, a); });
    return expert_term + buffer_term;
}

StateActionTable empirical_objective_gradient(const Discriminator& disc, const ExpertDataset& expert,
                                              const WeightedReplayBuffer& buffer) {
    const int S = disc.g.num_states();
    const int A = disc.g.num_actions();
    const auto p = buffer.weighted_distribution(S, A);
    const auto q = expert.empirical_distribution(S, A);
    StateActionTable grad(S, A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            grad(s, a) = p(s, a) - q(s, a) * std::exp(disc.g(s, a));
        }
    }
    return grad;
}

Discriminator train_discriminator(const ExpertDataset& expert, const WeightedReplayBuffer& buffer, int num_states,
                                  int num_actions, const DiscriminatorTraining& options, Rng& rng,
                                  const Discriminator* warm_start, std::vector<double>* trace) {
    if (expert.empty()) {
        throw Error("train_discriminator: expert dataset is empty");
    }
    if (buffer.empty()) {
        throw Error("train_discriminator: replay buffer is empty");
    }
    if (options.steps < 0 || !(options.clip > 0.0)) {
        throw Error("train_discriminator: invalid options");
    }
    Discriminator disc{StateActionTable(num_states, num_actions, 0.0), options.clip};
    if (warm_start) {
        if (!warm_start->g.same_shape(disc.g)) {
            throw Error("train_discriminator: warm start shape mismatch");
        }
        disc.g = warm_start->g;
    }
    const auto p = buffer.weighted_distribution(num_states, num_actions);
    const auto q = expert.empirical_distribution(num_states, num_actions);
    if (trace) {
        trace->push_back(full_batch_objective(disc.g, p, q));
    }
    auto clip_all = [&] {
        for (double& x : disc.g.values()) {
            x = std::clamp(x, -options.clip, options.clip);
        }
    };

    const auto expert_pairs = expert.pairs();
    StateActionTable grad(num_states, num_actions);
    for (int step = 0; step < options.steps; ++step) {
        if (options.batch_size == 0) {
            auto gv = disc.g.values();
            auto pv = p.values();
            auto qv = q.values();
            for (std::size_t i = 0; i < gv.size(); ++i) {
                gv[i] += options.learning_rate * (pv[i] - qv[i] * std::exp(gv[i]));
            }
        } else {
            std::fill(grad.values().begin(), grad.values().end(), 0.0);
            const double unit = 1.0 / static_cast<double>(options.batch_size);
            for (std::size_t k = 0; k < options.batch_size; ++k) {
                const auto& e = expert_pairs[rng.uniform_index(expert_pairs.size())];
                grad(e.state, e.action) -= unit * std::exp(disc.g(e.state, e.action));
            }
            for (const auto& sa : buffer.sample_weighted(options.batch_size, rng)) {
                grad(sa.state, sa.action) += unit;
            }
            auto gv = disc.g.values();
            auto dv = grad.values();
            for (std::size_t i = 0; i < gv.size(); ++i) {
                gv[i] += options.learning_rate * dv[i];
            }
        }
        clip_all();
        if (trace) {
            trace->push_back(full_batch_objective(disc.g, p, q));
        }
    }
    return disc;
}

RewardTable discriminator_reward(const Discriminator& disc) {
    RewardTable reward = disc.g;
    for (double& x : reward.values()) {
        x = -x;
    }
    return reward;
}

}  // namespace ailboost
