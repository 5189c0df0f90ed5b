#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "ailboost/dataset.hpp"
#include "ailboost/envs.hpp"
#include "ailboost/mdp.hpp"
#include "ailboost/replay.hpp"

namespace fixtures {

using namespace ailboost;

inline constexpr int kStay = 0;
inline constexpr int kGo = 1;

inline MarkovPolicy always(int action, int num_states = 2, int num_actions = 2) {
    return MarkovPolicy::deterministic(std::vector<int>(num_states, action), num_actions);
}

/// r = 1 at state 1 for both actions.
inline RewardTable toggle_reward() {
    RewardTable r(2, 2);
    r(1, 0) = 1.0;
    r(1, 1) = 1.0;
    return r;
}

inline OccupancyMeasure occupancy_from(int num_states, int num_actions, const std::vector<double>& mass) {
    OccupancyMeasure d{StateActionTable(num_states, num_actions)};
    std::copy(mass.begin(), mass.end(), d.mass.values().begin());
    return d;
}

inline ExpertDataset expert_from(const std::vector<StateAction>& pairs) {
    ExpertDataset data;
    data.env_name = "fixture";
    data.discount = 0.9;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        data.records.push_back({0, static_cast<int>(i), pairs[i].state, pairs[i].action, 0.0, pairs[i].state, false});
    }
    return data;
}

inline TransitionDataset dataset_from(const std::vector<StateAction>& pairs, int round = 1) {
    TransitionDataset d;
    d.learner_round = round;
    for (auto p : pairs) {
        d.records.push_back({p.state, p.action, p.state, false});
    }
    return d;
}

/// Calls f on every deterministic policy of the MDP.
inline void for_each_deterministic(int num_states, int num_actions, const std::function<void(const MarkovPolicy&)>& f) {
    std::vector<int> actions(num_states, 0);
    while (true) {
        f(MarkovPolicy::deterministic(actions, num_actions));
        int s = 0;
        while (s < num_states && ++actions[s] == num_actions) {
            actions[s] = 0;
            ++s;
        }
        if (s == num_states) {
            return;
        }
    }
}

/// Value of every state under the best deterministic policy, found by
/// enumeration and policy evaluation. Independent of value iteration.
inline std::vector<double> enumerated_optimal_values(const TabularMdp& mdp, const RewardTable& reward) {
    std::vector<double> best(mdp.num_states, -std::numeric_limits<double>::infinity());
    for_each_deterministic(mdp.num_states, mdp.num_actions, [&](const MarkovPolicy& pi) {
        const auto v = policy_evaluation(mdp, pi, reward);
        for (int s = 0; s < mdp.num_states; ++s) {
            best[s] = std::max(best[s], v[s]);
        }
    });
    return best;
}

/// max over deterministic policies of <d^pi, r>.
inline double enumerated_best_alignment(const TabularMdp& mdp, const RewardTable& reward) {
    double best = -std::numeric_limits<double>::infinity();
    for_each_deterministic(mdp.num_states, mdp.num_actions, [&](const MarkovPolicy& pi) {
        best = std::max(best, inner_product(exact_occupancy(mdp, pi).mass, reward));
    });
    return best;
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += std::abs(p[i] - q[i]);
    }
    return 0.5 * acc;
}

/// Worst |count - n p| / sqrt(n p (1 - p)) over cells with 0 < p < 1; cells with
/// p in {0, 1} must match exactly or the result is +inf.
inline double worst_binomial_z(const std::vector<double>& counts, const std::vector<double>& probs, double n) {
    double worst = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double p = probs[i];
        if (p <= 0.0 || p >= 1.0) {
            if (counts[i] != p * n) {
                return std::numeric_limits<double>::infinity();
            }
            continue;
        }
        worst = std::max(worst, std::abs(counts[i] - n * p) / std::sqrt(n * p * (1.0 - p)));
    }
    return worst;
}

}  // namespace fixtures
