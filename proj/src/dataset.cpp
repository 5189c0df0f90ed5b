#include "ailboost/dataset.hpp"

namespace ailboost {

std::vector<StateAction> ExpertDataset::pairs() const {
    std::vector<StateAction> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back({r.state, r.action});
    }
    return out;
}

StateActionTable ExpertDataset::empirical_distribution(int num_states, int num_actions) const {
    if (records.empty()) {
        throw Error("expert dataset is empty");
    }
    StateActionTable dist(num_states, num_actions, 0.0);
    const double unit = 1.0 / static_cast<double>(records.size());
    for (const auto& r : records) {
        dist(r.state, r.action) += unit;
    }
    return dist;
}

std::vector<LoggedStep> log_trajectories(const std::vector<Trajectory>& trajectories) {
    std::vector<LoggedStep> out;
    for (std::size_t ep = 0; ep < trajectories.size(); ++ep) {
        const auto& steps = trajectories[ep].steps;
        for (std::size_t k = 0; k < steps.size(); ++k) {
            const auto& st = steps[k];
            out.push_back({static_cast<int>(ep), static_cast<int>(k), st.state, st.action, st.reward, st.next_state,
                           st.terminal});
        }
    }
    return out;
}

void require_within_bounds(const ExpertDataset& data, int num_states, int num_actions) {
    for (std::size_t i = 0; i < data.records.size(); ++i) {
        const auto& r = data.records[i];
        if (r.state < 0 || r.state >= num_states || r.next_state < 0 || r.next_state >= num_states ||
            r.action < 0 || r.action >= num_actions) {
            throw Error("dataset record " + std::to_string(i) + " has indices outside the MDP");
        }
    }
}

TransitionDataset to_transition_dataset(const std::vector<Step>& steps, int learner_round) {
    TransitionDataset out;
    out.learner_round = learner_round;
    out.records.reserve(steps.size());
    for (const auto& st : steps) {
        out.records.push_back({st.state, st.action, st.next_state, st.terminal});
    }
    return out;
}

}  // namespace ailboost
