#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ailboost/mdp.hpp"
#include "ailboost/replay.hpp"

namespace ailboost {

/// One logged environment step, as stored in dataset files.
struct LoggedStep {
    int episode = 0;
    int step = 0;
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;
    bool terminal = false;

    bool operator==(const LoggedStep&) const = default;
};

/// Demonstrations drawn from an expert's occupancy, with their provenance.
struct ExpertDataset {
    std::vector<LoggedStep> records;
    std::string env_name;
    double discount = 0.0;
    std::string source = "expert";
    std::uint64_t seed = 0;

    bool empty() const { return records.empty(); }
    std::vector<StateAction> pairs() const;
    /// Empirical distribution of the (s, a) pairs.
    StateActionTable empirical_distribution(int num_states, int num_actions) const;
};

/// Flattens trajectories into logged steps, numbering episodes from 0.
std::vector<LoggedStep> log_trajectories(const std::vector<Trajectory>& trajectories);

/// Checks indices against the MDP; throws Error on the first violation.
void require_within_bounds(const ExpertDataset& data, int num_states, int num_actions);

TransitionDataset to_transition_dataset(const std::vector<Step>& steps, int learner_round);

}  // namespace ailboost
