#pragma once

#include <string>
#include <vector>

#include "ailboost/dataset.hpp"
#include "ailboost/mdp.hpp"

namespace ailboost {

/// Parameters of one environment in the zoo.
///  - chain: `length` states in a row, actions {left, right}.
///  - gridworld: width x height, actions {up, down, left, right}, walls bounce.
///  - gridworld_slip: as gridworld; the intended move happens with probability
///    1 - slip, each perpendicular move with slip / 2.
/// The goal cell is absorbing and pays reward 1 for every action taken there.
struct EnvSpec {
    std::string name = "gridworld";
    int width = 5;
    int height = 5;
    int length = 5;
    double slip = 0.0;
    double discount = 0.99;
    int start = 0;
    /// Goal state index; -1 selects the last state.
    int goal = -1;

    bool operator==(const EnvSpec&) const = default;
};

std::vector<std::string> env_names();

TabularMdp build_env(const EnvSpec& spec);

/// Two states {0, 1}, actions {stay, go}: stay self-loops, go switches state.
/// Starts in state 0; reward 1 for any action in state 1.
TabularMdp toggle2(double discount = 0.5);

/// Dirichlet(1)-like random transitions and initial distribution; every
/// next-state row has full support. Reward uniform in [0, 1].
TabularMdp random_mdp(int num_states, int num_actions, double discount, Rng& rng);
MarkovPolicy random_policy(int num_states, int num_actions, Rng& rng);

struct ExpertBundle {
    ExpertDataset data;
    MarkovPolicy policy;
    OccupancyMeasure occupancy;
    double expert_return = 0.0;
    double random_return = 0.0;
};

/// Optimal policy for the environment reward (value iteration, lowest-index
/// ties), demonstrations rolled out from it, and exact expert and
/// uniform-random returns.
ExpertBundle generate_expert(const TabularMdp& mdp, int n_trajectories, const Termination& termination,
                             std::uint64_t seed);

}  // namespace ailboost
