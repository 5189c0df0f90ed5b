#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ailboost/kernels.hpp"
#include "ailboost/rng.hpp"
#include "ailboost/table.hpp"

namespace ailboost {

/// Finite discounted MDP. transition is stored dense as P[(s * A + a) * S + s'].
struct TabularMdp {
    std::string name;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> transition;
    double discount = 0.9;
    std::vector<double> init_dist;
    /// Environment reward. Used for experts and evaluation only.
    std::optional<RewardTable> env_reward;

    double prob(int s, int a, int next) const {
        return transition[(static_cast<std::size_t>(s) * num_actions + a) * num_states + next];
    }
    std::span<const double> next_dist(int s, int a) const {
        return {transition.data() + (static_cast<std::size_t>(s) * num_actions + a) * num_states,
                static_cast<std::size_t>(num_states)};
    }
};

struct MarkovPolicy {
    StateActionTable probs;

    static MarkovPolicy uniform(int num_states, int num_actions);
    /// One-hot policy choosing actions[s] at state s.
    static MarkovPolicy deterministic(const std::vector<int>& actions, int num_actions);

    int num_states() const { return probs.num_states(); }
    int num_actions() const { return probs.num_actions(); }
    double operator()(int s, int a) const { return probs(s, a); }
};

struct OccupancyMeasure {
    StateActionTable mass;

    double operator()(int s, int a) const { return mass(s, a); }
};

struct Step {
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;
    bool terminal = false;

    bool operator==(const Step&) const = default;
};

struct Trajectory {
    std::vector<Step> steps;

    std::size_t size() const { return steps.size(); }
};

struct ValueSolution {
    StateActionTable q_values;
    std::vector<double> v_values;
    MarkovPolicy policy;
    /// Sup-norm change of V per sweep, in order.
    std::vector<double> residuals;
};

struct Violation {
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

ValidationReport validate_mdp(const TabularMdp& mdp);
ValidationReport validate_policy(const MarkovPolicy& policy, int num_states, int num_actions);

/// Throws Error carrying the report summary when the MDP is invalid.
void require_valid(const TabularMdp& mdp);
void require_valid(const TabularMdp& mdp, const MarkovPolicy& policy);

/// Raised when an iterative solver stops before reaching its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

struct OccupancyOptions {
    /// Direct solve when S * A is at most this size, fixed-point iteration otherwise.
    std::size_t direct_solve_limit = 10000;
    double tolerance = 1e-12;
    int max_iterations = 1000000;
    /// Relaxation factor of the fixed-point sweep; 1 is the undamped map.
    double damping = 1.0;
    Exec exec = Exec::parallel;
};

/// Discounted state-action occupancy of a Markov policy.
OccupancyMeasure exact_occupancy(const TabularMdp& mdp, const MarkovPolicy& policy,
                                 const OccupancyOptions& options = {});

/// Max over (s, a) of |d(s,a) - (1-g) mu0(s) pi(a|s) - g pi(a|s) sum P(s|s',a') d(s',a')|.
double flow_residual(const TabularMdp& mdp, const MarkovPolicy& policy,
                     const OccupancyMeasure& occupancy);

struct Termination {
    enum class Mode { geometric, horizon };
    Mode mode = Mode::geometric;
    int horizon = 500;

    static Termination geometric() { return {}; }
    static Termination fixed_horizon(int h) { return {Mode::horizon, h}; }
};

/// Samples one episode. In geometric mode each step ends the episode with
/// probability 1 - discount, so visited pairs are draws from d^pi.
Trajectory rollout(const TabularMdp& mdp, const MarkovPolicy& policy, const Termination& termination,
                   Rng& rng);

/// Rolls out whole episodes until exactly `count` steps are collected; the
/// last episode is truncated and its final step flagged terminal.
std::vector<Step> collect_steps(const TabularMdp& mdp, const MarkovPolicy& policy,
                                const Termination& termination, std::size_t count, Rng& rng);

/// Optimal values by synchronous value iteration. Greedy ties go to the lowest action.
ValueSolution value_iteration(const TabularMdp& mdp, const RewardTable& reward, double tol,
                              Exec exec = Exec::parallel);

/// Entropy-regularized backups V(s) = tau * log sum_a exp(Q(s,a) / tau), run `iters`
/// times from `warm_start` (zero when absent). Policy is softmax(Q / tau).
ValueSolution soft_value_iteration(const TabularMdp& mdp, const RewardTable& reward, double temperature,
                                   int iters, const StateActionTable* warm_start = nullptr,
                                   Exec exec = Exec::parallel);

/// Expected discounted return, <d^pi, r> / (1 - discount).
double policy_return(const TabularMdp& mdp, const MarkovPolicy& policy, const RewardTable& reward);

/// V^pi from the policy-evaluation linear system (I - g P_pi) V = r_pi.
std::vector<double> policy_evaluation(const TabularMdp& mdp, const MarkovPolicy& policy,
                                      const RewardTable& reward);

/// Softmax of q / temperature per state, shifted by the row max.
MarkovPolicy softmax_policy(const StateActionTable& q, double temperature);

}  // namespace ailboost
