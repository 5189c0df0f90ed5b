#include "ailboost/mdp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ailboost/numfmt.hpp"

namespace ailboost {

namespace {

constexpr double kSimplexTol = 1e-12;

std::string at(int s, int a) {
    return "(s=" + std::to_string(s) + ",a=" + std::to_string(a) + ")";
}

std::vector<double> build_policy_transition(const TabularMdp& mdp, const MarkovPolicy& policy, Exec exec) {
    std::vector<double> p_pi(static_cast<std::size_t>(mdp.num_states) * mdp.num_states);
    kernels::policy_transition({mdp.num_states, mdp.num_actions}, mdp.transition, policy.probs.values(),
                               p_pi, exec);
    return p_pi;
}

void check_reward_shape(const TabularMdp& mdp, const RewardTable& reward) {
    if (reward.num_states() != mdp.num_states || reward.num_actions() != mdp.num_actions) {
        throw Error("reward table shape does not match the MDP");
    }
}

}  // namespace

std::string ValidationReport::summary() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i > 0) {
            out << "; ";
        }
        out << violations[i].message;
    }
    return out.str();
}

MarkovPolicy MarkovPolicy::uniform(int num_states, int num_actions) {
    return {StateActionTable(num_states, num_actions, 1.0 / num_actions)};
}

MarkovPolicy MarkovPolicy::deterministic(const std::vector<int>& actions, int num_actions) {
    MarkovPolicy policy{StateActionTable(static_cast<int>(actions.size()), num_actions, 0.0)};
    for (std::size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] < 0 || actions[s] >= num_actions) {
            throw Error("deterministic policy: action index out of range");
        }
        policy.probs(static_cast<int>(s), actions[s]) = 1.0;
    }
    return policy;
}

ValidationReport validate_mdp(const TabularMdp& mdp) {
    ValidationReport report;
    auto add = [&report](std::string msg) { report.violations.push_back({std::move(msg)}); };

    if (mdp.num_states <= 0) {
        add("num_states must be positive");
    }
    if (mdp.num_actions <= 0) {
        add("num_actions must be positive");
    }
    if (!(mdp.discount > 0.0 && mdp.discount < 1.0)) {
        add("discount not in open interval (0,1): " + format_double(mdp.discount));
    }
    if (!report.ok()) {
        return report;
    }
    const std::size_t S = mdp.num_states;
    const std::size_t A = mdp.num_actions;
    if (mdp.transition.size() != S * A * S) {
        add("transition tensor has " + std::to_string(mdp.transition.size()) + " entries, expected " +
            std::to_string(S * A * S));
    } else {
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                double sum = 0.0;
                bool negative = false;
                for (double p : mdp.next_dist(s, a)) {
                    negative = negative || p < 0.0 || !std::isfinite(p);
                    sum += p;
                }
                if (negative) {
                    add("negative or non-finite transition probability at " + at(s, a));
                }
                if (std::abs(sum - 1.0) > kSimplexTol) {
                    add("row sum " + format_double(sum) + " != 1 at " + at(s, a));
                }
            }
        }
    }
    if (mdp.init_dist.size() != S) {
        add("initial distribution has " + std::to_string(mdp.init_dist.size()) + " entries, expected " +
            std::to_string(S));
    } else {
        double sum = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            if (mdp.init_dist[s] < 0.0) {
                add("negative initial probability at s=" + std::to_string(s));
            }
            sum += mdp.init_dist[s];
        }
        if (std::abs(sum - 1.0) > kSimplexTol) {
            add("initial distribution sums to " + format_double(sum) + " != 1");
        }
    }
    if (mdp.env_reward) {
        if (mdp.env_reward->num_states() != mdp.num_states || mdp.env_reward->num_actions() != mdp.num_actions) {
            add("env_reward shape does not match the MDP");
        } else if (!all_finite(*mdp.env_reward)) {
            add("env_reward has non-finite entries");
        }
    }
    return report;
}

ValidationReport validate_policy(const MarkovPolicy& policy, int num_states, int num_actions) {
    ValidationReport report;
    if (policy.num_states() != num_states || policy.num_actions() != num_actions) {
        report.violations.push_back({"policy shape does not match the MDP"});
        return report;
    }
    for (int s = 0; s < num_states; ++s) {
        double sum = 0.0;
        for (int a = 0; a < num_actions; ++a) {
            const double p = policy(s, a);
            if (p < 0.0 || !std::isfinite(p)) {
                report.violations.push_back({"invalid action probability at " + at(s, a)});
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kSimplexTol) {
            report.violations.push_back({"policy row sum " + format_double(sum) + " != 1 at s=" +
                                         std::to_string(s)});
        }
    }
    return report;
}

void require_valid(const TabularMdp& mdp) {
    auto report = validate_mdp(mdp);
    if (!report.ok()) {
        throw Error("invalid MDP: " + report.summary());
    }
}

void require_valid(const TabularMdp& mdp, const MarkovPolicy& policy) {
    require_valid(mdp);
    auto report = validate_policy(policy, mdp.num_states, mdp.num_actions);
    if (!report.ok()) {
        throw Error("invalid policy: " + report.summary());
    }
}

OccupancyMeasure exact_occupancy(const TabularMdp& mdp, const MarkovPolicy& policy,
                                 const OccupancyOptions& options) {
    require_valid(mdp, policy);
    const int S = mdp.num_states;
    const double gamma = mdp.discount;
    const auto p_pi = build_policy_transition(mdp, policy, options.exec);

    // Solve for the state marginal rho; d(s,a) = rho(s) pi(a|s).
    std::vector<double> rho(S);
    if (static_cast<std::size_t>(S) * mdp.num_actions <= options.direct_solve_limit) {
        Eigen::MatrixXd system = Eigen::MatrixXd::Identity(S, S);
        Eigen::VectorXd rhs(S);
        for (int s = 0; s < S; ++s) {
            rhs(s) = (1.0 - gamma) * mdp.init_dist[s];
            for (int next = 0; next < S; ++next) {
                system(next, s) -= gamma * p_pi[static_cast<std::size_t>(s) * S + next];
            }
        }
        Eigen::VectorXd solution = system.partialPivLu().solve(rhs);
        for (int s = 0; s < S; ++s) {
            rho[s] = solution(s);
        }
    } else {
        std::vector<double> next_rho(S);
        rho = mdp.init_dist;
        double change = 0.0;
        int it = 0;
        for (; it < options.max_iterations; ++it) {
            kernels::occupancy_sweep(S, p_pi, mdp.init_dist, gamma, rho, next_rho, options.exec);
            change = 0.0;
            for (int s = 0; s < S; ++s) {
                const double updated = (1.0 - options.damping) * rho[s] + options.damping * next_rho[s];
                change = std::max(change, std::abs(updated - rho[s]));
                rho[s] = updated;
            }
            if (change <= options.tolerance) {
                break;
            }
        }
        if (change > options.tolerance) {
            throw ConvergenceError("exact_occupancy: fixed-point iteration did not converge", change);
        }
    }

    OccupancyMeasure occ{StateActionTable(S, mdp.num_actions, 0.0)};
    for (int s = 0; s < S; ++s) {
        // Solver roundoff can leave entries a few ulps below zero.
        const double mass = std::max(rho[s], 0.0);
        for (int a = 0; a < mdp.num_actions; ++a) {
            occ.mass(s, a) = mass * policy(s, a);
        }
    }
    return occ;
}

double flow_residual(const TabularMdp& mdp, const MarkovPolicy& policy, const OccupancyMeasure& occupancy) {
    const int S = mdp.num_states;
    const int A = mdp.num_actions;
    std::vector<double> inflow(S, 0.0);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const double d = occupancy(s, a);
            if (d == 0.0) {
                continue;
            }
            for (int next = 0; next < S; ++next) {
                inflow[next] += mdp.prob(s, a, next) * d;
            }
        }
    }
    double worst = 0.0;
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const double expected =
                (1.0 - mdp.discount) * mdp.init_dist[s] * policy(s, a) + mdp.discount * policy(s, a) * inflow[s];
            worst = std::max(worst, std::abs(occupancy(s, a) - expected));
        }
    }
    return worst;
}

Trajectory rollout(const TabularMdp& mdp, const MarkovPolicy& policy, const Termination& termination, Rng& rng) {
    if (termination.mode == Termination::Mode::horizon && termination.horizon <= 0) {
        throw Error("rollout: horizon must be positive");
    }
    Trajectory traj;
    int state = rng.categorical(mdp.init_dist);
    const double stop_prob = 1.0 - mdp.discount;
    for (int k = 0;; ++k) {
        Step step;
        step.state = state;
        step.action = rng.categorical(policy.probs.row(state));
        step.next_state = rng.categorical(mdp.next_dist(state, step.action));
        step.reward = mdp.env_reward ? (*mdp.env_reward)(state, step.action) : 0.0;
        if (termination.mode == Termination::Mode::geometric) {
            step.terminal = rng.uniform() < stop_prob;
        } else {
            step.terminal = k + 1 == termination.horizon;
        }
        traj.steps.push_back(step);
        if (step.terminal) {
            break;
        }
        state = step.next_state;
    }
    return traj;
}

std::vector<Step> collect_steps(const TabularMdp& mdp, const MarkovPolicy& policy, const Termination& termination,
                                std::size_t count, Rng& rng) {
    std::vector<Step> steps;
    steps.reserve(count);
    while (steps.size() < count) {
        auto traj = rollout(mdp, policy, termination, rng);
        const std::size_t take = std::min(traj.size(), count - steps.size());
        steps.insert(steps.end(), traj.steps.begin(), traj.steps.begin() + static_cast<std::ptrdiff_t>(take));
    }
    if (!steps.empty()) {
        steps.back().terminal = true;
    }
    return steps;
}

ValueSolution value_iteration(const TabularMdp& mdp, const RewardTable& reward, double tol, Exec exec) {
    require_valid(mdp);
    check_reward_shape(mdp, reward);
    const kernels::Dims dims{mdp.num_states, mdp.num_actions};
    const int S = mdp.num_states;
    constexpr int kMaxSweeps = 1000000;

    ValueSolution sol;
    sol.q_values = StateActionTable(S, mdp.num_actions);
    sol.v_values.assign(S, 0.0);
    std::vector<double> next_v(S);
    std::vector<int> greedy(S, 0);
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        kernels::q_backup(dims, mdp.transition, reward.values(), mdp.discount, sol.v_values,
                          sol.q_values.values(), exec);
        kernels::max_reduce(dims, sol.q_values.values(), next_v, {}, exec);
        double change = 0.0;
        for (int s = 0; s < S; ++s) {
            change = std::max(change, std::abs(next_v[s] - sol.v_values[s]));
        }
        sol.residuals.push_back(change);
        sol.v_values.swap(next_v);
        if (change <= tol) {
            break;
        }
    }
    // Final backup so that V = max_a Q holds exactly for the returned pair.
    kernels::q_backup(dims, mdp.transition, reward.values(), mdp.discount, sol.v_values, sol.q_values.values(),
                      exec);
    kernels::max_reduce(dims, sol.q_values.values(), sol.v_values, greedy, exec);
    sol.policy = MarkovPolicy::deterministic(greedy, mdp.num_actions);
    return sol;
}

ValueSolution soft_value_iteration(const TabularMdp& mdp, const RewardTable& reward, double temperature,
                                   int iters, const StateActionTable* warm_start, Exec exec) {
    require_valid(mdp);
    check_reward_shape(mdp, reward);
    if (!(temperature > 0.0)) {
        throw Error("soft_value_iteration: temperature must be positive");
    }
    const kernels::Dims dims{mdp.num_states, mdp.num_actions};
    ValueSolution sol;
    sol.q_values = warm_start && !warm_start->empty() ? *warm_start : StateActionTable(mdp.num_states, mdp.num_actions);
    if (!sol.q_values.same_shape(reward)) {
        throw Error("soft_value_iteration: warm start shape mismatch");
    }
    sol.v_values.assign(mdp.num_states, 0.0);
    kernels::soft_reduce(dims, sol.q_values.values(), temperature, sol.v_values, exec);
    std::vector<double> next_v(mdp.num_states);
    for (int it = 0; it < iters; ++it) {
        kernels::q_backup(dims, mdp.transition, reward.values(), mdp.discount, sol.v_values, sol.q_values.values(),
                          exec);
        kernels::soft_reduce(dims, sol.q_values.values(), temperature, next_v, exec);
        double change = 0.0;
        for (int s = 0; s < mdp.num_states; ++s) {
            change = std::max(change, std::abs(next_v[s] - sol.v_values[s]));
        }
        sol.residuals.push_back(change);
        sol.v_values.swap(next_v);
    }
    sol.policy = softmax_policy(sol.q_values, temperature);
    return sol;
}

double policy_return(const TabularMdp& mdp, const MarkovPolicy& policy, const RewardTable& reward) {
    check_reward_shape(mdp, reward);
    const auto occ = exact_occupancy(mdp, policy);
    return inner_product(occ.mass, reward) / (1.0 - mdp.discount);
}

std::vector<double> policy_evaluation(const TabularMdp& mdp, const MarkovPolicy& policy, const RewardTable& reward) {
    require_valid(mdp, policy);
    check_reward_shape(mdp, reward);
    const int S = mdp.num_states;
    const auto p_pi = build_policy_transition(mdp, policy, Exec::serial);
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(S, S);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            rhs(s) += policy(s, a) * reward(s, a);
        }
        for (int next = 0; next < S; ++next) {
            system(s, next) -= mdp.discount * p_pi[static_cast<std::size_t>(s) * S + next];
        }
    }
    Eigen::VectorXd v = system.partialPivLu().solve(rhs);
    return {v.data(), v.data() + S};
}

MarkovPolicy softmax_policy(const StateActionTable& q, double temperature) {
    MarkovPolicy policy{StateActionTable(q.num_states(), q.num_actions())};
    for (int s = 0; s < q.num_states(); ++s) {
        auto row = q.row(s);
        const double shift = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (int a = 0; a < q.num_actions(); ++a) {
            const double w = std::exp((row[a] - shift) / temperature);
            policy.probs(s, a) = w;
            sum += w;
        }
        for (int a = 0; a < q.num_actions(); ++a) {
            policy.probs(s, a) /= sum;
        }
    }
    return policy;
}

}  // namespace ailboost
