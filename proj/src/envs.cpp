#include "ailboost/envs.hpp"

#include <cmath>
#include <span>

#include "ailboost/numfmt.hpp"

namespace ailboost {

namespace {

TabularMdp empty_mdp(std::string name, int states, int actions, double discount) {
    TabularMdp mdp;
    mdp.name = std::move(name);
    mdp.num_states = states;
    mdp.num_actions = actions;
    mdp.discount = discount;
    mdp.transition.assign(static_cast<std::size_t>(states) * actions * states, 0.0);
    mdp.init_dist.assign(states, 0.0);
    mdp.env_reward = RewardTable(states, actions, 0.0);
    return mdp;
}

void add(TabularMdp& mdp, int s, int a, int next, double p) {
    mdp.transition[(static_cast<std::size_t>(s) * mdp.num_actions + a) * mdp.num_states + next] += p;
}

void finish_goal(TabularMdp& mdp, int start, int goal) {
    if (start < 0 || start >= mdp.num_states || goal < 0 || goal >= mdp.num_states) {
        throw Error("env: start or goal outside the state space");
    }
    mdp.init_dist[start] = 1.0;
    for (int a = 0; a < mdp.num_actions; ++a) {
        for (int next = 0; next < mdp.num_states; ++next) {
            mdp.transition[(static_cast<std::size_t>(goal) * mdp.num_actions + a) * mdp.num_states + next] = 0.0;
        }
        add(mdp, goal, a, goal, 1.0);
        (*mdp.env_reward)(goal, a) = 1.0;
    }
}

TabularMdp build_chain(const EnvSpec& spec) {
    if (spec.length < 2) {
        throw Error("chain: length must be at least 2");
    }
    auto mdp = empty_mdp("chain", spec.length, 2, spec.discount);
    for (int s = 0; s < spec.length; ++s) {
        add(mdp, s, 0, std::max(s - 1, 0), 1.0);
        add(mdp, s, 1, std::min(s + 1, spec.length - 1), 1.0);
    }
    finish_goal(mdp, spec.start, spec.goal < 0 ? spec.length - 1 : spec.goal);
    return mdp;
}

TabularMdp build_grid(const EnvSpec& spec, double slip) {
    if (spec.width < 1 || spec.height < 1 || spec.width * spec.height < 2) {
        throw Error("gridworld: needs at least two cells");
    }
    if (!(slip >= 0.0 && slip < 1.0)) {
        throw Error("gridworld: slip must lie in [0,1)");
    }
    const int W = spec.width;
    const int H = spec.height;
    auto mdp = empty_mdp(spec.name, W * H, 4, spec.discount);
    // up, down, left, right
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    const int lateral[4][2] = {{2, 3}, {2, 3}, {0, 1}, {0, 1}};
    auto move = [&](int s, int dir) {
        const int r = s / W + dr[dir];
        const int c = s % W + dc[dir];
        return (r < 0 || r >= H || c < 0 || c >= W) ? s : r * W + c;
    };
    for (int s = 0; s < W * H; ++s) {
        for (int a = 0; a < 4; ++a) {
            add(mdp, s, a, move(s, a), 1.0 - slip);
            if (slip > 0.0) {
                add(mdp, s, a, move(s, lateral[a][0]), slip / 2.0);
                add(mdp, s, a, move(s, lateral[a][1]), slip / 2.0);
            }
        }
    }
    finish_goal(mdp, spec.start, spec.goal < 0 ? W * H - 1 : spec.goal);
    return mdp;
}

}  // namespace

std::vector<std::string> env_names() {
    return {"chain", "gridworld", "gridworld_slip"};
}

TabularMdp build_env(const EnvSpec& spec) {
    if (!(spec.discount > 0.0 && spec.discount < 1.0)) {
        throw Error("env: discount must lie in (0,1), got " + format_double(spec.discount));
    }
    TabularMdp mdp;
    if (spec.name == "chain") {
        mdp = build_chain(spec);
    } else if (spec.name == "gridworld") {
        mdp = build_grid(spec, 0.0);
    } else if (spec.name == "gridworld_slip") {
        mdp = build_grid(spec, spec.slip);
    } else {
        throw Error("unknown environment '" + spec.name + "'");
    }
    require_valid(mdp);
    return mdp;
}

TabularMdp toggle2(double discount) {
    auto mdp = empty_mdp("toggle2", 2, 2, discount);
    add(mdp, 0, 0, 0, 1.0);
    add(mdp, 0, 1, 1, 1.0);
    add(mdp, 1, 0, 1, 1.0);
    add(mdp, 1, 1, 0, 1.0);
    mdp.init_dist[0] = 1.0;
    (*mdp.env_reward)(1, 0) = 1.0;
    (*mdp.env_reward)(1, 1) = 1.0;
    return mdp;
}

TabularMdp random_mdp(int num_states, int num_actions, double discount, Rng& rng) {
    auto mdp = empty_mdp("random", num_states, num_actions, discount);
    auto normalize_exponentials = [&rng](std::span<double> row) {
        double total = 0.0;
        for (double& x : row) {
            x = -std::log(1.0 - rng.uniform());
            total += x;
        }
        for (double& x : row) {
            x /= total;
        }
    };
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            const auto begin = (static_cast<std::size_t>(s) * num_actions + a) * num_states;
            normalize_exponentials(std::span<double>(mdp.transition).subspan(begin, num_states));
            (*mdp.env_reward)(s, a) = rng.uniform();
        }
    }
    normalize_exponentials(mdp.init_dist);
    return mdp;
}

MarkovPolicy random_policy(int num_states, int num_actions, Rng& rng) {
    MarkovPolicy policy{StateActionTable(num_states, num_actions)};
    for (int s = 0; s < num_states; ++s) {
        double total = 0.0;
        for (double& x : policy.probs.row(s)) {
            x = -std::log(1.0 - rng.uniform());
            total += x;
        }
        for (double& x : policy.probs.row(s)) {
            x /= total;
        }
    }
    return policy;
}

ExpertBundle generate_expert(const TabularMdp& mdp, int n_trajectories, const Termination& termination,
                             std::uint64_t seed) {
    if (!mdp.env_reward) {
        throw Error("generate_expert: the MDP has no environment reward");
    }
    if (n_trajectories <= 0) {
        throw Error("generate_expert: need at least one trajectory");
    }
    ExpertBundle bundle;
    bundle.policy = value_iteration(mdp, *mdp.env_reward, 1e-12).policy;
    bundle.occupancy = exact_occupancy(mdp, bundle.policy);
    bundle.expert_return = inner_product(bundle.occupancy.mass, *mdp.env_reward) / (1.0 - mdp.discount);
    bundle.random_return = policy_return(mdp, MarkovPolicy::uniform(mdp.num_states, mdp.num_actions), *mdp.env_reward);

    Rng rng(seed);
    std::vector<Trajectory> trajectories;
    for (int i = 0; i < n_trajectories; ++i) {
        trajectories.push_back(rollout(mdp, bundle.policy, termination, rng));
    }
    bundle.data.records = log_trajectories(trajectories);
    bundle.data.env_name = mdp.name;
    bundle.data.discount = mdp.discount;
    bundle.data.source = "value_iteration_expert";
    bundle.data.seed = seed;
    return bundle;
}

}  // namespace ailboost
