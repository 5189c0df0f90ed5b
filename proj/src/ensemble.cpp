#include "ailboost/ensemble.hpp"

#include <cmath>

#include "ailboost/numfmt.hpp"

namespace ailboost {

namespace {

struct RunningStats {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    double standard_error() const {
        if (n < 2) {
            return 0.0;
        }
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
};

}  // namespace

std::vector<double> PolicyEnsemble::weights() const {
    std::vector<double> w;
    w.reserve(components.size());
    for (const auto& c : components) {
        w.push_back(c.weight);
    }
    return w;
}

PolicyEnsemble init_ensemble(const MarkovPolicy& policy) {
    const auto report = validate_policy(policy, policy.num_states(), policy.num_actions());
    if (!report.ok()) {
        throw Error("init_ensemble: invalid policy: " + report.summary());
    }
    return {{{1.0, policy}}};
}

PolicyEnsemble mix_in(const PolicyEnsemble& ensemble, const MarkovPolicy& new_policy, double mix_weight,
                      std::optional<std::size_t> max_components) {
    if (!(mix_weight > 0.0 && mix_weight < 1.0)) {
        throw Error("mix_in: mixing weight must lie in (0,1), got " + format_double(mix_weight));
    }
    if (max_components && *max_components == 0) {
        throw Error("mix_in: component cap must be positive");
    }
    PolicyEnsemble next;
    std::size_t first = 0;
    if (max_components && ensemble.size() + 1 > *max_components) {
        first = ensemble.size() + 1 - *max_components;
    }
    next.components.reserve(ensemble.size() + 1 - first);
    for (std::size_t i = first; i < ensemble.size(); ++i) {
        next.components.push_back({ensemble.components[i].weight * (1.0 - mix_weight), ensemble.components[i].policy});
    }
    next.components.push_back({mix_weight, new_policy});
    double sum = 0.0;
    for (const auto& c : next.components) {
        sum += c.weight;
    }
    for (auto& c : next.components) {
        c.weight /= sum;
    }
    return next;
}

void require_valid_weights(const PolicyEnsemble& ensemble) {
    if (ensemble.components.empty()) {
        throw Error("ensemble is empty");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        const double w = ensemble.components[i].weight;
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw Error("ensemble weight " + std::to_string(i) + " is invalid: " + format_double(w));
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw Error("ensemble weights sum to " + format_double(sum) + " != 1");
    }
}

std::size_t sample_component(const PolicyEnsemble& ensemble, Rng& rng) {
    require_valid_weights(ensemble);
    const auto w = ensemble.weights();
    return static_cast<std::size_t>(rng.categorical(w));
}

OccupancyMeasure ensemble_occupancy(const TabularMdp& mdp, const PolicyEnsemble& ensemble) {
    require_valid_weights(ensemble);
    OccupancyMeasure mix{StateActionTable(mdp.num_states, mdp.num_actions, 0.0)};
    for (const auto& c : ensemble.components) {
        const auto occ = exact_occupancy(mdp, c.policy);
        auto dst = mix.mass.values();
        auto src = occ.mass.values();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] += c.weight * src[i];
        }
    }
    return mix;
}

EvaluationResult evaluate_ensemble(const TabularMdp& mdp, const PolicyEnsemble& ensemble, const RewardTable& reward,
                                   std::size_t n_episodes, const Termination& termination, Rng& rng) {
    if (n_episodes == 0) {
        throw Error("evaluate_ensemble: n_episodes must be at least 1");
    }
    require_valid_weights(ensemble);
    RunningStats plain;
    RunningStats discounted;
    for (std::size_t ep = 0; ep < n_episodes; ++ep) {
        const auto& policy = ensemble.components[sample_component(ensemble, rng)].policy;
        const auto traj = rollout(mdp, policy, termination, rng);
        double sum = 0.0;
        double disc_sum = 0.0;
        double scale = 1.0;
        for (const auto& step : traj.steps) {
            const double r = reward(step.state, step.action);
            sum += r;
            disc_sum += scale * r;
            scale *= mdp.discount;
        }
        plain.push(sum);
        discounted.push(disc_sum);
    }
    return {plain.mean, plain.standard_error(), discounted.mean, discounted.standard_error(), n_episodes};
}

double ensemble_return(const TabularMdp& mdp, const PolicyEnsemble& ensemble, const RewardTable& reward) {
    return inner_product(ensemble_occupancy(mdp, ensemble).mass, reward) / (1.0 - mdp.discount);
}

}  // namespace ailboost
