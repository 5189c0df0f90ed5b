#include "ailboost/boost.hpp"

#include <algorithm>
#include <cmath>

#include "ailboost/numfmt.hpp"

namespace ailboost {

namespace {

enum Stream : std::uint64_t { kCollect = 1, kDiscriminator = 2, kPolicy = 3 };

double soft_value(std::span<const double> q_row, double temperature) {
    double shift = q_row[0];
    for (double x : q_row) {
        shift = std::fmax(shift, x);
    }
    double acc = 0.0;
    for (double x : q_row) {
        acc += std::exp((x - shift) / temperature);
    }
    return shift + temperature * std::log(acc);
}

std::vector<double> buffer_weights(const WeightedReplayBuffer& buffer, const std::vector<double>& component_weights) {
    // Datasets of evicted components keep zero weight.
    std::vector<double> w(buffer.dataset_count(), 0.0);
    const std::size_t offset = w.size() - component_weights.size();
    std::copy(component_weights.begin(), component_weights.end(), w.begin() + static_cast<std::ptrdiff_t>(offset));
    return w;
}

}  // namespace

void AilboostConfig::validate() const {
    if (rounds <= 0 || samples_per_round == 0 || disc_steps < 0 || policy_steps < 0 || batch_size == 0) {
        throw Error("config: rounds, samples_per_round and batch_size must be positive; step counts nonnegative");
    }
    if (!(mix_weight > 0.0 && mix_weight < 1.0)) {
        throw Error("config: mix_weight must lie in (0,1), got " + format_double(mix_weight));
    }
    if (!(temperature > 0.0) || !(clip > 0.0) || !(td_lr > 0.0) || !(disc_lr > 0.0)) {
        throw Error("config: temperature, clip and learning rates must be positive");
    }
    if (termination.mode == Termination::Mode::horizon && termination.horizon <= 0) {
        throw Error("config: horizon must be positive");
    }
}

double normalized_score(double mean_return, double expert_return, double random_return) {
    const double span = expert_return - random_return;
    if (span == 0.0 || !std::isfinite(span)) {
        throw Error("normalized_score: expert and random returns coincide");
    }
    return (mean_return - random_return) / span;
}

MarkovPolicy weak_learner_update(const TabularMdp& mdp, const MarkovPolicy& policy_init,
                                 const WeightedReplayBuffer& buffer, const RewardTable& reward,
                                 const WeakLearnerOptions& options, Rng& rng, StateActionTable* q_state) {
    if (buffer.empty()) {
        throw Error("weak_learner_update: replay buffer is empty");
    }
    if (!(options.temperature > 0.0) || options.steps < 0) {
        throw Error("weak_learner_update: invalid options");
    }
    const int S = mdp.num_states;
    const int A = mdp.num_actions;
    const double tau = options.temperature;

    StateActionTable q(S, A);
    if (q_state && !q_state->empty()) {
        if (q_state->num_states() != S || q_state->num_actions() != A) {
            throw Error("weak_learner_update: Q warm start shape mismatch");
        }
        q = *q_state;
    } else {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                q(s, a) = tau * std::log(std::max(policy_init(s, a), 1e-300));
            }
        }
    }
    if (options.steps == 0) {
        if (q_state) {
            *q_state = q;
        }
        return policy_init;
    }

    std::vector<double> v(S);
    for (int s = 0; s < S; ++s) {
        v[s] = soft_value(q.row(s), tau);
    }
    // Geometric episode ends are a sampling device for discounting, not MDP
    // terminals, so every transition bootstraps.
    for (int step = 0; step < options.steps; ++step) {
        for (auto ref : buffer.sample_uniform_refs(options.batch_size, rng)) {
            const auto& t = buffer.at(ref);
            const double target = reward(t.state, t.action) + mdp.discount * v[t.next_state];
            double& cell = q(t.state, t.action);
            cell += options.learning_rate * (target - cell);
            v[t.state] = soft_value(q.row(t.state), tau);
        }
    }
    if (q_state) {
        *q_state = q;
    }
    return softmax_policy(q, tau);
}

AilboostResult run_ailboost(const TabularMdp& mdp, const ExpertDataset& expert, const OccupancyMeasure& expert_occupancy,
                            const AilboostConfig& config, const ScoreReference& score, const RoundObserver& observer) {
    config.validate();
    require_valid(mdp);
    if (expert.empty()) {
        throw Error("run_ailboost: expert dataset is empty");
    }
    require_within_bounds(expert, mdp.num_states, mdp.num_actions);
    if (!mdp.env_reward) {
        throw Error("run_ailboost: evaluation needs an environment reward");
    }
    const int S = mdp.num_states;
    const int A = mdp.num_actions;
    const double alpha = config.mix_weight;

    Rng collect_rng(derive_seed(config.seed, kCollect));
    Rng disc_rng(derive_seed(config.seed, kDiscriminator));
    Rng policy_rng(derive_seed(config.seed, kPolicy));

    AilboostResult result;
    MarkovPolicy current = MarkovPolicy::uniform(S, A);
    PolicyEnsemble ensemble = init_ensemble(current);
    OccupancyMeasure tracked = exact_occupancy(mdp, current);
    WeightedReplayBuffer buffer;
    Discriminator disc{StateActionTable(S, A, 0.0), config.clip};
    StateActionTable q_table;
    std::vector<double> lagged_weights;
    std::int64_t env_steps = 0;

    const DiscriminatorTraining disc_options{config.disc_steps, config.disc_lr, config.batch_size, config.clip};
    const WeakLearnerOptions learner_options{config.policy_steps, config.batch_size, config.temperature,
                                             config.td_lr};

    auto fail = [&](const std::string& what) { throw NonFiniteError(what, result.metrics); };

    for (int round = 1; round <= config.rounds; ++round) {
        // Dataset from the newest weak learner.
        const auto steps = collect_steps(mdp, current, config.termination, config.samples_per_round, collect_rng);
        env_steps += static_cast<std::int64_t>(steps.size());
        buffer.append_dataset(to_transition_dataset(steps, round));

        const auto current_weights = ensemble.weights();
        if (config.weighting == BufferWeighting::ensemble || lagged_weights.empty()) {
            buffer.set_weights(buffer_weights(buffer, current_weights));
        } else {
            // lagged_weights covers the datasets before the newest one.
            std::vector<double> w(buffer.dataset_count(), 0.0);
            std::copy(lagged_weights.begin(), lagged_weights.end(),
                      w.end() - 1 - static_cast<std::ptrdiff_t>(lagged_weights.size()));
            buffer.set_weights(w);
        }
        result.discriminator_samples.push_back(buffer.record_count());

        // Functional sub-gradient of the reverse KL at the current mixture.
        double disc_objective = 0.0;
        if (config.oracle_mode) {
            disc = optimal_discriminator(tracked, expert_occupancy, config.clip);
            disc_objective = variational_objective(disc, tracked, expert_occupancy);
        } else {
            disc = train_discriminator(expert, buffer, S, A, disc_options, disc_rng,
                                       config.warm_start_discriminator ? &disc : nullptr);
            disc_objective = empirical_variational_objective(disc, expert, buffer);
        }
        if (!all_finite(disc.g)) {
            fail("non-finite discriminator at round " + std::to_string(round));
        }
        const RewardTable reward = discriminator_reward(disc);

        // Weak learner maximizing <d^pi, -g>, warm-started from the previous one.
        MarkovPolicy next;
        if (config.oracle_mode) {
            auto sol = soft_value_iteration(mdp, reward, config.temperature, config.oracle_vi_iters, &q_table);
            q_table = std::move(sol.q_values);
            next = std::move(sol.policy);
        } else {
            next = weak_learner_update(mdp, current, buffer, reward, learner_options, policy_rng, &q_table);
        }
        if (!all_finite(q_table) || !all_finite(next.probs)) {
            fail("non-finite Q values at round " + std::to_string(round));
        }

        const auto new_occupancy = exact_occupancy(mdp, next);
        StateActionTable direction = tracked.mass;
        for (std::size_t i = 0; i < direction.size(); ++i) {
            direction.values()[i] -= new_occupancy.mass.values()[i];
        }
        const double fw_gap = inner_product(direction, disc.g);

        lagged_weights = current_weights;
        PolicyEnsemble mixed = mix_in(ensemble, next, alpha, config.max_components);
        for (double w : mixed.weights()) {
            if (!std::isfinite(w)) {
                fail("non-finite ensemble weight at round " + std::to_string(round));
            }
        }
        if (config.max_components && mixed.size() <= ensemble.size()) {
            tracked = ensemble_occupancy(mdp, mixed);
        } else {
            auto dst = tracked.mass.values();
            auto src = new_occupancy.mass.values();
            for (std::size_t i = 0; i < dst.size(); ++i) {
                dst[i] = (1.0 - alpha) * dst[i] + alpha * src[i];
            }
        }

        IterationMetrics m;
        m.round = round;
        m.env_steps = env_steps;
        m.reverse_kl = reverse_kl(tracked, expert_occupancy, config.kl_smoothing).value;
        m.disc_objective = disc_objective;
        m.mean_return = inner_product(tracked.mass, *mdp.env_reward) / (1.0 - mdp.discount);
        m.normalized_score = normalized_score(m.mean_return, score.expert_return, score.random_return);
        m.fw_gap = fw_gap;
        result.metrics.push_back(m);

        if (observer) {
            observer({round, &ensemble, &mixed, &buffer, &disc, &next, &tracked});
        }
        ensemble = std::move(mixed);
        current = std::move(next);
    }
    result.ensemble = std::move(ensemble);
    return result;
}

}  // namespace ailboost
