#include "ailboost/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace ailboost {

namespace {

enum Stream : std::uint64_t { kCollect = 1, kDiscriminator = 2, kPolicy = 3 };

double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// log(sigmoid(z)) without cancellation.
double log_sigmoid(double z) {
    return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

IterationMetrics policy_metrics(const TabularMdp& mdp, const OccupancyMeasure& occ,
                                const OccupancyMeasure& expert_occupancy, double kl_smoothing,
                                const ScoreReference& score) {
    IterationMetrics m;
    m.reverse_kl = reverse_kl(occ, expert_occupancy, kl_smoothing).value;
    m.mean_return = inner_product(occ.mass, *mdp.env_reward) / (1.0 - mdp.discount);
    m.normalized_score = normalized_score(m.mean_return, score.expert_return, score.random_return);
    return m;
}

BaselineResult run_adversarial(const TabularMdp& mdp, const ExpertDataset& expert,
                               const OccupancyMeasure& expert_occupancy, const AilboostConfig& config,
                               const ScoreReference& score, bool on_policy) {
    config.validate();
    require_valid(mdp);
    if (expert.empty()) {
        throw Error("adversarial baseline: expert dataset is empty");
    }
    require_within_bounds(expert, mdp.num_states, mdp.num_actions);
    if (!mdp.env_reward) {
        throw Error("adversarial baseline: evaluation needs an environment reward");
    }
    const int S = mdp.num_states;
    const int A = mdp.num_actions;

    Rng collect_rng(derive_seed(config.seed, kCollect));
    Rng disc_rng(derive_seed(config.seed, kDiscriminator));
    Rng policy_rng(derive_seed(config.seed, kPolicy));

    BaselineResult result;
    MarkovPolicy current = MarkovPolicy::uniform(S, A);
    OccupancyMeasure current_occ = exact_occupancy(mdp, current);
    WeightedReplayBuffer buffer;
    BinaryDiscriminator disc{StateActionTable(S, A, 0.0), config.clip};
    StateActionTable q_table;
    std::int64_t env_steps = 0;

    const DiscriminatorTraining disc_options{config.disc_steps, config.disc_lr, config.batch_size, config.clip};
    const WeakLearnerOptions learner_options{config.policy_steps, config.batch_size, config.temperature,
                                             config.td_lr};
    const auto expert_dist = expert.empirical_distribution(S, A);

    for (int round = 1; round <= config.rounds; ++round) {
        const auto steps = collect_steps(mdp, current, config.termination, config.samples_per_round, collect_rng);
        env_steps += static_cast<std::int64_t>(steps.size());
        if (on_policy) {
            buffer.clear();
        }
        buffer.append_dataset(to_transition_dataset(steps, round));
        result.discriminator_samples.push_back(buffer.record_count());

        disc = train_binary_discriminator(expert, buffer, S, A, disc_options, disc_rng,
                                          config.warm_start_discriminator ? &disc : nullptr);
        const RewardTable reward = dac_reward(disc, config.dac_reward);
        if (!all_finite(reward)) {
            throw NonFiniteError("non-finite discriminator at round " + std::to_string(round), result.metrics);
        }
        MarkovPolicy next = weak_learner_update(mdp, current, buffer, reward, learner_options, policy_rng, &q_table);
        if (!all_finite(q_table)) {
            throw NonFiniteError("non-finite Q values at round " + std::to_string(round), result.metrics);
        }
        const auto next_occ = exact_occupancy(mdp, next);

        // Gap against the witness g = -reward, as in the boosting driver.
        double gap = 0.0;
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                gap -= (current_occ(s, a) - next_occ(s, a)) * reward(s, a);
            }
        }

        IterationMetrics m = policy_metrics(mdp, next_occ, expert_occupancy, config.kl_smoothing, score);
        m.round = round;
        m.env_steps = env_steps;
        m.disc_objective = dac_objective(disc, buffer.uniform_distribution(S, A), expert_dist);
        m.fw_gap = gap;
        result.metrics.push_back(m);

        current = std::move(next);
        current_occ = next_occ;
    }
    result.policy = std::move(current);
    return result;
}

}  // namespace

double BinaryDiscriminator::probability(int s, int a) const {
    return sigmoid(logits(s, a));
}

double dac_objective(const BinaryDiscriminator& disc, const StateActionTable& buffer_dist,
                     const StateActionTable& expert_dist) {
    double acc = 0.0;
    for (int s = 0; s < disc.logits.num_states(); ++s) {
        for (int a = 0; a < disc.logits.num_actions(); ++a) {
            const double z = disc.logits(s, a);
            acc += buffer_dist(s, a) * log_sigmoid(z) + expert_dist(s, a) * log_sigmoid(-z);
        }
    }
    return acc;
}

StateActionTable dac_objective_gradient(const BinaryDiscriminator& disc, const StateActionTable& buffer_dist,
                                        const StateActionTable& expert_dist) {
    StateActionTable grad(disc.logits.num_states(), disc.logits.num_actions());
    for (int s = 0; s < grad.num_states(); ++s) {
        for (int a = 0; a < grad.num_actions(); ++a) {
            const double d = sigmoid(disc.logits(s, a));
            grad(s, a) = buffer_dist(s, a) * (1.0 - d) - expert_dist(s, a) * d;
        }
    }
    return grad;
}

BinaryDiscriminator train_binary_discriminator(const ExpertDataset& expert, const WeightedReplayBuffer& buffer,
                                               int num_states, int num_actions, const DiscriminatorTraining& options,
                                               Rng& rng, const BinaryDiscriminator* warm_start) {
    if (expert.empty() || buffer.empty()) {
        throw Error("train_binary_discriminator: empty dataset");
    }
    BinaryDiscriminator disc{StateActionTable(num_states, num_actions, 0.0), options.clip};
    if (warm_start) {
        if (!warm_start->logits.same_shape(disc.logits)) {
            throw Error("train_binary_discriminator: warm start shape mismatch");
        }
        disc.logits = warm_start->logits;
    }
    const auto expert_pairs = expert.pairs();
    StateActionTable buffer_dist;
    StateActionTable expert_dist;
    if (options.batch_size == 0) {
        buffer_dist = buffer.uniform_distribution(num_states, num_actions);
        expert_dist = expert.empirical_distribution(num_states, num_actions);
    }
    StateActionTable grad(num_states, num_actions);
    for (int step = 0; step < options.steps; ++step) {
        if (options.batch_size == 0) {
            grad = dac_objective_gradient(disc, buffer_dist, expert_dist);
        } else {
            std::fill(grad.values().begin(), grad.values().end(), 0.0);
            const double unit = 1.0 / static_cast<double>(options.batch_size);
            for (std::size_t k = 0; k < options.batch_size; ++k) {
                const auto& e = expert_pairs[rng.uniform_index(expert_pairs.size())];
                grad(e.state, e.action) -= unit * disc.probability(e.state, e.action);
            }
            for (auto ref : buffer.sample_uniform_refs(options.batch_size, rng)) {
                const auto& t = buffer.at(ref);
                grad(t.state, t.action) += unit * (1.0 - disc.probability(t.state, t.action));
            }
        }
        auto zv = disc.logits.values();
        auto gv = grad.values();
        for (std::size_t i = 0; i < zv.size(); ++i) {
            zv[i] = std::clamp(zv[i] + options.learning_rate * gv[i], -options.clip, options.clip);
        }
    }
    return disc;
}

RewardTable dac_reward(const BinaryDiscriminator& disc, DacReward form) {
    RewardTable reward(disc.logits.num_states(), disc.logits.num_actions());
    for (int s = 0; s < reward.num_states(); ++s) {
        for (int a = 0; a < reward.num_actions(); ++a) {
            const double z = disc.logits(s, a);
            // log(1 - D) - log D = -z; -log D = -log sigmoid(z).
            reward(s, a) = form == DacReward::logit ? -z : -log_sigmoid(z);
        }
    }
    return reward;
}

MarkovPolicy behavior_cloning(const ExpertDataset& expert, int num_states, int num_actions, double smoothing) {
    if (expert.empty()) {
        throw Error("behavior_cloning: expert dataset is empty");
    }
    if (!(smoothing >= 0.0)) {
        throw Error("behavior_cloning: smoothing must be nonnegative");
    }
    require_within_bounds(expert, num_states, num_actions);
    StateActionTable counts(num_states, num_actions, 0.0);
    for (const auto& r : expert.records) {
        counts(r.state, r.action) += 1.0;
    }
    MarkovPolicy policy{StateActionTable(num_states, num_actions)};
    for (int s = 0; s < num_states; ++s) {
        double visits = 0.0;
        for (double c : counts.row(s)) {
            visits += c;
        }
        const double denom = visits + smoothing * num_actions;
        for (int a = 0; a < num_actions; ++a) {
            policy.probs(s, a) = denom > 0.0 ? (counts(s, a) + smoothing) / denom : 1.0 / num_actions;
        }
    }
    return policy;
}

BaselineResult run_dac(const TabularMdp& mdp, const ExpertDataset& expert, const OccupancyMeasure& expert_occupancy,
                       const AilboostConfig& config, const ScoreReference& score) {
    return run_adversarial(mdp, expert, expert_occupancy, config, score, false);
}

BaselineResult run_gail_onpolicy(const TabularMdp& mdp, const ExpertDataset& expert,
                                 const OccupancyMeasure& expert_occupancy, const AilboostConfig& config,
                                 const ScoreReference& score) {
    return run_adversarial(mdp, expert, expert_occupancy, config, score, true);
}

BaselineResult run_behavior_cloning(const TabularMdp& mdp, const ExpertDataset& expert,
                                    const OccupancyMeasure& expert_occupancy, double smoothing, double kl_smoothing,
                                    const ScoreReference& score) {
    if (!mdp.env_reward) {
        throw Error("behavior cloning evaluation needs an environment reward");
    }
    BaselineResult result;
    result.policy = behavior_cloning(expert, mdp.num_states, mdp.num_actions, smoothing);
    IterationMetrics m =
        policy_metrics(mdp, exact_occupancy(mdp, result.policy), expert_occupancy, kl_smoothing, score);
    m.round = 1;
    m.env_steps = 0;
    // No discriminator and no boosting direction for a supervised learner.
    m.disc_objective = std::nan("");
    m.fw_gap = std::nan("");
    result.metrics.push_back(m);
    return result;
}

}  // namespace ailboost
