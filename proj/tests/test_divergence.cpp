#include <doctest.h>

#include <cmath>
#include <limits>

#include "ailboost/divergence.hpp"
#include "fixtures.hpp"

using namespace ailboost;
using namespace fixtures;

namespace {

OccupancyMeasure two_cell(double a, double b) { return occupancy_from(1, 2, {a, b}); }

OccupancyMeasure random_occupancy(int S, int A, Rng& rng) {
    const auto mdp = random_mdp(S, A, 0.8, rng);
    return exact_occupancy(mdp, random_policy(S, A, rng));
}

std::vector<StateAction> draw_pairs(const StateActionTable& mass, int n, Rng& rng) {
    std::vector<StateAction> pairs;
    pairs.reserve(n);
    const int A = mass.num_actions();
    for (int i = 0; i < n; ++i) {
        const int k = rng.categorical(mass.values());
        pairs.push_back({k / A, k % A});
    }
    return pairs;
}

/// Datasets with random positive integer counts in every cell, so the
/// empirical distributions are known exactly.
struct CountFixture {
    ExpertDataset expert;
    WeightedReplayBuffer buffer;
    StateActionTable p;
    StateActionTable q;
};

CountFixture count_fixture(int S, int A, Rng& rng) {
    CountFixture f{{}, {}, StateActionTable(S, A), StateActionTable(S, A)};
    std::vector<StateAction> expert_pairs;
    std::vector<StateAction> buffer_pairs;
    double ne = 0.0;
    double nb = 0.0;
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const int ce = 1 + static_cast<int>(rng.uniform_index(20));
            const int cb = 1 + static_cast<int>(rng.uniform_index(20));
            expert_pairs.insert(expert_pairs.end(), ce, {s, a});
            buffer_pairs.insert(buffer_pairs.end(), cb, {s, a});
            f.q(s, a) = ce;
            f.p(s, a) = cb;
            ne += ce;
            nb += cb;
        }
    }
    for (double& x : f.q.values()) {
        x /= ne;
    }
    for (double& x : f.p.values()) {
        x /= nb;
    }
    f.expert = expert_from(expert_pairs);
    f.buffer.append_dataset(dataset_from(buffer_pairs));
    const std::vector<double> one = {1.0};
    f.buffer.set_weights(one);
    return f;
}

DiscriminatorTraining full_batch(int steps, double lr = 1.0) {
    DiscriminatorTraining t;
    t.steps = steps;
    t.learning_rate = lr;
    t.batch_size = 0;
    return t;
}

}  // namespace

TEST_SUITE("reverse_kl") {
    TEST_CASE("identical occupancies give zero") {
        Rng rng(1);
        const auto d = random_occupancy(4, 3, rng);
        const auto kl = reverse_kl(d, d, 0.0);
        CHECK_FALSE(kl.infinite);
        CHECK(kl.value == 0.0);
    }

    TEST_CASE("two-cell example") {
        const auto kl = reverse_kl(two_cell(2.0 / 3.0, 1.0 / 3.0), two_cell(0.5, 0.5), 0.0);
        const double expected = (2.0 / 3.0) * std::log(4.0 / 3.0) + (1.0 / 3.0) * std::log(2.0 / 3.0);
        CHECK(kl.value == doctest::Approx(expected).epsilon(1e-14));
        CHECK(kl.value == doctest::Approx(0.05663).epsilon(1e-4));
    }

    TEST_CASE("support mismatch is flagged, not thrown") {
        const auto kl = reverse_kl(two_cell(1.0, 0.0), two_cell(0.0, 1.0), 0.0);
        CHECK(kl.infinite);
        CHECK(std::isinf(kl.value));
    }

    TEST_CASE("smoothing makes the mismatch finite") {
        const double eps = 1e-6;
        const auto kl = reverse_kl(two_cell(1.0, 0.0), two_cell(0.0, 1.0), eps);
        CHECK_FALSE(kl.infinite);
        CHECK(kl.value == doctest::Approx(-std::log(eps * 0.5)).epsilon(1e-12));
    }

    TEST_CASE("nonnegative on random pairs") {
        Rng rng(2);
        for (int i = 0; i < 50; ++i) {
            const auto d = random_occupancy(3, 2, rng);
            const auto e = random_occupancy(3, 2, rng);
            CHECK(reverse_kl(d, e, 0.0).value >= 0.0);
        }
    }

    TEST_CASE("invalid smoothing and shape mismatch rejected") {
        CHECK_THROWS_AS(reverse_kl(two_cell(0.5, 0.5), two_cell(0.5, 0.5), -0.1), Error);
        CHECK_THROWS_AS(reverse_kl(two_cell(0.5, 0.5), occupancy_from(2, 1, {0.5, 0.5}), 0.0), Error);
    }
}

TEST_SUITE("optimal_discriminator") {
    TEST_CASE("equal occupancies give zero") {
        Rng rng(3);
        const auto d = random_occupancy(4, 2, rng);
        const auto disc = optimal_discriminator(d, d, 10.0);
        for (double x : disc.g.values()) {
            CHECK(x == 0.0);
        }
    }

    TEST_CASE("two-cell log ratio") {
        const auto g = optimal_discriminator(two_cell(2.0 / 3.0, 1.0 / 3.0), two_cell(0.5, 0.5), 10.0).g;
        CHECK(g(0, 0) == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-14));
        CHECK(g(0, 1) == doctest::Approx(std::log(2.0 / 3.0)).epsilon(1e-14));
        CHECK(g(0, 0) == doctest::Approx(0.2877).epsilon(1e-3));
        CHECK(g(0, 1) == doctest::Approx(-0.4055).epsilon(1e-3));
    }

    TEST_CASE("pinned cells at the clip bound") {
        const auto d = occupancy_from(1, 3, {0.0, 0.5, 0.5});
        const auto e = occupancy_from(1, 3, {0.5, 0.5, 0.0});
        const auto g = optimal_discriminator(d, e, 10.0).g;
        CHECK(g(0, 0) == -10.0);
        CHECK(g(0, 1) == 0.0);
        CHECK(g(0, 2) == 10.0);
    }

    TEST_CASE("large ratios are clipped") {
        const auto g = optimal_discriminator(two_cell(1.0 - 1e-9, 1e-9), two_cell(1e-9, 1.0 - 1e-9), 5.0).g;
        CHECK(g(0, 0) == 5.0);
        CHECK(g(0, 1) == -5.0);
    }

    TEST_CASE("non-positive clip rejected") {
        CHECK_THROWS_AS(optimal_discriminator(two_cell(0.5, 0.5), two_cell(0.5, 0.5), 0.0), Error);
    }
}

TEST_SUITE("variational_objective") {
    TEST_CASE("zero witness gives -1") {
        Rng rng(4);
        for (int i = 0; i < 10; ++i) {
            const auto d = random_occupancy(3, 2, rng);
            const auto e = random_occupancy(3, 2, rng);
            const Discriminator zero{StateActionTable(3, 2), 10.0};
            CHECK(variational_objective(zero, d, e) == doctest::Approx(-1.0).epsilon(1e-14));
        }
    }

    TEST_CASE("value at the optimum and one unit above it") {
        const auto d = two_cell(2.0 / 3.0, 1.0 / 3.0);
        const auto e = two_cell(0.5, 0.5);
        auto disc = optimal_discriminator(d, e, 10.0);
        const double kl = reverse_kl(d, e, 0.0).value;
        CHECK(variational_objective(disc, d, e) == doctest::Approx(kl - 1.0).epsilon(1e-13));
        CHECK(variational_objective(disc, d, e) == doctest::Approx(-0.94337).epsilon(1e-4));
        for (double& x : disc.g.values()) {
            x += 1.0;
        }
        // -E_e[exp(g* + 1)] + E_d[g* + 1] = -e + KL + 1.
        CHECK(variational_objective(disc, d, e) == doctest::Approx(kl + 1.0 - std::exp(1.0)).epsilon(1e-13));
        CHECK(variational_objective(disc, d, e) == doctest::Approx(-1.6617).epsilon(1e-4));
    }

    TEST_CASE("optimum beats 100 random perturbations") {
        Rng rng(5);
        for (int trial = 0; trial < 5; ++trial) {
            const auto d = random_occupancy(4, 3, rng);
            const auto e = random_occupancy(4, 3, rng);
            const auto best = optimal_discriminator(d, e, 50.0);
            const double top = variational_objective(best, d, e);
            CHECK(std::abs(top - (reverse_kl(d, e, 0.0).value - 1.0)) <= 1e-9);
            for (int k = 0; k < 100; ++k) {
                auto other = best;
                for (double& x : other.g.values()) {
                    x += rng.uniform() - 0.5;
                }
                CHECK(variational_objective(other, d, e) < top);
            }
        }
    }
}

TEST_SUITE("empirical_variational_objective") {
    TEST_CASE("identical single points with zero witness") {
        WeightedReplayBuffer buffer;
        buffer.append_dataset(dataset_from({{0, 0}}));
        const std::vector<double> one = {1.0};
        buffer.set_weights(one);
        const Discriminator zero{StateActionTable(2, 2), 10.0};
        CHECK(empirical_variational_objective(zero, expert_from({{0, 0}}), buffer) == -1.0);
    }

    TEST_CASE("two-term arithmetic") {
        WeightedReplayBuffer buffer;
        buffer.append_dataset(dataset_from({{1, 1}}));
        const std::vector<double> one = {1.0};
        buffer.set_weights(one);
        Discriminator disc{StateActionTable(2, 2), 10.0};
        disc.g(1, 1) = 2.0;
        CHECK(empirical_variational_objective(disc, expert_from({{0, 0}}), buffer) == 1.0);
    }

    TEST_CASE("empty expert data rejected") {
        WeightedReplayBuffer buffer;
        buffer.append_dataset(dataset_from({{0, 0}}));
        const std::vector<double> one = {1.0};
        buffer.set_weights(one);
        const Discriminator zero{StateActionTable(2, 2), 10.0};
        CHECK_THROWS_AS(empirical_variational_objective(zero, ExpertDataset{}, buffer), Error);
    }

    TEST_CASE("large samples agree with the exact objective") {
        Rng rng(6);
        const int S = 3;
        const int A = 2;
        const auto e = random_occupancy(S, A, rng);
        const auto d1 = random_occupancy(S, A, rng);
        const auto d2 = random_occupancy(S, A, rng);
        const std::vector<double> w = {0.7, 0.3};
        Discriminator disc{StateActionTable(S, A), 10.0};
        for (double& x : disc.g.values()) {
            x = 2.0 * rng.uniform() - 1.0;
        }
        OccupancyMeasure mixture{StateActionTable(S, A)};
        for (std::size_t i = 0; i < mixture.mass.size(); ++i) {
            mixture.mass.values()[i] = w[0] * d1.mass.values()[i] + w[1] * d2.mass.values()[i];
        }

        const int ne = 100000;
        const int n1 = 50000;
        const int n2 = 30000;
        const auto expert = expert_from(draw_pairs(e.mass, ne, rng));
        WeightedReplayBuffer buffer;
        buffer.append_dataset(dataset_from(draw_pairs(d1.mass, n1, rng)));
        buffer.append_dataset(dataset_from(draw_pairs(d2.mass, n2, rng)));
        buffer.set_weights(w);

        const auto variance = [&](const StateActionTable& mass, auto f) {
            double m = 0.0;
            double m2 = 0.0;
            for (std::size_t i = 0; i < mass.size(); ++i) {
                const double x = f(disc.g.values()[i]);
                m += mass.values()[i] * x;
                m2 += mass.values()[i] * x * x;
            }
            return m2 - m * m;
        };
        const auto ident = [](double x) { return x; };
        const auto expo = [](double x) { return std::exp(x); };
        const double se = std::sqrt(variance(e.mass, expo) / ne + w[0] * w[0] * variance(d1.mass, ident) / n1 +
                                    w[1] * w[1] * variance(d2.mass, ident) / n2);
        const double exact = variational_objective(disc, mixture, e);
        CHECK(std::abs(empirical_variational_objective(disc, expert, buffer) - exact) <= 3.0 * se);
    }

    TEST_CASE("analytic gradient matches central differences") {
        Rng rng(7);
        const double h = 1e-5;
        for (int trial = 0; trial < 10; ++trial) {
            auto f = count_fixture(3, 2, rng);
            Discriminator disc{StateActionTable(3, 2), 10.0};
            for (double& x : disc.g.values()) {
                x = 2.0 * rng.uniform() - 1.0;
            }
            const auto grad = empirical_objective_gradient(disc, f.expert, f.buffer);
            double err = 0.0;
            double scale = 0.0;
            for (std::size_t i = 0; i < disc.g.size(); ++i) {
                auto up = disc;
                auto down = disc;
                up.g.values()[i] += h;
                down.g.values()[i] -= h;
                const double fd = (empirical_variational_objective(up, f.expert, f.buffer) -
                                   empirical_variational_objective(down, f.expert, f.buffer)) /
                                  (2.0 * h);
                err = std::max(err, std::abs(fd - grad.values()[i]));
                scale = std::max(scale, std::abs(grad.values()[i]));
            }
            CHECK(err / scale <= 1e-5);
        }
    }
}

TEST_SUITE("train_discriminator") {
    TEST_CASE("zero steps return the zero table") {
        Rng rng(8);
        auto f = count_fixture(2, 2, rng);
        const auto disc = train_discriminator(f.expert, f.buffer, 2, 2, full_batch(0), rng);
        for (double x : disc.g.values()) {
            CHECK(x == 0.0);
        }
    }

    TEST_CASE("empty inputs rejected") {
        Rng rng(9);
        auto f = count_fixture(2, 2, rng);
        CHECK_THROWS_AS(train_discriminator(ExpertDataset{}, f.buffer, 2, 2, full_batch(10), rng), Error);
        CHECK_THROWS_AS(train_discriminator(f.expert, WeightedReplayBuffer{}, 2, 2, full_batch(10), rng), Error);
    }

    TEST_CASE("full batch converges to the empirical log ratio") {
        Rng rng(10);
        auto f = count_fixture(3, 2, rng);
        std::vector<double> trace;
        const auto disc = train_discriminator(f.expert, f.buffer, 3, 2, full_batch(5000), rng, nullptr, &trace);
        for (int s = 0; s < 3; ++s) {
            for (int a = 0; a < 2; ++a) {
                CHECK(std::abs(disc.g(s, a) - std::log(f.p(s, a) / f.q(s, a))) <= 0.05);
            }
        }
        REQUIRE(trace.size() == 5001);
        for (std::size_t i = 1; i < trace.size(); ++i) {
            CHECK(trace[i] >= trace[i - 1] - 1e-12);
        }
    }

    TEST_CASE("matched distributions give a flat witness") {
        Rng rng(11);
        const auto mass = occupancy_from(2, 2, {0.4, 0.3, 0.2, 0.1}).mass;
        const auto expert = expert_from(draw_pairs(mass, 100000, rng));
        WeightedReplayBuffer buffer;
        buffer.append_dataset(dataset_from(draw_pairs(mass, 100000, rng)));
        const std::vector<double> one = {1.0};
        buffer.set_weights(one);
        DiscriminatorTraining options;
        options.steps = 3000;
        options.learning_rate = 0.05;
        options.batch_size = 256;
        const auto disc = train_discriminator(expert, buffer, 2, 2, options, rng);
        for (double x : disc.g.values()) {
            CHECK(std::abs(x) <= 0.05);
        }
    }

    TEST_CASE("entries stay inside the clip bound") {
        WeightedReplayBuffer buffer;
        buffer.append_dataset(dataset_from({{0, 0}}));
        const std::vector<double> one = {1.0};
        buffer.set_weights(one);
        Rng rng(12);
        auto options = full_batch(200, 5.0);
        options.clip = 3.0;
        const auto disc = train_discriminator(expert_from({{1, 1}}), buffer, 2, 2, options, rng);
        CHECK(disc.g(0, 0) == 3.0);
        CHECK(disc.g(1, 1) == -3.0);
    }

    TEST_CASE("warm start resumes the ascent") {
        Rng rng(13);
        auto f = count_fixture(2, 2, rng);
        const auto straight = train_discriminator(f.expert, f.buffer, 2, 2, full_batch(40, 0.5), rng);
        const auto half = train_discriminator(f.expert, f.buffer, 2, 2, full_batch(20, 0.5), rng);
        const auto resumed = train_discriminator(f.expert, f.buffer, 2, 2, full_batch(20, 0.5), rng, &half);
        CHECK(resumed.g.values()[0] == straight.g.values()[0]);
        CHECK(max_abs_diff(resumed.g, straight.g) == 0.0);
    }

    TEST_CASE("trained witness induces the same best response as the exact one") {
        Rng rng(14);
        for (int trial = 0; trial < 10; ++trial) {
            const int S = 3;
            const int A = 2;
            const auto mdp = random_mdp(S, A, 0.9, rng);
            auto f = count_fixture(S, A, rng);
            const auto trained = train_discriminator(f.expert, f.buffer, S, A, full_batch(5000), rng);
            StateActionTable exact(S, A);
            for (std::size_t i = 0; i < exact.size(); ++i) {
                exact.values()[i] = std::log(f.p.values()[i] / f.q.values()[i]);
            }
            REQUIRE(max_abs_diff(trained.g, exact) <= 1e-6);
            const auto r_trained = discriminator_reward(trained);
            const Discriminator exact_disc{exact, 10.0};
            const auto r_exact = discriminator_reward(exact_disc);
            int index = 0;
            int best_trained = -1;
            int best_exact = -1;
            double top_trained = -std::numeric_limits<double>::infinity();
            double top_exact = -std::numeric_limits<double>::infinity();
            for_each_deterministic(S, A, [&](const MarkovPolicy& pi) {
                const auto d = exact_occupancy(mdp, pi).mass;
                const double vt = inner_product(d, r_trained);
                const double ve = inner_product(d, r_exact);
                if (vt > top_trained) {
                    top_trained = vt;
                    best_trained = index;
                }
                if (ve > top_exact) {
                    top_exact = ve;
                    best_exact = index;
                }
                ++index;
            });
            CHECK(best_trained == best_exact);
        }
    }
}

TEST_SUITE("discriminator_reward") {
    TEST_CASE("negation with clip respected") {
        Discriminator disc{StateActionTable(1, 3), 10.0};
        disc.g(0, 1) = 0.2877;
        disc.g(0, 2) = 10.0;
        const auto r = discriminator_reward(disc);
        CHECK(r(0, 0) == 0.0);
        CHECK(r(0, 1) == -0.2877);
        CHECK(r(0, 2) == -10.0);
    }
}
