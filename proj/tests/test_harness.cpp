#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ailboost/experiment.hpp"
#include "ailboost/formats.hpp"
#include "fixtures.hpp"

using namespace ailboost;
using namespace fixtures;

namespace {

std::string dataset_bytes(const ExpertDataset& data) {
    std::ostringstream out;
    write_dataset(out, data);
    return out.str();
}

std::string ensemble_bytes(const PolicyEnsemble& ensemble) {
    std::ostringstream out;
    write_ensemble(out, ensemble);
    return out.str();
}

ExperimentConfig tiny_config() {
    ExperimentConfig c;
    c.env.width = 3;
    c.env.height = 3;
    c.env.discount = 0.9;
    c.algo.rounds = 4;
    c.algo.samples_per_round = 100;
    c.algo.disc_steps = 5;
    c.algo.policy_steps = 10;
    c.algo.batch_size = 32;
    c.expert_trajs = 2;
    c.expert_termination = Termination::fixed_horizon(20);
    return c;
}

/// Records the buffer contents every time the stream is flushed.
class SnapshotBuf : public std::stringbuf {
public:
    std::vector<std::string> snapshots;

protected:
    int sync() override {
        snapshots.push_back(str());
        return 0;
    }
};

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "ailboost_harness_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_SUITE("build_env") {
    TEST_CASE("sizes") {
        EnvSpec chain;
        chain.name = "chain";
        chain.length = 5;
        const auto c = build_env(chain);
        CHECK(c.num_states == 5);
        CHECK(c.num_actions == 2);
        const auto g = build_env(EnvSpec{});
        CHECK(g.num_states == 25);
        CHECK(g.num_actions == 4);
    }

    TEST_CASE("slip moves succeed with probability 0.8 and slip laterally with 0.1 each") {
        EnvSpec spec;
        spec.name = "gridworld_slip";
        spec.slip = 0.2;
        const auto mdp = build_env(spec);
        // Centre cell 12 of the 5x5 grid; up goes to 7, left to 11, right to 13.
        CHECK(mdp.prob(12, 0, 7) == doctest::Approx(0.8).epsilon(1e-15));
        CHECK(mdp.prob(12, 0, 11) == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(mdp.prob(12, 0, 13) == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(mdp.prob(12, 0, 17) == 0.0);
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                double total = 0.0;
                for (double p : mdp.next_dist(s, a)) {
                    total += p;
                }
                CHECK(std::abs(total - 1.0) <= 1e-12);
            }
        }
    }

    TEST_CASE("every zoo environment validates") {
        for (const auto& name : env_names()) {
            EnvSpec spec;
            spec.name = name;
            spec.slip = name == "gridworld_slip" ? 0.2 : 0.0;
            CHECK(validate_mdp(build_env(spec)).ok());
        }
    }

    TEST_CASE("malformed specs rejected") {
        EnvSpec unknown;
        unknown.name = "maze";
        CHECK_THROWS_AS(build_env(unknown), Error);
        EnvSpec short_chain;
        short_chain.name = "chain";
        short_chain.length = 1;
        CHECK_THROWS_AS(build_env(short_chain), Error);
        EnvSpec bad_goal;
        bad_goal.goal = 25;
        CHECK_THROWS_AS(build_env(bad_goal), Error);
        EnvSpec bad_slip;
        bad_slip.name = "gridworld_slip";
        bad_slip.slip = 1.0;
        CHECK_THROWS_AS(build_env(bad_slip), Error);
        EnvSpec bad_gamma;
        bad_gamma.discount = 1.0;
        CHECK_THROWS_AS(build_env(bad_gamma), Error);
    }
}

TEST_SUITE("generate_expert") {
    TEST_CASE("Toggle-2 returns") {
        const auto bundle = generate_expert(toggle2(), 3, Termination::fixed_horizon(5), 1);
        // Go, then stay in the rewarding state: V(0) = 0.5 * 1 / (1 - 0.5).
        CHECK(bundle.expert_return == doctest::Approx(1.0).epsilon(1e-12));
        // Uniform policy, solved by hand: V0 = (V0 + V1) / 4, V1 = 1 + (V0 + V1) / 4.
        CHECK(bundle.random_return == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(bundle.expert_return == doctest::Approx(enumerated_optimal_values(toggle2(), toggle_reward())[0]));
        CHECK(bundle.data.records.size() == 15);
    }

    TEST_CASE("zero trajectories rejected") {
        CHECK_THROWS_AS(generate_expert(toggle2(), 0, Termination::geometric(), 1), Error);
    }

    TEST_CASE("missing reward rejected") {
        auto mdp = toggle2();
        mdp.env_reward.reset();
        CHECK_THROWS_AS(generate_expert(mdp, 1, Termination::geometric(), 1), Error);
    }

    TEST_CASE("fixed seed gives identical bytes") {
        const auto mdp = build_env(EnvSpec{});
        const auto a = generate_expert(mdp, 4, Termination::geometric(), 9);
        const auto b = generate_expert(mdp, 4, Termination::geometric(), 9);
        const auto c = generate_expert(mdp, 4, Termination::geometric(), 10);
        CHECK(dataset_bytes(a.data) == dataset_bytes(b.data));
        CHECK(dataset_bytes(a.data) != dataset_bytes(c.data));
    }

    TEST_CASE("logged steps chain within an episode") {
        const auto mdp = build_env(EnvSpec{"gridworld_slip", 5, 5, 5, 0.2, 0.99, 0, -1});
        const auto bundle = generate_expert(mdp, 5, Termination::fixed_horizon(40), 2);
        const auto& r = bundle.data.records;
        for (std::size_t k = 0; k + 1 < r.size(); ++k) {
            if (r[k + 1].episode == r[k].episode) {
                CHECK(r[k + 1].step == r[k].step + 1);
                CHECK(r[k + 1].state == r[k].next_state);
            }
        }
    }
}

TEST_SUITE("config") {
    TEST_CASE("round trip is a fixed point") {
        auto c = tiny_config();
        c.env.name = "gridworld_slip";
        c.env.slip = 0.15;
        c.algorithm = "dac";
        c.algo.mix_weight = 0.1;
        c.algo.temperature = 1.0 / 3.0;
        c.algo.max_components = 7;
        c.algo.weighting = BufferWeighting::lagged;
        c.algo.dac_reward = DacReward::neg_log_d;
        c.seeds = {3, 1, 18446744073709551615ull};
        c.output = "out/run.csv";
        const auto text = serialize_config(c);
        const auto parsed = parse_config(text);
        CHECK(serialize_config(parsed) == text);
        CHECK(parsed.env == c.env);
        CHECK(parsed.algo.temperature == c.algo.temperature);
        CHECK(parsed.seeds == c.seeds);
        CHECK(parsed.algo.max_components == c.algo.max_components);
    }

    TEST_CASE("comments, blank lines and defaults") {
        const auto c = parse_config("# run\n\n[env]\nname = chain  # trailing\nlength = 7\n[algorithm]\nname = bc\n");
        CHECK(c.env.name == "chain");
        CHECK(c.env.length == 7);
        CHECK(c.algorithm == "bc");
        CHECK(c.algo.rounds == AilboostConfig{}.rounds);
        CHECK_FALSE(parse_config("[algorithm]\nmax_components = 0\n").algo.max_components.has_value());
    }

    TEST_CASE("errors name the line") {
        const auto message = [](const std::string& text) {
            try {
                parse_config(text);
            } catch (const Error& e) {
                return std::string(e.what());
            }
            return std::string("no error");
        };
        CHECK(message("[env]\nwidth = five\n").find("config line 2") == 0);
        CHECK(message("[env]\ncolour = red\n").find("unknown key") != std::string::npos);
        CHECK(message("[world]\n").find("unknown section") != std::string::npos);
        CHECK(message("[env]\nwidth = 3\nwidth = 4\n").find("duplicate key") != std::string::npos);
        CHECK(message("width = 3\n").find("outside any section") != std::string::npos);
        CHECK(message("[env]\nwidth\n").find("key = value") != std::string::npos);
        CHECK(message("[algorithm]\nname = sac\n").find("unknown algorithm") != std::string::npos);
        CHECK(message("[algorithm]\ntermination = forever\n").find("termination") != std::string::npos);
        CHECK(message("[experiment]\nseeds = \n") != "no error");
        CHECK(message("[experiment]\nseeds = 1,,2\n") != "no error");
    }

    TEST_CASE("missing file rejected") {
        CHECK_THROWS_AS(load_config(scratch("does_not_exist.cfg").string()), Error);
    }
}

TEST_SUITE("dataset_io") {
    TEST_CASE("bit-exact round trip") {
        const auto mdp = build_env(EnvSpec{"gridworld_slip", 5, 5, 5, 0.2, 0.99, 0, -1});
        auto bundle = generate_expert(mdp, 3, Termination::geometric(), 4);
        bundle.data.records[0].reward = 0.1 + 0.2;  // not exactly representable in short decimal
        std::istringstream in(dataset_bytes(bundle.data));
        const auto back = read_dataset(in);
        CHECK(back.records == bundle.data.records);
        CHECK(back.env_name == bundle.data.env_name);
        CHECK(back.discount == bundle.data.discount);
        CHECK(dataset_bytes(back) == dataset_bytes(bundle.data));
    }

    TEST_CASE("file round trip") {
        const auto bundle = generate_expert(toggle2(), 2, Termination::fixed_horizon(4), 1);
        const auto path = scratch("toggle.dat").string();
        save_dataset(path, bundle.data);
        CHECK(load_dataset(path).records == bundle.data.records);
    }

    TEST_CASE("schema violations rejected") {
        const auto parse = [](const std::string& text) {
            std::istringstream in(text);
            return read_dataset(in);
        };
        CHECK_THROWS_AS(parse(""), Error);
        CHECK_THROWS_AS(parse("version=2 env=x gamma=0.5 records=0\n"), Error);
        CHECK_THROWS_AS(parse("version=1 env=x gamma=0.5\n"), Error);
        CHECK_THROWS_AS(parse("version=1 env=x gamma=0.5 records=2\n0 0 0 1 0 1 0\n"), Error);
        CHECK_THROWS_AS(parse("version=1 env=x gamma=0.5 records=1\n0 0 0 1 0 1\n"), Error);
        CHECK_THROWS_AS(parse("version=1 env=x gamma=0.5 records=1\n0 0 0 1 0 1 2\n"), Error);
        CHECK(parse("version=1 env=x gamma=0.5 records=1\n0 0 0 1 0 1 1\n").records.size() == 1);
    }
}

TEST_SUITE("ensemble_io") {
    TEST_CASE("round trip preserves weights and policies exactly") {
        Rng rng(5);
        auto e = init_ensemble(random_policy(4, 3, rng));
        e = mix_in(e, random_policy(4, 3, rng), 0.05);
        e = mix_in(e, random_policy(4, 3, rng), 1.0 / 3.0);
        std::istringstream in(ensemble_bytes(e));
        const auto back = read_ensemble(in);
        REQUIRE(back.size() == e.size());
        CHECK(back.weights() == e.weights());
        for (std::size_t i = 0; i < e.size(); ++i) {
            CHECK(back.components[i].policy.probs == e.components[i].policy.probs);
        }
    }

    TEST_CASE("truncated or invalid files rejected") {
        const auto e = mix_in(init_ensemble(always(kStay)), always(kGo), 0.5);
        const auto text = ensemble_bytes(e);
        std::istringstream truncated(text.substr(0, text.size() - 6));
        CHECK_THROWS_AS(read_ensemble(truncated), Error);
        std::string bad_weights = text;
        bad_weights.replace(bad_weights.find("alpha=0.5"), 9, "alpha=0.7");
        std::istringstream in(bad_weights);
        CHECK_THROWS_AS(read_ensemble(in), Error);
        std::ostringstream out;
        CHECK_THROWS_AS(write_ensemble(out, PolicyEnsemble{}), Error);
    }
}

TEST_SUITE("metrics_io") {
    TEST_CASE("rows conform to the header and round trip") {
        std::vector<IterationMetrics> metrics;
        for (int i = 1; i <= 5; ++i) {
            metrics.push_back({i, 1000 * i, 1.0 / i, -1.0 + 0.1 * i, 0.3 * i, 0.2 * i, 1e-3 / i});
        }
        std::ostringstream out;
        write_metrics(out, "ailboost", "gridworld", 7, metrics);
        const auto text = out.str();
        CHECK(text.rfind(std::string(kMetricsHeader) + "\n", 0) == 0);
        std::istringstream in(text);
        const auto rows = read_metrics(in);
        REQUIRE(rows.size() == 5);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(rows[i].algo == "ailboost");
            CHECK(rows[i].seed == 7);
            CHECK(rows[i].metrics.round == metrics[i].round);
            CHECK(rows[i].metrics.env_steps == metrics[i].env_steps);
            CHECK(rows[i].metrics.reverse_kl == metrics[i].reverse_kl);
            CHECK(rows[i].metrics.fw_gap == metrics[i].fw_gap);
        }
    }

    TEST_CASE("every flush ends on a complete row") {
        std::vector<IterationMetrics> metrics(8);
        for (int i = 0; i < 8; ++i) {
            metrics[i].round = i + 1;
            metrics[i].reverse_kl = std::sqrt(2.0) * i;
        }
        SnapshotBuf buf;
        std::ostream out(&buf);
        write_metrics(out, "dac", "chain", 1, metrics);
        REQUIRE(buf.snapshots.size() == 9);
        for (std::size_t k = 0; k < buf.snapshots.size(); ++k) {
            const auto& snap = buf.snapshots[k];
            CHECK(snap.back() == '\n');
            std::istringstream in(snap);
            CHECK(read_metrics(in).size() == k);
        }
    }

    TEST_CASE("malformed files rejected") {
        std::istringstream no_header("ailboost,gridworld,1,1,100,0,0,0,0,0\n");
        CHECK_THROWS_AS(read_metrics(no_header), Error);
        std::istringstream short_row(std::string(kMetricsHeader) + "\nailboost,gridworld,1,1,100,0,0\n");
        CHECK_THROWS_AS(read_metrics(short_row), Error);
        std::istringstream bad_number(std::string(kMetricsHeader) + "\nailboost,gridworld,1,x,100,0,0,0,0,0\n");
        CHECK_THROWS_AS(read_metrics(bad_number), Error);
    }
}

TEST_SUITE("experiment") {
    TEST_CASE("schedule presets") {
        const auto presets = schedule_presets();
        REQUIRE(presets.size() == 4);
        CHECK(presets[0].name == "policy1000_disc100");
        CHECK(presets[1].name == "policy1000_disc10");
        CHECK(presets[2].name == "policy1000_disc1");
        CHECK(presets[3].name == "policy100_disc100");
        CHECK(presets[2].policy_steps == 1000);
        CHECK(presets[2].disc_steps == 1);
        CHECK(presets[3].policy_steps == 100);
        CHECK(presets[3].disc_steps == 100);
    }

    TEST_CASE("steps to threshold") {
        std::vector<IterationMetrics> m(3);
        m[0].env_steps = 100;
        m[0].normalized_score = 0.5;
        m[1].env_steps = 200;
        m[1].normalized_score = 0.85;
        m[2].env_steps = 300;
        m[2].normalized_score = 0.9;
        CHECK(steps_to_threshold(m, 0.8) == 200);
        CHECK(steps_to_threshold(m, 0.95) == -1);
    }

    TEST_CASE("every algorithm is deterministic given the seed") {
        for (const auto& algo : algorithm_names()) {
            auto c = tiny_config();
            c.algorithm = algo;
            const auto a = metrics_csv(c, 11, run_experiment(c, 11));
            const auto b = metrics_csv(c, 11, run_experiment(c, 11));
            CHECK(a == b);
            std::istringstream in(a);
            const auto rows = read_metrics(in);
            CHECK(rows.size() == (algo == "bc" ? 1u : 4u));
        }
    }

    TEST_CASE("demonstrations can come from a dataset file") {
        auto c = tiny_config();
        const auto generated = prepare_experiment(c, 3);
        const auto path = scratch("expert.dat").string();
        save_dataset(path, generated.expert.data);
        c.expert_dataset = path;
        const auto loaded = prepare_experiment(c, 99);
        CHECK(loaded.expert.data.records == generated.expert.data.records);
        CHECK(loaded.score.expert_return == generated.score.expert_return);

        auto mismatched = c;
        mismatched.env.name = "chain";
        CHECK_THROWS_AS(prepare_experiment(mismatched, 3), Error);
        auto missing = c;
        missing.expert_dataset = scratch("absent.dat").string();
        CHECK_THROWS_AS(prepare_experiment(missing, 3), Error);
    }

    TEST_CASE("sweep writes one file per cell") {
        auto c = tiny_config();
        c.algo.rounds = 2;
        const auto dir = scratch("sweep").string();
        std::filesystem::remove_all(dir);
        const auto cells = sweep_schedules(c, {1, 2}, dir);
        REQUIRE(cells.size() == 8);
        for (const auto& cell : cells) {
            CHECK(cell.error.empty());
            CHECK(cell.metrics.size() == 2);
            std::ifstream in(cell.path);
            CHECK(read_metrics(in).size() == 2);
        }
    }
}
