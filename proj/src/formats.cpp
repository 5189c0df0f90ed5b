#include "ailboost/formats.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "ailboost/numfmt.hpp"

namespace ailboost {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_bool(std::string_view v) {
    if (v == "true" || v == "1") {
        return true;
    }
    if (v == "false" || v == "0") {
        return false;
    }
    throw Error("not a boolean: '" + std::string(v) + "'");
}

int parse_nonnegative_int(std::string_view v) {
    const long long x = parse_int(v);
    if (x < 0 || x > 1'000'000'000) {
        throw Error("integer out of range: '" + std::string(v) + "'");
    }
    return static_cast<int>(x);
}

std::uint64_t parse_u64(std::string_view v) {
    std::uint64_t x = 0;
    const char* last = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), last, x);
    if (ec != std::errc{} || ptr != last || v.empty()) {
        throw Error("not an unsigned integer: '" + std::string(v) + "'");
    }
    return x;
}

std::string termination_name(const Termination& t) {
    return t.mode == Termination::Mode::geometric ? "geometric" : "horizon";
}

Termination::Mode parse_termination(std::string_view v) {
    if (v == "geometric") {
        return Termination::Mode::geometric;
    }
    if (v == "horizon") {
        return Termination::Mode::horizon;
    }
    throw Error("termination must be 'geometric' or 'horizon', got '" + std::string(v) + "'");
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(ExperimentConfig&, std::string_view)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
std::string str(T v) {
    if constexpr (std::is_floating_point_v<T>) {
        return format_double(v);
    } else if constexpr (std::is_same_v<T, bool>) {
        return v ? "true" : "false";
    } else {
        return std::to_string(v);
    }
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        auto add = [&f](std::string section, std::string key, auto set, auto get) {
            f.push_back({std::move(section), std::move(key), set, get});
        };
        using C = ExperimentConfig;
        using V = std::string_view;

        add("env", "name", [](C& c, V v) { c.env.name = std::string(v); }, [](const C& c) { return c.env.name; });
        add("env", "width", [](C& c, V v) { c.env.width = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.env.width); });
        add("env", "height", [](C& c, V v) { c.env.height = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.env.height); });
        add("env", "length", [](C& c, V v) { c.env.length = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.env.length); });
        add("env", "slip", [](C& c, V v) { c.env.slip = parse_double(v); }, [](const C& c) { return str(c.env.slip); });
        add("env", "gamma", [](C& c, V v) { c.env.discount = parse_double(v); },
            [](const C& c) { return str(c.env.discount); });
        add("env", "start", [](C& c, V v) { c.env.start = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.env.start); });
        add("env", "goal", [](C& c, V v) { c.env.goal = static_cast<int>(parse_int(v)); },
            [](const C& c) { return str(c.env.goal); });

        add("algorithm", "name", [](C& c, V v) { c.algorithm = std::string(v); }, [](const C& c) { return c.algorithm; });
        add("algorithm", "rounds", [](C& c, V v) { c.algo.rounds = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.algo.rounds); });
        add("algorithm", "samples_per_round", [](C& c, V v) { c.algo.samples_per_round = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.algo.samples_per_round); });
        add("algorithm", "mix_weight", [](C& c, V v) { c.algo.mix_weight = parse_double(v); },
            [](const C& c) { return str(c.algo.mix_weight); });
        add("algorithm", "disc_steps", [](C& c, V v) { c.algo.disc_steps = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.algo.disc_steps); });
        add("algorithm", "policy_steps", [](C& c, V v) { c.algo.policy_steps = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.algo.policy_steps); });
        add("algorithm", "disc_lr", [](C& c, V v) { c.algo.disc_lr = parse_double(v); },
            [](const C& c) { return str(c.algo.disc_lr); });
        add("algorithm", "batch_size", [](C& c, V v) { c.algo.batch_size = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.algo.batch_size); });
        add("algorithm", "temperature", [](C& c, V v) { c.algo.temperature = parse_double(v); },
            [](const C& c) { return str(c.algo.temperature); });
        add("algorithm", "clip", [](C& c, V v) { c.algo.clip = parse_double(v); },
            [](const C& c) { return str(c.algo.clip); });
        add("algorithm", "td_lr", [](C& c, V v) { c.algo.td_lr = parse_double(v); },
            [](const C& c) { return str(c.algo.td_lr); });
        add("algorithm", "termination", [](C& c, V v) { c.algo.termination.mode = parse_termination(v); },
            [](const C& c) { return termination_name(c.algo.termination); });
        add("algorithm", "horizon", [](C& c, V v) { c.algo.termination.horizon = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.algo.termination.horizon); });
        add("algorithm", "oracle_mode", [](C& c, V v) { c.algo.oracle_mode = parse_bool(v); },
            [](const C& c) { return str(c.algo.oracle_mode); });
        add("algorithm", "oracle_vi_iters", [](C& c, V v) { c.algo.oracle_vi_iters = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.algo.oracle_vi_iters); });
        add("algorithm", "warm_start_discriminator",
            [](C& c, V v) { c.algo.warm_start_discriminator = parse_bool(v); },
            [](const C& c) { return str(c.algo.warm_start_discriminator); });
        add("algorithm", "buffer_weighting",
            [](C& c, V v) {
                if (v == "ensemble") {
                    c.algo.weighting = BufferWeighting::ensemble;
                } else if (v == "lagged") {
                    c.algo.weighting = BufferWeighting::lagged;
                } else {
                    throw Error("buffer_weighting must be 'ensemble' or 'lagged'");
                }
            },
            [](const C& c) { return std::string(c.algo.weighting == BufferWeighting::ensemble ? "ensemble" : "lagged"); });
        add("algorithm", "max_components",
            [](C& c, V v) {
                const int k = parse_nonnegative_int(v);
                c.algo.max_components = k == 0 ? std::nullopt : std::optional<std::size_t>(k);
            },
            [](const C& c) { return str(c.algo.max_components ? *c.algo.max_components : 0); });
        add("algorithm", "kl_smoothing", [](C& c, V v) { c.algo.kl_smoothing = parse_double(v); },
            [](const C& c) { return str(c.algo.kl_smoothing); });
        add("algorithm", "dac_reward",
            [](C& c, V v) {
                if (v == "logit") {
                    c.algo.dac_reward = DacReward::logit;
                } else if (v == "neg_log_d") {
                    c.algo.dac_reward = DacReward::neg_log_d;
                } else {
                    throw Error("dac_reward must be 'logit' or 'neg_log_d'");
                }
            },
            [](const C& c) { return std::string(c.algo.dac_reward == DacReward::logit ? "logit" : "neg_log_d"); });
        add("algorithm", "bc_smoothing", [](C& c, V v) { c.bc_smoothing = parse_double(v); },
            [](const C& c) { return str(c.bc_smoothing); });

        add("experiment", "expert_trajs", [](C& c, V v) { c.expert_trajs = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.expert_trajs); });
        add("experiment", "expert_termination",
            [](C& c, V v) { c.expert_termination.mode = parse_termination(v); },
            [](const C& c) { return termination_name(c.expert_termination); });
        add("experiment", "expert_horizon",
            [](C& c, V v) { c.expert_termination.horizon = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.expert_termination.horizon); });
        add("experiment", "seeds",
            [](C& c, V v) {
                c.seeds.clear();
                std::string_view rest = v;
                while (!rest.empty()) {
                    const auto comma = rest.find(',');
                    c.seeds.push_back(parse_u64(trim(rest.substr(0, comma))));
                    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
                }
                if (c.seeds.empty()) {
                    throw Error("seeds list is empty");
                }
            },
            [](const C& c) {
                std::string out;
                for (std::size_t i = 0; i < c.seeds.size(); ++i) {
                    out += (i ? "," : "") + std::to_string(c.seeds[i]);
                }
                return out;
            });
        add("experiment", "output", [](C& c, V v) { c.output = std::string(v); }, [](const C& c) { return c.output; });
        add("experiment", "expert_dataset", [](C& c, V v) { c.expert_dataset = std::string(v); },
            [](const C& c) { return c.expert_dataset; });
        add("experiment", "eval_episodes", [](C& c, V v) { c.eval_episodes = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.eval_episodes); });
        add("experiment", "eval_horizon", [](C& c, V v) { c.eval_horizon = parse_nonnegative_int(v); },
            [](const C& c) { return str(c.eval_horizon); });
        return f;
    }();
    return table;
}

std::map<std::string, std::string> parse_header(const std::string& line, const std::vector<std::string>& keys) {
    std::map<std::string, std::string> out;
    std::istringstream in(line);
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) {
            throw Error("malformed header token '" + token + "'");
        }
        out[token.substr(0, eq)] = token.substr(eq + 1);
    }
    for (const auto& k : keys) {
        if (!out.count(k)) {
            throw Error("header is missing '" + k + "'");
        }
    }
    if (out.size() != keys.size()) {
        throw Error("header has unexpected fields: '" + line + "'");
    }
    if (out["version"] != "1") {
        throw Error("unsupported file version " + out["version"]);
    }
    return out;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        out.push_back(tok);
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::vector<std::string> algorithm_names() {
    return {"ailboost", "dac", "bc", "gail"};
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::set<std::string> known_sections;
    for (const auto& f : fields()) {
        known_sections.insert(f.section);
    }
    std::set<std::string> seen;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw Error(where + "malformed section header");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!known_sections.count(section)) {
                throw Error(where + "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(where + "expected 'key = value'");
        }
        if (section.empty()) {
            throw Error(where + "key outside any section");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        auto it = std::find_if(fields().begin(), fields().end(),
                               [&](const Field& f) { return f.section == section && f.key == key; });
        if (it == fields().end()) {
            throw Error(where + "unknown key '" + key + "' in [" + section + "]");
        }
        if (!seen.insert(section + "." + key).second) {
            throw Error(where + "duplicate key '" + key + "'");
        }
        try {
            it->set(config, value);
        } catch (const Error& e) {
            throw Error(where + e.what());
        }
    }
    const auto names = algorithm_names();
    if (std::find(names.begin(), names.end(), config.algorithm) == names.end()) {
        throw Error("unknown algorithm '" + config.algorithm + "'");
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config(read_file(path));
}

std::string serialize_config(const ExperimentConfig& config) {
    std::ostringstream out;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            out << (section.empty() ? "" : "\n") << "[" << f.section << "]\n";
            section = f.section;
        }
        out << f.key << " = " << f.get(config) << "\n";
    }
    return out.str();
}

void write_dataset(std::ostream& out, const ExpertDataset& data) {
    out << "version=1 env=" << data.env_name << " gamma=" << format_double(data.discount)
        << " records=" << data.records.size() << "\n";
    for (const auto& r : data.records) {
        out << r.episode << ' ' << r.step << ' ' << r.state << ' ' << r.action << ' ' << format_double(r.reward) << ' '
            << r.next_state << ' ' << (r.terminal ? 1 : 0) << '\n';
    }
}

ExpertDataset read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("dataset: missing header");
    }
    auto header = parse_header(line, {"version", "env", "gamma", "records"});
    ExpertDataset data;
    data.env_name = header["env"];
    data.discount = parse_double(header["gamma"]);
    const long long n = parse_int(header["records"]);
    if (n < 0) {
        throw Error("dataset: negative record count");
    }
    data.records.reserve(static_cast<std::size_t>(n));
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto tok = split_ws(line);
        if (tok.size() != 7) {
            throw Error("dataset: record " + std::to_string(data.records.size()) + " needs 7 fields");
        }
        LoggedStep r;
        r.episode = static_cast<int>(parse_int(tok[0]));
        r.step = static_cast<int>(parse_int(tok[1]));
        r.state = static_cast<int>(parse_int(tok[2]));
        r.action = static_cast<int>(parse_int(tok[3]));
        r.reward = parse_double(tok[4]);
        r.next_state = static_cast<int>(parse_int(tok[5]));
        const long long done = parse_int(tok[6]);
        if (done != 0 && done != 1) {
            throw Error("dataset: done flag must be 0 or 1");
        }
        r.terminal = done == 1;
        data.records.push_back(r);
    }
    if (static_cast<long long>(data.records.size()) != n) {
        throw Error("dataset: header announces " + std::to_string(n) + " records, found " +
                    std::to_string(data.records.size()));
    }
    return data;
}

void save_dataset(const std::string& path, const ExpertDataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    write_dataset(out, data);
}

ExpertDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read '" + path + "'");
    }
    return read_dataset(in);
}

void write_ensemble(std::ostream& out, const PolicyEnsemble& ensemble) {
    if (ensemble.components.empty()) {
        throw Error("cannot serialize an empty ensemble");
    }
    const auto& first = ensemble.components.front().policy;
    out << "version=1 components=" << ensemble.size() << " states=" << first.num_states()
        << " actions=" << first.num_actions() << "\n";
    for (const auto& c : ensemble.components) {
        out << "alpha=" << format_double(c.weight) << "\n";
        for (int s = 0; s < c.policy.num_states(); ++s) {
            for (int a = 0; a < c.policy.num_actions(); ++a) {
                out << (a ? " " : "") << format_double(c.policy(s, a));
            }
            out << "\n";
        }
    }
}

PolicyEnsemble read_ensemble(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("ensemble: missing header");
    }
    auto header = parse_header(line, {"version", "components", "states", "actions"});
    const long long n = parse_int(header["components"]);
    const long long S = parse_int(header["states"]);
    const long long A = parse_int(header["actions"]);
    if (n <= 0 || S <= 0 || A <= 0) {
        throw Error("ensemble: header counts must be positive");
    }
    PolicyEnsemble ensemble;
    for (long long i = 0; i < n; ++i) {
        if (!std::getline(in, line) || line.rfind("alpha=", 0) != 0) {
            throw Error("ensemble: expected 'alpha=' line for component " + std::to_string(i));
        }
        EnsembleComponent c;
        c.weight = parse_double(std::string_view(line).substr(6));
        c.policy.probs = StateActionTable(static_cast<int>(S), static_cast<int>(A));
        for (long long s = 0; s < S; ++s) {
            if (!std::getline(in, line)) {
                throw Error("ensemble: truncated policy rows");
            }
            const auto tok = split_ws(line);
            if (static_cast<long long>(tok.size()) != A) {
                throw Error("ensemble: policy row has the wrong width");
            }
            for (long long a = 0; a < A; ++a) {
                c.policy.probs(static_cast<int>(s), static_cast<int>(a)) = parse_double(tok[a]);
            }
        }
        ensemble.components.push_back(std::move(c));
    }
    require_valid_weights(ensemble);
    return ensemble;
}

void save_ensemble(const std::string& path, const PolicyEnsemble& ensemble) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    write_ensemble(out, ensemble);
}

PolicyEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read '" + path + "'");
    }
    return read_ensemble(in);
}

std::string metrics_row(const std::string& algo, const std::string& env, std::uint64_t seed,
                        const IterationMetrics& m) {
    std::string row = algo + "," + env + "," + std::to_string(seed) + "," + std::to_string(m.round) + "," +
                      std::to_string(m.env_steps) + "," + format_double(m.reverse_kl) + "," +
                      format_double(m.disc_objective) + "," + format_double(m.mean_return) + "," +
                      format_double(m.normalized_score) + "," + format_double(m.fw_gap);
    return row;
}

void write_metrics(std::ostream& out, const std::string& algo, const std::string& env, std::uint64_t seed,
                   const std::vector<IterationMetrics>& metrics, bool with_header) {
    if (with_header) {
        out << kMetricsHeader << '\n' << std::flush;
    }
    for (const auto& m : metrics) {
        const std::string row = metrics_row(algo, env, seed, m) + "\n";
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
        out.flush();
    }
}

std::vector<MetricsRow> read_metrics(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader) {
        throw Error("metrics: missing or unexpected header");
    }
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 10) {
            throw Error("metrics: row " + std::to_string(rows.size() + 1) + " has " + std::to_string(f.size()) +
                        " fields");
        }
        MetricsRow r;
        r.algo = f[0];
        r.env = f[1];
        r.seed = parse_u64(f[2]);
        r.metrics.round = static_cast<int>(parse_int(f[3]));
        r.metrics.env_steps = parse_int(f[4]);
        r.metrics.reverse_kl = parse_double(f[5]);
        r.metrics.disc_objective = parse_double(f[6]);
        r.metrics.mean_return = parse_double(f[7]);
        r.metrics.normalized_score = parse_double(f[8]);
        r.metrics.fw_gap = parse_double(f[9]);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace ailboost
