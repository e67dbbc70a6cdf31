#include "catkd/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "catkd/rng.hpp"

namespace catkd {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

const char* strategy_name(const AttackStrategy& s) {
    switch (s.kind) {
        case AttackStrategy::Kind::Passive: return "passive";
        case AttackStrategy::Kind::Impersonation: return "impersonation";
        case AttackStrategy::Kind::DenialOfService: return "dos";
        case AttackStrategy::Kind::TypeI: return "type1";
        case AttackStrategy::Kind::TypeII: return "type2";
    }
    return "?";
}

struct TrialOutcome {
    bool detected = false;
    bool aborted = false;
    int eve_pairs_bob = 0;
    int key_growth = 0;  // per successful round, 0 if none succeeded
};

TrialOutcome run_trial(const ExperimentConfig& config, long trial_index) {
    RoundConfig rc = config.round;
    rc.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(trial_index), 0x7261696c);
    Session session(rc, config.initial_key_sets);
    auto adversary = make_adversary(config.strategy);

    TrialOutcome outcome;
    for (int r = 0; r < config.rounds_per_trial && session.alive(); ++r) {
        RoundResult result = session.run_round(*adversary);
        if (result.success) {
            outcome.key_growth = result.key_delta;
        } else {
            outcome.aborted = true;
        }
    }
    const EveLedger& ledger = adversary->ledger();
    outcome.detected = ledger.detected;
    outcome.eve_pairs_bob = ledger.pairs_with_bob;
    return outcome;
}

// 95% Wilson score interval; used when either count is small.
std::pair<double, double> wilson_interval(long successes, long n) {
    if (n == 0) return {0.0, 0.0};
    const double z = 1.959963985;
    double p = static_cast<double>(successes) / n;
    double z2n = z * z / n;
    double center = (p + z2n / 2) / (1 + z2n);
    double half = z * std::sqrt(p * (1 - p) / n + z2n / (4.0 * n)) / (1 + z2n);
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace

void ExperimentConfig::validate() const {
    try {
        round.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (rounds_per_trial < 1) throw ConfigError("rounds_per_trial must be >= 1");
    if (initial_key_sets < 1) throw ConfigError("initial_key_sets must be >= 1");
    if (strategy.budget < 0 || strategy.budget > round.challenge_pairs)
        throw ConfigError("L must be in [0, K]");
    if (strategy.type1_option < 1 || strategy.type1_option > 3)
        throw ConfigError("type1_option must be 1, 2 or 3");
    if (strategy.type2_case < 1 || strategy.type2_case > 3)
        throw ConfigError("type2_case must be 1, 2 or 3");
}

void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value) {
    auto to_long = [&](const std::string& v) {
        try {
            return std::stol(v);
        } catch (...) {
            throw ConfigError("invalid number for " + key + ": " + v);
        }
    };
    if (key == "K") config.round.challenge_pairs = static_cast<int>(to_long(value));
    else if (key == "K_prime") config.round.tested_pairs = static_cast<int>(to_long(value));
    else if (key == "allow_zero_tests") config.round.allow_zero_tests = to_long(value) != 0;
    else if (key == "trials") config.trials = to_long(value);
    else if (key == "rounds_per_trial") config.rounds_per_trial = static_cast<int>(to_long(value));
    else if (key == "initial_key_sets") config.initial_key_sets = static_cast<int>(to_long(value));
    else if (key == "master_seed" || key == "seed")
        config.master_seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "threads") config.threads = static_cast<int>(to_long(value));
    else if (key == "L") config.strategy.budget = static_cast<int>(to_long(value));
    else if (key == "type1_option") config.strategy.type1_option = static_cast<int>(to_long(value));
    else if (key == "type2_case") config.strategy.type2_case = static_cast<int>(to_long(value));
    else if (key == "output") config.output_path = value;
    else if (key == "format") {
        if (value == "csv") config.format = ExperimentConfig::Format::Csv;
        else if (value == "json") config.format = ExperimentConfig::Format::Json;
        else throw ConfigError("format must be csv or json");
    } else if (key == "impersonated") {
        if (value == "alice") config.strategy.impersonated = Party::Alice;
        else if (value == "bob") config.strategy.impersonated = Party::Bob;
        else throw ConfigError("impersonated must be alice or bob");
    } else if (key == "dos_mode") {
        if (value == "corrupt") config.strategy.dos_mode = AttackStrategy::DosMode::CorruptResponse;
        else if (value == "drop") config.strategy.dos_mode = AttackStrategy::DosMode::DropMessages;
        else if (value == "flood") config.strategy.dos_mode = AttackStrategy::DosMode::RequestFlood;
        else throw ConfigError("dos_mode must be corrupt, drop or flood");
    } else if (key == "strategy") {
        if (value == "passive") config.strategy.kind = AttackStrategy::Kind::Passive;
        else if (value == "impersonation") config.strategy.kind = AttackStrategy::Kind::Impersonation;
        else if (value == "dos") config.strategy.kind = AttackStrategy::Kind::DenialOfService;
        else if (value == "type1") config.strategy.kind = AttackStrategy::Kind::TypeI;
        else if (value == "type2") config.strategy.kind = AttackStrategy::Kind::TypeII;
        else throw ConfigError("unknown strategy: " + value);
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ExperimentConfig config;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw ConfigError("malformed config line: " + line);
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        apply_config_entry(config, trim(line.substr(0, eq)),
                           trim(line.substr(eq + 1)));
    }
    return config;
}

ExperimentStats run_experiment(const ExperimentConfig& config) {
    config.validate();
    auto t0 = std::chrono::steady_clock::now();

    std::vector<TrialOutcome> outcomes(config.trials);
    int n_threads = config.threads > 0
                        ? config.threads
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    n_threads = static_cast<int>(std::min<long>(n_threads, config.trials));

    // Outcomes are indexed by trial, so the reduction below is independent
    // of thread scheduling.
    auto worker = [&](long begin, long end) {
        for (long t = begin; t < end; ++t) outcomes[t] = run_trial(config, t);
    };
    if (n_threads <= 1) {
        worker(0, config.trials);
    } else {
        std::vector<std::thread> pool;
        long chunk = (config.trials + n_threads - 1) / n_threads;
        for (int w = 0; w < n_threads; ++w) {
            long begin = w * chunk;
            long end = std::min<long>(begin + chunk, config.trials);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    ExperimentStats stats;
    stats.trials = config.trials;
    double fraction_sum = 0.0;
    for (const auto& o : outcomes) {
        if (o.detected) ++stats.detected;
        if (o.aborted) ++stats.aborted;
        ++stats.eve_pairs_histogram[o.eve_pairs_bob];
        fraction_sum += static_cast<double>(o.eve_pairs_bob) /
                        config.round.challenge_pairs;
        if (o.key_growth != 0) stats.key_growth_per_round = o.key_growth;
    }
    stats.detection_rate = static_cast<double>(stats.detected) / stats.trials;
    stats.undetected_rate = 1.0 - stats.detection_rate;
    stats.eve_fraction_mean = fraction_sum / stats.trials;
    double p = stats.detection_rate;
    stats.std_error = std::sqrt(std::max(p * (1 - p), 0.0) / stats.trials);
    if (std::min(stats.detected, stats.trials - stats.detected) < 30) {
        std::tie(stats.ci_low, stats.ci_high) =
            wilson_interval(stats.detected, stats.trials);
    } else {
        stats.ci_low = std::max(0.0, p - 1.959963985 * stats.std_error);
        stats.ci_high = std::min(1.0, p + 1.959963985 * stats.std_error);
    }
    stats.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return stats;
}

namespace {

const char* kCsvHeader =
    "strategy,K,K_prime,L,trials,detected,detection_rate,ci_low,ci_high,"
    "eve_fraction_mean,key_growth,master_seed\n";

std::string csv_row(const ExperimentConfig& config, const ExperimentStats& s) {
    std::ostringstream out;
    out << strategy_name(config.strategy) << ',' << config.round.challenge_pairs
        << ',' << config.round.tested_pairs << ',' << config.strategy.budget
        << ',' << s.trials << ',' << s.detected << ','
        << fmt_double(s.detection_rate) << ',' << fmt_double(s.ci_low) << ','
        << fmt_double(s.ci_high) << ',' << fmt_double(s.eve_fraction_mean)
        << ',' << s.key_growth_per_round << ',' << config.master_seed << '\n';
    return out.str();
}

nlohmann::ordered_json json_report(const ExperimentConfig& config,
                                   const ExperimentStats& s) {
    nlohmann::ordered_json j;
    j["config"] = {
        {"strategy", strategy_name(config.strategy)},
        {"K", config.round.challenge_pairs},
        {"K_prime", config.round.tested_pairs},
        {"L", config.strategy.budget},
        {"trials", s.trials},
        {"rounds_per_trial", config.rounds_per_trial},
        {"initial_key_sets", config.initial_key_sets},
        {"master_seed", config.master_seed},
    };
    j["stats"] = {
        {"detected", s.detected},
        {"aborted", s.aborted},
        {"detection_rate", s.detection_rate},
        {"undetected_rate", s.undetected_rate},
        {"std_error", s.std_error},
        {"ci_low", s.ci_low},
        {"ci_high", s.ci_high},
        {"eve_fraction_mean", s.eve_fraction_mean},
        {"key_growth_per_round", s.key_growth_per_round},
    };
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [pairs, count] : s.eve_pairs_histogram)
        hist[fmt_double(static_cast<double>(pairs) /
                        config.round.challenge_pairs)] = count;
    j["stats"]["eve_fraction_histogram"] = hist;
    return j;
}

}  // namespace

std::string render_report(const ExperimentConfig& config,
                          const ExperimentStats& stats) {
    if (config.format == ExperimentConfig::Format::Csv)
        return std::string(kCsvHeader) + csv_row(config, stats);
    return json_report(config, stats).dump(2) + "\n";
}

SweepAxis parse_sweep_axis(const std::string& name) {
    if (name == "K_prime") return SweepAxis::KPrime;
    if (name == "L") return SweepAxis::L;
    if (name == "K") return SweepAxis::K;
    throw ConfigError("unknown sweep axis: " + name);
}

SweepResult sweep(const ExperimentConfig& base, SweepAxis axis,
                  const std::vector<long>& values) {
    if (values.empty()) throw ConfigError("sweep: values must be non-empty");
    SweepResult result;
    result.axis = axis;
    for (long v : values) {
        ExperimentConfig config = base;
        switch (axis) {
            case SweepAxis::KPrime:
                config.round.tested_pairs = static_cast<int>(v);
                break;
            case SweepAxis::L:
                config.strategy.budget = static_cast<int>(v);
                break;
            case SweepAxis::K:
                config.round.challenge_pairs = static_cast<int>(v);
                break;
        }
        result.rows.push_back({v, config, run_experiment(config)});
    }
    if (axis == SweepAxis::KPrime) {
        for (std::size_t i = 1; i < result.rows.size(); ++i)
            if (result.rows[i].stats.detection_rate <
                result.rows[i - 1].stats.detection_rate - 1e-12)
                result.detection_monotone = false;
    }
    return result;
}

std::string render_sweep_report(const SweepResult& result,
                                ExperimentConfig::Format format) {
    if (format == ExperimentConfig::Format::Csv) {
        std::string out =
            "axis_value," + std::string(kCsvHeader).substr(0);
        std::ostringstream body;
        for (const auto& row : result.rows)
            body << row.axis_value << ',' << csv_row(row.config, row.stats);
        out += body.str();
        out += "# detection_monotone," +
               std::string(result.detection_monotone ? "true" : "false") + "\n";
        return out;
    }
    nlohmann::ordered_json j;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : result.rows) {
        nlohmann::ordered_json r = json_report(row.config, row.stats);
        r["axis_value"] = row.axis_value;
        j["rows"].push_back(r);
    }
    j["detection_monotone"] = result.detection_monotone;
    return j.dump(2) + "\n";
}

VerificationReport verify_reference_constants() {
    auto [b, c] = reference_states();
    VerificationReport report;
    auto add = [&](std::string name, double value, std::string expected,
                   bool pass) {
        report.checks.push_back({std::move(name), value, std::move(expected), pass});
        report.all_pass = report.all_pass && pass;
    };

    double p = conversion_probability(b, c);
    add("conversion_probability", p, "0.5714 +/- 0.001",
        std::abs(p - 0.5714) <= 0.001);

    double p0 = optimal_fidelity(b, c).first;
    add("fidelity_bound", p0, "0.9907 +/- 0.0005", std::abs(p0 - 0.9907) <= 0.0005);

    bool det = majorizes(c, b);
    add("bare_conversion_not_deterministic", det ? 1.0 : 0.0, "false", !det);

    bool cat = majorizes(tensor_schmidt(c, c), tensor_schmidt(b, c));
    add("catalyzed_conversion_deterministic", cat ? 1.0 : 0.0, "true", cat);

    return report;
}

StateSearchResult search_states(int dimension, long iterations,
                                std::uint64_t seed) {
    if (dimension < 4) throw ConfigError("search_states: dimension must be >= 4");
    if (iterations < 1) throw ConfigError("search_states: iterations must be >= 1");

    std::mt19937_64 rng(derive_seed(seed, 0x73656172, 0x6368));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto perturb = [&](const SchmidtVector& v, double sigma) {
        Eigen::VectorXd w = v.coefficients();
        for (Eigen::Index i = 0; i < w.size(); ++i)
            w[i] = std::max(0.0, w[i] + sigma * gauss(rng));
        if (w.sum() <= 0.0) w.setOnes();
        return make_schmidt(w);
    };

    auto feasible = [](const SchmidtVector& b, const SchmidtVector& c) {
        return !majorizes(c, b) && is_catalyst(c, b, c);
    };

    // Seed point: the reference pair, padded or embedded into the requested
    // dimension.
    auto [rb, rc] = reference_states();
    SchmidtVector best_b = dimension >= 5
                               ? rb.padded_to(dimension)
                               : make_schmidt({0.31, 0.31, 0.30, 0.08});
    SchmidtVector best_c = dimension >= 5
                               ? rc.padded_to(dimension)
                               : make_schmidt({0.48, 0.24, 0.14, 0.14});
    double best = feasible(best_b, best_c)
                      ? optimal_fidelity(best_b, best_c).first
                      : 1.0;

    SchmidtVector cur_b = best_b, cur_c = best_c;
    double cur = best;
    for (long it = 0; it < iterations; ++it) {
        double sigma = 0.05 * (0.2 + 0.8 * unif(rng));
        SchmidtVector nb = perturb(cur_b, sigma);
        SchmidtVector nc = perturb(cur_c, sigma);
        if (!feasible(nb, nc)) continue;
        double f = optimal_fidelity(nb, nc).first;
        if (f <= cur) {
            cur = f;
            cur_b = nb;
            cur_c = nc;
            if (f < best) {
                best = f;
                best_b = nb;
                best_c = nc;
            }
        } else if (unif(rng) < 0.01) {
            // occasional uphill move to escape plateaus
            cur = f;
            cur_b = nb;
            cur_c = nc;
        }
    }
    if (!feasible(best_b, best_c)) {
        best_b = rb.padded_to(std::max<Eigen::Index>(dimension, 5));
        best_c = rc.padded_to(std::max<Eigen::Index>(dimension, 5));
        best = optimal_fidelity(best_b, best_c).first;
    }
    return {best_b, best_c, best, iterations};
}

}  // namespace catkd
