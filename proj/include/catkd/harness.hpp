// Batch experiment driver: seeded Monte Carlo over rounds and attacks,
// detection statistics with confidence intervals, report emission, and
// verification of the protocol's reference constants.

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "catkd/adversary.hpp"
#include "catkd/protocol.hpp"
#include "catkd/schmidt.hpp"

namespace catkd {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    RoundConfig round;  // K, K'; seed is overridden per trial
    long trials = 1000;
    int rounds_per_trial = 1;
    int initial_key_sets = 1;
    AttackStrategy strategy;
    std::uint64_t master_seed = 0;
    std::string output_path;  // empty: stdout only
    enum class Format { Csv, Json } format = Format::Csv;
    int threads = 0;  // 0: hardware concurrency

    void validate() const;  // throws ConfigError
};

// key = value lines, '#' comments. Throws ConfigError on unknown keys or
// malformed values.
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

struct ExperimentStats {
    long trials = 0;
    long detected = 0;    // trials ending in a detection event
    long aborted = 0;     // trials with any aborted round (includes timeouts)
    double detection_rate = 0.0;
    double undetected_rate = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0, ci_high = 0.0;  // 95%; Wilson for small counts
    std::map<int, long> eve_pairs_histogram;  // pairs with Bob -> trial count
    double eve_fraction_mean = 0.0;           // mean of pairs_with_bob / K
    int key_growth_per_round = 0;             // observed on successful rounds
    double runtime_seconds = 0.0;             // not part of written reports
};

ExperimentStats run_experiment(const ExperimentConfig& config);

// Report bytes are a pure function of config and stats (runtime excluded),
// so identical seeds give identical files.
std::string render_report(const ExperimentConfig& config,
                          const ExperimentStats& stats);

enum class SweepAxis { KPrime, L, K };
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepRow {
    long axis_value;
    ExperimentConfig config;
    ExperimentStats stats;
};

struct SweepResult {
    SweepAxis axis;
    std::vector<SweepRow> rows;
    bool detection_monotone = true;  // nondecreasing along the axis
};

SweepResult sweep(const ExperimentConfig& base, SweepAxis axis,
                  const std::vector<long>& values);
std::string render_sweep_report(const SweepResult& result,
                                ExperimentConfig::Format format);

struct VerificationCheck {
    std::string name;
    double value;
    std::string expected;
    bool pass;
};

struct VerificationReport {
    std::vector<VerificationCheck> checks;
    bool all_pass = true;
};

// Recomputes the protocol's four load-bearing constants from scratch.
VerificationReport verify_reference_constants();

struct StateSearchResult {
    SchmidtVector b;
    SchmidtVector c;
    double fidelity_bound;
    long iterations;
};

// Randomized search for state pairs with a lower fidelity ceiling than the
// reference pair, under the protocol's constraints: c must not majorize b
// while a shared c pair catalyzes b -> c. Best effort; falls back to the
// reference pair when nothing better turns up.
StateSearchResult search_states(int dimension, long iterations,
                                std::uint64_t seed);

}  // namespace catkd
