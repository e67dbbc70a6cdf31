// Command-line driver: verify | convert | simulate | sweep | search.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "catkd/harness.hpp"
#include "catkd/schmidt.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitBadConfig = 2;
constexpr int kExitIoError = 3;

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw catkd::ConfigError("cannot open vector file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            lines.push_back(line);
    return lines;
}

Eigen::VectorXd parse_decimals(const std::string& text) {
    std::vector<double> values;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        if (token.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            values.push_back(std::stod(token));
        } catch (...) {
            throw catkd::ConfigError("invalid decimal: " + token);
        }
    }
    if (values.empty()) throw catkd::ConfigError("empty vector");
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = values[i];
    return v;
}

// A vector argument is either inline comma-separated decimals or a path to a
// file holding one decimal array per line (line selects which array).
Eigen::VectorXd parse_vector_arg(const std::string& arg, std::size_t line) {
    if (std::ifstream probe(arg); probe.good()) {
        auto lines = read_lines(arg);
        if (lines.empty()) throw catkd::ConfigError("empty vector file: " + arg);
        return parse_decimals(lines[std::min(line, lines.size() - 1)]);
    }
    return parse_decimals(arg);
}

void emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open output file: " + out_path);
    out << content;
    if (!out) throw std::ios_base::failure("write failed: " + out_path);
}

nlohmann::ordered_json vector_json(const catkd::SchmidtVector& v) {
    auto arr = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.dim(); ++i) arr.push_back(v[i]);
    return arr;
}

int cmd_verify(const std::string& out_path) {
    catkd::VerificationReport report = catkd::verify_reference_constants();
    std::ostringstream text;
    for (const auto& check : report.checks) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-38s %-5s value=%.6f expected %s\n",
                      check.name.c_str(), check.pass ? "PASS" : "FAIL",
                      check.value, check.expected.c_str());
        text << buf;
    }
    emit(text.str(), out_path);
    return report.all_pass ? kExitOk : kExitVerifyFailed;
}

int cmd_convert(const std::string& from_arg, const std::string& to_arg,
                const std::string& out_path) {
    Eigen::VectorXd wb = parse_vector_arg(from_arg, 0);
    // When both refer to the same file, --from is line 1 and --to is line 2.
    Eigen::VectorXd wc = parse_vector_arg(to_arg, from_arg == to_arg ? 1 : 0);
    catkd::SchmidtVector b = catkd::make_schmidt(wb);
    catkd::SchmidtVector c = catkd::make_schmidt(wc);
    catkd::ConversionReport report = catkd::analyze_conversion(b, c);

    nlohmann::ordered_json j;
    j["from"] = vector_json(b);
    j["to"] = vector_json(c);
    j["deterministic"] = report.deterministic;
    j["probability"] = report.probability;
    j["fidelity"] = report.fidelity;
    j["optimal_target"] = vector_json(report.optimal_target);
    emit(j.dump(2) + "\n", out_path);
    return kExitOk;
}

int cmd_simulate(catkd::ExperimentConfig config) {
    catkd::ExperimentStats stats = catkd::run_experiment(config);
    emit(catkd::render_report(config, stats), config.output_path);
    std::fprintf(stderr, "completed %ld trials in %.2fs\n", stats.trials,
                 stats.runtime_seconds);
    return kExitOk;
}

int cmd_sweep(const catkd::ExperimentConfig& config, const std::string& axis,
              const std::string& values_arg) {
    std::vector<long> values;
    std::istringstream in(values_arg);
    std::string token;
    while (std::getline(in, token, ','))
        if (!token.empty()) values.push_back(std::stol(token));
    catkd::SweepResult result =
        catkd::sweep(config, catkd::parse_sweep_axis(axis), values);
    emit(catkd::render_sweep_report(result, config.format), config.output_path);
    return kExitOk;
}

int cmd_search(int dim, long iters, std::uint64_t seed,
               const std::string& out_path) {
    catkd::StateSearchResult result = catkd::search_states(dim, iters, seed);
    nlohmann::ordered_json j;
    j["b"] = vector_json(result.b);
    j["c"] = vector_json(result.c);
    j["fidelity_bound"] = result.fidelity_bound;
    j["iterations"] = result.iterations;
    j["constraints"] = {
        {"bare_conversion_not_deterministic",
         !catkd::majorizes(result.c, result.b)},
        {"self_catalysis", catkd::is_catalyst(result.c, result.b, result.c)},
    };
    emit(j.dump(2) + "\n", out_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"catalysis-based quantum authentication simulator"};
    app.require_subcommand(1);

    catkd::ExperimentConfig config;
    std::string config_path, out_path, format = "csv";
    std::string strategy, dos_mode, impersonated;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", config.master_seed, "master seed");
        cmd->add_option("--trials", config.trials, "Monte Carlo trials");
        cmd->add_option("--out", out_path, "output file (default stdout)");
        cmd->add_option("--format", format, "csv | json");
    };
    auto add_experiment = [&](CLI::App* cmd) {
        add_common(cmd);
        cmd->add_option("--config", config_path, "key=value config file");
        cmd->add_option("-K,--challenge-pairs", config.round.challenge_pairs,
                        "challenge pairs per party (K)");
        cmd->add_option("--K-prime,--tested-pairs", config.round.tested_pairs,
                        "tested pairs per verifier (K')");
        cmd->add_option("--strategy", strategy,
                        "passive | impersonation | dos | type1 | type2");
        cmd->add_option("-L,--budget", config.strategy.budget,
                        "pairs attacked per round");
        cmd->add_option("--type1-option", config.strategy.type1_option, "1|2|3");
        cmd->add_option("--type2-case", config.strategy.type2_case, "1|2|3");
        cmd->add_option("--dos-mode", dos_mode, "corrupt | drop | flood");
        cmd->add_option("--impersonated", impersonated, "alice | bob");
        cmd->add_option("--rounds-per-trial", config.rounds_per_trial,
                        "authentication rounds per trial");
        cmd->add_option("--initial-key-sets", config.initial_key_sets,
                        "reserve key sets");
        cmd->add_option("--threads", config.threads, "worker threads (0=auto)");
    };

    auto* verify = app.add_subcommand("verify", "recompute reference constants");
    verify->add_option("--out", out_path, "output file (default stdout)");

    std::string from_arg, to_arg;
    auto* convert = app.add_subcommand("convert", "analyze a conversion b -> c");
    convert->add_option("--from", from_arg, "source Schmidt weights")->required();
    convert->add_option("--to", to_arg, "target Schmidt weights")->required();
    convert->add_option("--out", out_path, "output file (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment");
    add_experiment(simulate);

    std::string axis, values_arg;
    auto* sweep = app.add_subcommand("sweep", "sweep one parameter axis");
    add_experiment(sweep);
    sweep->add_option("--axis", axis, "K_prime | L | K")->required();
    sweep->add_option("--values", values_arg, "comma-separated values")->required();

    int dim = 5;
    long iters = 1000;
    auto* search = app.add_subcommand("search", "search for lower-fidelity states");
    search->add_option("--dim", dim, "Schmidt dimension (>= 4)");
    search->add_option("--iters", iters, "search iterations");
    search->add_option("--seed", config.master_seed, "search seed");
    search->add_option("--out", out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitBadConfig;
    }

    try {
        if (*verify) return cmd_verify(out_path);
        if (*convert) return cmd_convert(from_arg, to_arg, out_path);

        // Experiment-style commands: file config first, flags override.
        CLI::App* active = *simulate ? static_cast<CLI::App*>(simulate)
                                     : static_cast<CLI::App*>(sweep);
        if (active != nullptr && !config_path.empty()) {
            catkd::ExperimentConfig merged = catkd::parse_config_file(config_path);
            auto set = [&](const std::string& flag) {
                return active->count(flag) > 0;
            };
            if (set("--challenge-pairs"))
                merged.round.challenge_pairs = config.round.challenge_pairs;
            if (set("--tested-pairs"))
                merged.round.tested_pairs = config.round.tested_pairs;
            if (set("--trials")) merged.trials = config.trials;
            if (set("--seed")) merged.master_seed = config.master_seed;
            if (set("--budget")) merged.strategy.budget = config.strategy.budget;
            if (set("--rounds-per-trial"))
                merged.rounds_per_trial = config.rounds_per_trial;
            if (set("--initial-key-sets"))
                merged.initial_key_sets = config.initial_key_sets;
            if (set("--threads")) merged.threads = config.threads;
            if (set("--type1-option"))
                merged.strategy.type1_option = config.strategy.type1_option;
            if (set("--type2-case"))
                merged.strategy.type2_case = config.strategy.type2_case;
            if (!set("--format") &&
                merged.format == catkd::ExperimentConfig::Format::Json)
                format = "json";
            config = merged;
        }
        if (!strategy.empty()) catkd::apply_config_entry(config, "strategy", strategy);
        if (!dos_mode.empty()) catkd::apply_config_entry(config, "dos_mode", dos_mode);
        if (!impersonated.empty())
            catkd::apply_config_entry(config, "impersonated", impersonated);
        catkd::apply_config_entry(config, "format", format);
        if (!out_path.empty()) config.output_path = out_path;

        if (*simulate) return cmd_simulate(config);
        if (*sweep) return cmd_sweep(config, axis, values_arg);
        if (*search) return cmd_search(dim, iters, config.master_seed, out_path);
    } catch (const catkd::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadConfig;
    } catch (const std::ios_base::failure& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIoError;
    }
    return kExitOk;
}
