// Command-line front end: evolve | stationary | measure | bell | simulate.
// Exit codes: 0 success, 2 parse/usage error, 3 precondition or convergence
// error, 4 statistical failure in simulate.

#include "merw/merw.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitStatistical = 4;

// Relative --output paths resolve against $MERW_OUTPUT_DIR when set.
void write_output(const std::string& content, const merw::OutputSpec& spec) {
    if (!spec.path) {
        std::cout << content;
        return;
    }
    std::filesystem::path p = *spec.path;
    if (p.is_relative()) {
        if (const char* dir = std::getenv("MERW_OUTPUT_DIR")) p = std::filesystem::path(dir) / p;
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) throw merw::ParseError("cannot open output file: " + p.string());
    out << content;
}

struct CommandOpts {
    std::string config;
    std::string format;
    std::string output;
};

void add_common(CLI::App* cmd, CommandOpts& opts) {
    cmd->add_option("config", opts.config, "experiment file (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--format", opts.format, "output format: text, jsonl or csv (overrides the file)")
        ->check(CLI::IsMember({"text", "jsonl", "csv"}));
    cmd->add_option("--output", opts.output, "output file (overrides the file; default stdout)");
}

merw::ExperimentFile load(const CommandOpts& opts) {
    merw::ExperimentFile exp = merw::load_experiment(opts.config);
    if (!opts.format.empty()) exp.output.format = merw::parse_format(opts.format);
    if (!opts.output.empty()) exp.output.path = opts.output;
    return exp;
}

merw::MeasurementPair pair_from_name(const std::string& name, int dimension) {
    if (dimension != 3)
        throw merw::PreconditionError("--pair names xy/yz/zx apply to 3-property graphs; this graph has " +
                                      std::to_string(dimension));
    if (name == "xy") return {0, 1};
    if (name == "yz") return {1, 2};
    if (name == "zx") return {2, 0};
    throw merw::ParseError("unknown pair \"" + name + "\"");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"maximal-entropy random walk lab: exact path ensembles, one-step measurements, Bell sums"};
    app.require_subcommand(1);

    CommandOpts evolve_opts, stationary_opts, measure_opts, bell_opts, simulate_opts;
    long long steps = 0;
    std::string pair_name;
    std::string bell_mode = "measured";
    std::uint64_t seed_override = 0;
    std::uint64_t samples_override = 0;
    int workers_override = 0;
    bool tamper = false;

    CLI::App* cmd_evolve = app.add_subcommand("evolve", "exact path-count table n_0..n_T");
    add_common(cmd_evolve, evolve_opts);
    cmd_evolve->add_option("--steps", steps, "number of time steps T")->required()->check(CLI::NonNegativeNumber);

    CLI::App* cmd_stationary = app.add_subcommand("stationary", "arrival distribution, growth rate and support");
    add_common(cmd_stationary, stationary_opts);

    CLI::App* cmd_measure = app.add_subcommand("measure", "one-step measurement ensemble for one pair");
    add_common(cmd_measure, measure_opts);
    cmd_measure->add_option("--pair", pair_name, "measured pair: xy, yz or zx")
        ->required()
        ->check(CLI::IsMember({"xy", "yz", "zx"}));

    CLI::App* cmd_bell = app.add_subcommand("bell", "sum of pairwise equality probabilities and verdict");
    add_common(cmd_bell, bell_opts);
    cmd_bell->add_option("--mode", bell_mode, "measured (one-step ensembles) or unmeasured (arrival readout)")
        ->check(CLI::IsMember({"measured", "unmeasured"}));

    CLI::App* cmd_simulate = app.add_subcommand("simulate", "Monte Carlo validation of all exact quantities");
    add_common(cmd_simulate, simulate_opts);
    cmd_simulate->add_option("--seed", seed_override, "RNG seed (overrides the file)");
    cmd_simulate->add_option("--samples", samples_override, "sample count (overrides the file)")
        ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
    cmd_simulate->add_option("--workers", workers_override, "parallel worker streams (overrides the file)")
        ->check(CLI::Range(1, merw::kMaxWorkers));
    cmd_simulate->add_flag("--tamper", tamper, "test hook: shift exact values to force a statistical failure")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitParse;
    }

    try {
        if (*cmd_evolve) {
            merw::ExperimentFile exp = load(evolve_opts);
            std::vector<merw::CountVector> rows;
            rows.push_back(merw::start_counts(exp.walk));
            for (long long t = 1; t <= steps; ++t) rows.push_back(merw::evolve(exp.walk.graph, rows.back(), 1));
            write_output(merw::render_evolve(exp.walk.graph, rows, exp.output.format, exp.walk.label), exp.output);
            return kExitOk;
        }
        if (*cmd_stationary) {
            merw::ExperimentFile exp = load(stationary_opts);
            merw::ArrivalOptions options;
            options.mode = exp.mode;
            const auto arrival = merw::arrival_distribution(exp.walk.graph, merw::start_counts(exp.walk), options);
            write_output(merw::render_stationary(arrival, exp.output.format, exp.walk.label), exp.output);
            return kExitOk;
        }
        if (*cmd_measure) {
            merw::ExperimentFile exp = load(measure_opts);
            const merw::MeasurementPair pair = pair_from_name(pair_name, exp.walk.graph.dimension());
            merw::ArrivalOptions options;
            options.mode = exp.mode;
            const auto arrival = merw::arrival_distribution(exp.walk.graph, merw::start_counts(exp.walk), options);
            const auto ensemble = merw::measure(exp.walk.graph, arrival, pair);
            const auto outcome = merw::equality_probability(ensemble);
            write_output(merw::render_measure(ensemble, outcome, exp.output.format, exp.walk.label), exp.output);
            return kExitOk;
        }
        if (*cmd_bell) {
            merw::ExperimentFile exp = load(bell_opts);
            merw::ArrivalOptions options;
            options.mode = exp.mode;
            const auto arrival = merw::arrival_distribution(exp.walk.graph, merw::start_counts(exp.walk), options);
            std::string rendered;
            if (bell_mode == "measured")
                rendered = merw::render_bell_measured(merw::bell_sum_measured(exp.walk.graph, arrival),
                                                      exp.output.format, exp.walk.label);
            else
                rendered = merw::render_bell_unmeasured(merw::bell_sum_unmeasured(arrival), exp.output.format,
                                                        exp.walk.label);
            write_output(rendered, exp.output);
            return kExitOk;
        }
        if (*cmd_simulate) {
            merw::ExperimentFile exp = load(simulate_opts);
            if (cmd_simulate->count("--seed")) exp.sampler.seed = seed_override;
            if (cmd_simulate->count("--samples")) exp.sampler.samples = samples_override;
            if (cmd_simulate->count("--workers")) exp.sampler.workers = workers_override;
            const auto report = merw::validate_all(exp.walk, exp.sampler, tamper);
            write_output(merw::render_report(report, exp.output.format), exp.output);
            return report.ok() ? kExitOk : kExitStatistical;
        }
    } catch (const merw::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const merw::PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const merw::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const merw::DegenerateEnsembleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
