// evacsim: command-line front end for trials, sweeps and building checks.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "evac/building.hpp"
#include "evac/harness.hpp"
#include "evac/scenario.hpp"
#include "evac/simulation.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kTrialFailure = 3;

struct Overrides {
    std::string config;
    std::optional<std::string> seeds;
    int workers = 1;
    std::optional<std::string> out;
    std::optional<std::string> policy;
    std::optional<int> evacuees;
    std::optional<int> movement_depth;
    std::optional<std::string> goal;
    std::optional<double> drift_prefire;
    std::optional<double> drift_fire;
    std::optional<int> sp_warmup;
    std::optional<double> sp_period;
    std::optional<std::size_t> table_size;
    std::optional<double> route_timeout;
    std::optional<std::string> dump_rnn;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "scenario file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seeds", o.seeds, "seed list, `1..10` or `1,4,7`");
    cmd->add_option("--workers", o.workers, "parallel trials")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "directory for trials.csv, aggregate.csv and plot files");
    cmd->add_option("--policy", o.policy, "autonomous | dijkstra | cpn");
    cmd->add_option("--evacuees", o.evacuees, "number of evacuees");
    cmd->add_option("--movement-depth", o.movement_depth, "hops before a CPN evacuee may switch route");
    cmd->add_option("--goal", o.goal, "distance | time | energy | safety | default");
    cmd->add_option("--drift-prefire", o.drift_prefire, "smart-packet drift before the alarm");
    cmd->add_option("--drift-fire", o.drift_fire, "smart-packet drift after the alarm");
    cmd->add_option("--sp-warmup", o.sp_warmup, "smart packets per node before the alarm");
    cmd->add_option("--sp-period-s", o.sp_period, "seconds between smart-packet rounds");
    cmd->add_option("--table-size", o.table_size, "routes kept per routing table");
    cmd->add_option("--route-timeout-s", o.route_timeout, "seconds before a stored route expires");
}

evac::ScenarioConfig load(const Overrides& o) {
    auto config = evac::load_scenario_file(o.config);
    try {
        if (o.seeds) config.seeds = evac::parse_seed_list(*o.seeds);
        if (o.policy) config.policy = evac::parse_policy(*o.policy);
        if (o.evacuees) config.evacuees = *o.evacuees;
        if (o.movement_depth) config.movement_depth = *o.movement_depth;
        if (o.goal) {
            if (*o.goal == "default") {
                config.goal_override.reset();
            } else {
                config.goal_override = evac::parse_goal_kind(*o.goal);
            }
        }
    } catch (const std::invalid_argument& e) {
        throw evac::ConfigError(e.what());
    }
    if (o.drift_prefire) config.cpn.drift_prefire = *o.drift_prefire;
    if (o.drift_fire) config.cpn.drift_fire = *o.drift_fire;
    if (o.sp_warmup) config.cpn.sp_warmup = *o.sp_warmup;
    if (o.sp_period) config.cpn.sp_period = *o.sp_period;
    if (o.table_size) config.cpn.table_size = *o.table_size;
    if (o.route_timeout) config.cpn.route_timeout = *o.route_timeout;
    if (o.evacuees && !config.initial_nodes.empty()) config.initial_nodes.clear();
    evac::validate_scenario(config);
    return config;
}

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

int finish(const evac::SweepResult& result, const Overrides& o) {
    if (o.out) evac::write_sweep_outputs(*o.out, result, warn);
    for (const auto& t : result.trials) {
        if (!t.metrics) std::cerr << "trial " << evac::cell_label(t.cell) << " seed " << t.seed << " failed: " << t.error << '\n';
    }
    return result.any_failure() ? kTrialFailure : kOk;
}

int cmd_run(const Overrides& o) {
    auto config = load(o);
    config.sweep = {};

    if (o.dump_rnn) {
        if (config.policy != evac::Policy::cpn) throw evac::ConfigError("--dump-rnn needs the cpn policy");
        std::filesystem::create_directories(*o.dump_rnn);
    }

    std::cout << evac::metrics_csv_header() << '\n';
    std::vector<evac::TrialRecord> trials;
    if (o.dump_rnn) {
        // Serial so that every seed's network can be written out.
        for (auto seed : config.seeds) {
            evac::TrialRecord record{{config.policy, config.evacuees, config.movement_depth, config.goal_override}, seed,
                                     std::nullopt, {}};
            evac::TrialOptions options;
            options.inspect_network = [&](const evac::CpnNetwork& net) {
                for (auto goal : net.goals()) {
                    const auto path = std::filesystem::path(*o.dump_rnn) /
                                      ("rnn_seed" + std::to_string(seed) + "_" + std::string(evac::to_string(goal)) + ".csv");
                    std::ofstream out(path);
                    net.dump_rnn_csv(out, goal);
                }
            };
            try {
                record.metrics = evac::run_trial(config, seed, options).metrics;
                std::cout << evac::metrics_csv_row(*record.metrics) << '\n';
            } catch (const std::exception& e) {
                record.error = e.what();
            }
            trials.push_back(std::move(record));
        }
        evac::SweepResult result{trials, evac::aggregate(trials)};
        return finish(result, o);
    }

    const auto result = evac::run_sweep(config, o.workers);
    for (const auto& t : result.trials) {
        if (t.metrics) std::cout << evac::metrics_csv_row(*t.metrics) << '\n';
    }
    return finish(result, o);
}

int cmd_sweep(const Overrides& o) {
    const auto config = load(o);
    const auto result = evac::run_sweep(config, o.workers, [](const evac::TrialRecord& t) {
        std::cerr << evac::cell_label(t.cell) << " seed " << t.seed << (t.metrics ? " done" : " FAILED") << '\n';
    });
    std::cout << evac::aggregate_csv(result.aggregates);
    return finish(result, o);
}

int cmd_validate(const std::string& path) {
    const auto graph = evac::load_building_file(path);
    std::cout << "ok: " << graph.name() << ", " << graph.node_count() << " nodes, " << graph.edge_count()
              << " edges, " << graph.exits().size() << " exits\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Building evacuation simulator with cognitive packet network routing"};
    app.require_subcommand(1);

    Overrides run_opts;
    auto* run = app.add_subcommand("run", "run the configured scenario over its seeds");
    add_common(run, run_opts);
    run->add_option("--dump-rnn", run_opts.dump_rnn, "directory for per-seed RNN weight CSVs (cpn only)");

    Overrides sweep_opts;
    auto* sweep = app.add_subcommand("sweep", "run every combination of the sweep axes");
    add_common(sweep, sweep_opts);

    std::string building;
    auto* validate = app.add_subcommand("validate", "check a building file");
    validate->add_option("--building", building, "building file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return cmd_run(run_opts);
        if (*sweep) return cmd_sweep(sweep_opts);
        if (*validate) return cmd_validate(building);
    } catch (const evac::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const evac::BuildingError& e) {
        std::cerr << "building error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kTrialFailure;
    }
    return kOk;
}
