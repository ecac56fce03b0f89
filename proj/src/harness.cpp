#include "evac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "evac/text.hpp"

namespace evac {

std::string cell_label(const SweepCell& cell) {
    std::string label(to_string(cell.policy));
    label += '/' + std::to_string(cell.evacuees);
    label += "/d" + std::to_string(cell.movement_depth);
    label += '/';
    label += cell.goal ? to_string(*cell.goal) : std::string_view("mixed");
    return label;
}

std::vector<SweepCell> enumerate_cells(const ScenarioConfig& base) {
    const auto& axes = base.sweep;
    auto policies = axes.policies.empty() ? std::vector<Policy>{base.policy} : axes.policies;
    auto counts = axes.evacuee_counts.empty() ? std::vector<int>{base.evacuees} : axes.evacuee_counts;
    auto depths = axes.movement_depths.empty() ? std::vector<int>{base.movement_depth} : axes.movement_depths;
    auto goals = axes.goals.empty() ? std::vector<std::optional<GoalKind>>{base.goal_override} : axes.goals;

    std::vector<SweepCell> cells;
    for (auto policy : policies) {
        for (auto count : counts) {
            for (auto depth : depths) {
                for (auto goal : goals) cells.push_back(SweepCell{policy, count, depth, goal});
            }
        }
    }
    return cells;
}

ScenarioConfig config_for(const ScenarioConfig& base, const SweepCell& cell) {
    ScenarioConfig config = base;
    config.policy = cell.policy;
    config.evacuees = cell.evacuees;
    config.movement_depth = cell.movement_depth;
    config.goal_override = cell.goal;
    config.sweep = {};
    if (!config.initial_nodes.empty() && static_cast<int>(config.initial_nodes.size()) != cell.evacuees) {
        config.initial_nodes.clear();
    }
    validate_scenario(config);
    return config;
}

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::survivor_fraction: return "survivor_fraction";
        case Metric::deaths: return "deaths";
        case Metric::congestion: return "congestion";
        case Metric::avg_evac_time: return "avg_evac_time_s";
        case Metric::avg_health: return "avg_health";
        case Metric::total_energy: return "total_energy";
    }
    return "?";
}

double metric_value(const TrialMetrics& m, Metric metric) {
    switch (metric) {
        case Metric::survivor_fraction: return m.survivor_fraction;
        case Metric::deaths: return m.deaths;
        case Metric::congestion: return m.congestion;
        case Metric::avg_evac_time: return m.avg_evacuation_time;
        case Metric::avg_health: return m.avg_health;
        case Metric::total_energy: return m.total_energy;
    }
    return 0.0;
}

bool SweepResult::any_failure() const {
    return std::any_of(trials.begin(), trials.end(), [](const TrialRecord& t) { return !t.metrics; });
}

SweepResult run_sweep(const ScenarioConfig& base, int workers,
                      const std::function<void(const TrialRecord&)>& on_trial) {
    const auto cells = enumerate_cells(base);
    if (cells.empty() || base.seeds.empty()) throw ConfigError("sweep has an empty axis");

    std::vector<std::optional<ScenarioConfig>> configs;
    std::vector<std::string> config_errors;
    for (const auto& cell : cells) {
        try {
            configs.emplace_back(config_for(base, cell));
            config_errors.emplace_back();
        } catch (const std::exception& e) {
            configs.emplace_back();
            config_errors.emplace_back(e.what());
        }
    }

    SweepResult result;
    for (const auto& cell : cells) {
        for (auto seed : base.seeds) result.trials.push_back(TrialRecord{cell, seed, std::nullopt, {}});
    }

    std::atomic<std::size_t> next{0};
    std::mutex report;
    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= result.trials.size()) return;
            auto& record = result.trials[i];
            const std::size_t c = i / base.seeds.size();
            if (!configs[c]) {
                record.error = config_errors[c];
            } else {
                try {
                    record.metrics = run_trial(*configs[c], record.seed).metrics;
                } catch (const std::exception& e) {
                    record.error = e.what();
                }
            }
            if (on_trial) {
                std::lock_guard lock(report);
                on_trial(record);
            }
        }
    };

    const int threads = std::max(1, workers);
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    result.aggregates = aggregate(result.trials);
    return result;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& trials) {
    std::vector<AggregateRow> rows;
    for (const auto& t : trials) {
        if (rows.empty() || rows.back().cell != t.cell) rows.push_back(AggregateRow{t.cell, 0, 0, {}});
        auto& row = rows.back();
        if (!t.metrics) {
            ++row.failures;
            continue;
        }
        for (auto m : kAllMetrics) {
            const double v = metric_value(*t.metrics, m);
            auto& s = row.summary[static_cast<std::size_t>(m)];
            if (row.count == 0) {
                s = Summary{v, v, v};
            } else {
                s.mean += v;
                s.min = std::min(s.min, v);
                s.max = std::max(s.max, v);
            }
        }
        ++row.count;
    }
    for (auto& row : rows) {
        if (row.failures > 0) {
            row.summary = {};
            continue;
        }
        for (auto& s : row.summary) {
            // The division can land a hair outside the observed range; keep the ordering exact.
            s.mean = std::clamp(s.mean / static_cast<double>(row.count), s.min, s.max);
        }
    }
    return rows;
}

namespace {

std::string sanitize(std::string text) {
    for (auto& c : text) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return text;
}

std::string goal_field(const std::optional<GoalKind>& goal) {
    return goal ? std::string(to_string(*goal)) : std::string("mixed");
}

std::optional<GoalKind> parse_goal_field(std::string_view s) {
    if (s == "mixed") return std::nullopt;
    return parse_goal_kind(s);
}

}  // namespace

std::string trials_csv(const std::vector<TrialRecord>& trials) {
    std::string out = metrics_csv_header() + ",movement_depth,goal,truncated,status,error\n";
    for (const auto& t : trials) {
        if (t.metrics) {
            out += metrics_csv_row(*t.metrics);
        } else {
            out += std::to_string(t.seed) + ',' + std::string(to_string(t.cell.policy)) + ',' +
                   std::to_string(t.cell.evacuees) + ",,,,,,";
        }
        out += ',' + std::to_string(t.cell.movement_depth);
        out += ',' + goal_field(t.cell.goal);
        out += ',';
        if (t.metrics) out += t.metrics->truncated ? "1" : "0";
        out += t.metrics ? ",ok," : ",error," + sanitize(t.error);
        out += '\n';
    }
    return out;
}

std::vector<TrialRecord> parse_trials_csv(std::string_view text) {
    std::vector<TrialRecord> trials;
    const auto lines = split_lines(text);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto f = split(lines[i], ',');
        if (f.size() != 14) throw std::invalid_argument("trials row " + std::to_string(i + 1) + ": expected 14 fields");
        TrialRecord t;
        t.seed = parse_number<std::uint64_t>(f[0]);
        t.cell.policy = parse_policy(f[1]);
        t.cell.evacuees = parse_number<int>(f[2]);
        t.cell.movement_depth = parse_number<int>(f[9]);
        t.cell.goal = parse_goal_field(f[10]);
        if (f[12] == "ok") {
            TrialMetrics m;
            m.seed = t.seed;
            m.policy = t.cell.policy;
            m.evacuees = t.cell.evacuees;
            m.survivor_fraction = parse_number<double>(f[3]);
            m.deaths = parse_number<int>(f[4]);
            m.congestion = parse_number<int>(f[5]);
            m.avg_evacuation_time = parse_number<double>(f[6]);
            m.avg_health = parse_number<double>(f[7]);
            m.total_energy = parse_number<double>(f[8]);
            m.truncated = f[11] == "1";
            t.metrics = m;
        } else {
            t.error = f[13];
        }
        trials.push_back(std::move(t));
    }
    return trials;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::string out = "policy,evacuees,movement_depth,goal,count,failures";
    for (auto m : kAllMetrics) {
        const std::string name(to_string(m));
        out += ',' + name + "_mean," + name + "_min," + name + "_max";
    }
    out += '\n';
    for (const auto& row : rows) {
        out += std::string(to_string(row.cell.policy)) + ',' + std::to_string(row.cell.evacuees) + ',' +
               std::to_string(row.cell.movement_depth) + ',' + goal_field(row.cell.goal) + ',' +
               std::to_string(row.count) + ',' + std::to_string(row.failures);
        for (auto m : kAllMetrics) {
            if (row.failures > 0 || row.count == 0) {
                out += ",,,";
                continue;
            }
            const auto& s = row[m];
            out += ',' + format_double(s.mean) + ',' + format_double(s.min) + ',' + format_double(s.max);
        }
        out += '\n';
    }
    return out;
}

std::map<Metric, std::string> emit_plot_data(const std::vector<AggregateRow>& rows,
                                             const std::function<void(const std::string&)>& warn) {
    std::map<Metric, std::string> files;
    for (auto m : kAllMetrics) files[m] = "group,series,mean,min,max\n";
    for (const auto& row : rows) {
        if (row.count == 0 || row.failures > 0) {
            if (warn) warn("no data for cell " + cell_label(row.cell) + "; left out of the plot files");
            continue;
        }
        const std::string group = std::to_string(row.cell.evacuees);
        const std::string series = std::string(to_string(row.cell.policy)) + "-d" +
                                   std::to_string(row.cell.movement_depth) + '-' + goal_field(row.cell.goal);
        for (auto m : kAllMetrics) {
            const auto& s = row[m];
            files[m] += group + ',' + series + ',' + format_double(s.mean) + ',' + format_double(s.min) + ',' +
                        format_double(s.max) + '\n';
        }
    }
    return files;
}

std::vector<PlotRow> parse_plot_data(std::string_view text) {
    std::vector<PlotRow> rows;
    const auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "group,series,mean,min,max") {
        throw std::invalid_argument("plot data must start with `group,series,mean,min,max`");
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto f = split(lines[i], ',');
        if (f.size() != 5) throw std::invalid_argument("plot row " + std::to_string(i + 1) + ": expected 5 fields");
        rows.push_back(PlotRow{f[0], f[1], parse_number<double>(f[2]), parse_number<double>(f[3]),
                               parse_number<double>(f[4])});
    }
    return rows;
}

void write_file_atomically(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result,
                         const std::function<void(const std::string&)>& warn) {
    std::filesystem::create_directories(dir);
    write_file_atomically(dir / "trials.csv", trials_csv(result.trials));
    write_file_atomically(dir / "aggregate.csv", aggregate_csv(result.aggregates));
    for (const auto& [metric, content] : emit_plot_data(result.aggregates, warn)) {
        write_file_atomically(dir / ("plot_" + std::string(to_string(metric)) + ".csv"), content);
    }
}

}  // namespace evac
