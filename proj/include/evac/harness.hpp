#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evac/scenario.hpp"
#include "evac/simulation.hpp"

namespace evac {

/// One combination of swept values.
struct SweepCell {
    Policy policy = Policy::cpn;
    int evacuees = 0;
    int movement_depth = 1;
    std::optional<GoalKind> goal;  // nullopt = per-category goals

    auto operator<=>(const SweepCell&) const = default;
};

/// "cpn/120/d3/time"; the goal part reads "mixed" for per-category goals.
std::string cell_label(const SweepCell& cell);

/// Cells in canonical order: policy, then evacuee count, depth and goal, each in the order
/// listed. An empty axis contributes the base config's value.
std::vector<SweepCell> enumerate_cells(const ScenarioConfig& base);

/// The base config with the cell's values applied.
ScenarioConfig config_for(const ScenarioConfig& base, const SweepCell& cell);

struct TrialRecord {
    SweepCell cell;
    std::uint64_t seed = 0;
    std::optional<TrialMetrics> metrics;  // empty when the trial failed
    std::string error;
};

enum class Metric { survivor_fraction, deaths, congestion, avg_evac_time, avg_health, total_energy };

constexpr std::array<Metric, 6> kAllMetrics = {Metric::survivor_fraction, Metric::deaths,     Metric::congestion,
                                               Metric::avg_evac_time,     Metric::avg_health, Metric::total_energy};

/// Column name as used in the CSV files.
std::string_view to_string(Metric metric);
double metric_value(const TrialMetrics& m, Metric metric);

struct Summary {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct AggregateRow {
    SweepCell cell;
    std::size_t count = 0;     // successful trials
    std::size_t failures = 0;  // a cell with failures has no summaries
    std::array<Summary, kAllMetrics.size()> summary{};

    const Summary& operator[](Metric m) const { return summary[static_cast<std::size_t>(m)]; }
};

struct SweepResult {
    std::vector<TrialRecord> trials;  // canonical order: cell, then seed
    std::vector<AggregateRow> aggregates;
    bool any_failure() const;
};

/// Runs every cell x seed on `workers` threads and aggregates. A failing trial becomes an
/// error row and marks its cell failed; the other cells are unaffected.
SweepResult run_sweep(const ScenarioConfig& base, int workers = 1,
                      const std::function<void(const TrialRecord&)>& on_trial = {});

/// Single-threaded reduce over the trials in canonical order.
std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& trials);

/// Trial rows: the metric columns, then movement_depth, goal, truncated, status, error.
std::string trials_csv(const std::vector<TrialRecord>& trials);
std::vector<TrialRecord> parse_trials_csv(std::string_view text);

/// policy,evacuees,movement_depth,goal,count,failures then <metric>_mean/_min/_max.
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

struct PlotRow {
    std::string group;   // evacuee count
    std::string series;  // policy / depth / goal
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    bool operator==(const PlotRow&) const = default;
};

/// One grouped-bar table per metric, `group,series,mean,min,max`. Cells without data are
/// left out and reported through `warn`.
std::map<Metric, std::string> emit_plot_data(const std::vector<AggregateRow>& rows,
                                             const std::function<void(const std::string&)>& warn = {});
std::vector<PlotRow> parse_plot_data(std::string_view text);

/// Writes trials.csv, aggregate.csv and plot_<metric>.csv into `dir`, each via a temporary
/// file renamed into place.
void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result,
                         const std::function<void(const std::string&)>& warn = {});

/// Writes `content` to `path` through a sibling temporary file and a rename.
void write_file_atomically(const std::filesystem::path& path, std::string_view content);

}  // namespace evac
