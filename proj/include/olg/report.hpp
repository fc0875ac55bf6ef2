#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "olg/params.hpp"
#include "olg/steady_state.hpp"
#include "olg/transition.hpp"

namespace olg {

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 100 * (reform / baseline - 1) elementwise; throws on unequal lengths or a zero baseline value.
std::vector<double> deviation_series(const std::vector<double>& reform, const std::vector<double>& baseline);

/// One row of the long-format aggregates table.
struct SeriesRow {
    std::string scenario;
    int period = 0;
    int year = 0;
    std::string variable;
    double value = 0.0;
    std::optional<double> pct_dev;  ///< empty when the baseline value is zero
};

struct CohortRow {
    std::string scenario;
    int age_at_reform = 0;  ///< model age
    int calendar_age = 0;
    std::string variable;
    double value = 0.0;
    std::optional<double> pct_dev;
};

struct ProfileRow {
    int age = 0;
    int calendar_age = 0;
    double consumption = 0.0;
    double labor = 0.0;
    double savings = 0.0;
};

struct SteadyStateTable {
    std::string label;
    std::vector<ProfileRow> profile;
    std::vector<std::pair<std::string, double>> summary;
};

/// Everything the charts are drawn from; built from results or re-read from CSV.
struct ReportTables {
    std::vector<std::string> scenarios;  ///< in emission order
    std::map<std::string, std::vector<SeriesRow>> aggregates;
    std::map<std::string, std::vector<CohortRow>> cohorts;
    std::vector<SteadyStateTable> steady_states;
};

SteadyStateTable steady_state_table(const std::string& label, const SteadyState& ss, const ModelParams& params);

/// Long-format rows for one scenario against the baseline transition.
std::vector<SeriesRow> aggregate_rows(const TransitionResult& reform, const TransitionResult& baseline,
                                      const ModelParams& params);

std::vector<CohortRow> cohort_rows(const TransitionResult& reform, const SteadyState& baseline_ss,
                                   const ScenarioSpec& spec, const ModelParams& params);

std::string aggregates_csv(const std::vector<SeriesRow>& rows);
std::string cohorts_csv(const std::vector<CohortRow>& rows);
std::string steady_state_csv(const SteadyStateTable& table);

std::vector<SeriesRow> parse_aggregates_csv(const std::string& text);
std::vector<CohortRow> parse_cohorts_csv(const std::string& text);
SteadyStateTable parse_steady_state_csv(const std::string& label, const std::string& text);

/// Reads aggregates_*.csv, cohorts_*.csv and steady_state_*.csv from a directory.
ReportTables load_tables(const std::filesystem::path& dir);

struct ChartOptions {
    int display_periods = 100;
    std::optional<std::string> timestamp;
};

/// Writes fig_*.svg into out_dir and returns the file names written.
std::vector<std::string> emit_charts(const ReportTables& tables, const std::filesystem::path& out_dir,
                                     const ChartOptions& opts = {});

struct SolveSummary {
    std::string label;
    int iterations = 0;
    double final_change = 0.0;
    double max_euler_residual = 0.0;
    double seconds = 0.0;
};

struct RunManifest {
    std::string command;
    std::string config_path;
    std::vector<std::string> scenarios;
    std::string output_dir;
    std::string tool_version;
    std::vector<SolveSummary> solves;
    std::vector<std::string> files;  ///< relative to output_dir
};

std::string sha256_hex(const std::string& bytes);

/// Writes manifest.txt listing every file with its SHA-256.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace olg
