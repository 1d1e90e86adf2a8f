#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsegen/levy_laws.hpp"
#include "sparsegen/operators.hpp"
#include "sparsegen/statistics.hpp"

namespace sparsegen::cli {

struct SecondOrderConfig {
    StepFunction phi1;
    StepFunction phi2;
    std::size_t trials = 10000;
};

struct FractionalMomentConfig {
    double p = 0.4;
    double window = 0.01;
    double T = 0.0;  // 0: window + 2 grid steps
    double h = 0.0;  // 0: window / 100
    std::size_t trials = 10000;
    std::vector<std::int64_t> n_schedule;  // empty: the run's n
};

struct ValidateConfig {
    bool tune = true;
    double threshold = 0.1;
    std::vector<std::int64_t> n_schedule;  // explicit n values, or
    std::vector<double> n_jumps;           // n h values (converted with the run's h)
    std::size_t samples = 10000;
    int repetitions = 20;
    std::optional<SecondOrderConfig> second_order;
    std::optional<FractionalMomentConfig> fractional_moment;
};

struct BenchConfig {
    std::vector<std::int64_t> n_sweep{1000, 2500, 5000, 7500, 10000};  // at the run's grid
    std::vector<std::size_t> grid_sweep{250, 500, 1000, 2000, 4000};   // at fixed_n, h = T / grid
    std::int64_t fixed_n = 10000;
    int repetitions = 5;
};

struct RunConfig {
    std::optional<LevyLaw> law;
    std::optional<RationalOperator> op;
    std::int64_t n = 1000;
    double T = 1.0;
    double h = 0.001;
    std::uint64_t seed = 0;
    std::vector<double> boundary;  // empty: zeros
    std::filesystem::path out_dir = ".";
    std::filesystem::path realization;  // resample input
    ValidateConfig validate;
    BenchConfig bench;

    const LevyLaw& require_law() const;
    const RationalOperator& require_operator() const;
    // n >= 1, T > 0, h > 0, h <= T and a boundary of length deg(P) when given.
    void check() const;
};

// Throws ConfigError naming the offending field, ParseError on malformed JSON.
RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

struct ReportEntry {
    std::string metric;
    std::optional<double> value;
    std::optional<double> target;
    std::optional<double> tolerance;
    std::optional<bool> pass;
    std::string status;  // "pass", "fail", "info", "not_applicable"
    std::string detail;

    friend bool operator==(const ReportEntry&, const ReportEntry&) = default;
};

struct Report {
    std::vector<ReportEntry> entries;
    nlohmann::json diagnostics = nlohmann::json::object();

    friend bool operator==(const Report&, const Report&) = default;
};

nlohmann::json report_to_json(const Report& report);
Report report_from_json(const nlohmann::json& doc);

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct GenerateOutputs {
    std::filesystem::path trajectory;
    std::filesystem::path realization;
    std::filesystem::path provenance;
    std::vector<std::string> warnings;
};

// trajectory.csv, realization.json and provenance.json in out_dir.
GenerateOutputs cmd_generate(const RunConfig& config);

// Loads config.realization, writes trajectory.csv and provenance.json for step config.h.
GenerateOutputs cmd_resample(const RunConfig& config);

struct ValidateOutputs {
    Report report;
    std::vector<KsPoint> curve;
    std::filesystem::path report_path;
    std::filesystem::path curve_path;
};

// report.json and ks_curve.csv in out_dir.
ValidateOutputs cmd_validate(const RunConfig& config);

struct TimingRow {
    std::string method;  // "bspline" or "direct"
    std::int64_t n = 0;
    std::size_t K = 0;
    std::size_t grid = 0;
    double median_seconds = 0.0;
};

struct BenchOutputs {
    std::vector<TimingRow> rows;
    LinearFit direct_vs_K;   // n sweep at the run's grid
    LinearFit bspline_vs_K;
    LinearFit direct_vs_grid;  // grid sweep at fixed_n
    LinearFit bspline_vs_grid;
    std::filesystem::path timing_path;
    std::filesystem::path fits_path;
};

// Median wall time of `repetitions` runs of each method on one realization.
TimingRow time_method(const std::string& method, const InnovationRealization& r,
                      const RationalOperator& op, double h, int repetitions);

// timing.csv ("method,n,K,grid,median_seconds") and timing_fits.json in out_dir.
BenchOutputs cmd_bench(const RunConfig& config);

// Full command line. Exit codes: 0 success, 1 configuration or parse error,
// 2 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sparsegen::cli
