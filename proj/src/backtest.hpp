#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forecast.hpp"
#include "mdav.hpp"
#include "panel.hpp"

namespace microagg {

/// One cross-validation stage: train through the end of train_end (UTC day),
/// forecast the following day.
struct Window {
    std::int64_t train_end = 0;     // epoch days, inclusive
    std::int64_t forecast_day = 0;  // epoch days, == train_end + 1
    int label = 0;
};

/// Anonymity level: either the untouched panel ("raw") or MDAV at k.
struct LadderLevel {
    bool raw = false;
    long long k = 0;
    std::string label() const { return raw ? "raw" : std::to_string(k); }
};

struct ExperimentConfig {
    std::string input_path;
    std::vector<LadderLevel> levels;
    std::vector<ModelSpec> models;
    std::vector<Window> windows;     // empty => default windows for the panel's year
    int repeats = 2;
    std::uint64_t seed = 0;
    long long sample_households = 0; // per-repeat subsample; 0 = all
    int workers = 0;
    bool standardize = false;
};

/// Parses and validates the experiment config document; throws ConfigError
/// carrying the offending field path (".seed", ".models[0].kind", ...).
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// The fifteen anonymity levels swept by the experiment.
std::vector<long long> default_k_ladder();

/// The five train/forecast stages for a calendar year:
/// Aug 28->29, Sep 28->29, Oct 29->30, Nov 29->30, Dec 30->31.
std::vector<Window> default_windows(int year);

/// Elementwise sum across household forecasts.
std::vector<double> aggregate_raw(std::span<const double> forecasts, std::size_t rows, std::size_t horizon);

/// Size-weighted sum across group forecasts (the anonymization factor
/// generalized to actual group sizes, so totals are conserved exactly).
std::vector<double> aggregate_anonymized(std::span<const double> forecasts, std::size_t rows,
                                         std::size_t horizon, std::span<const std::size_t> group_sizes);

struct ScoreResult {
    double mae = 0.0;
    double mape = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
    double smape = 0.0;
    std::size_t mape_excluded = 0;   // zero-actual points
    std::size_t smape_excluded = 0;  // zero |y|+|yhat| points
};

/// MAE / MAPE / MSE / RMSE / SMAPE; percentage errors as fractions.
ScoreResult score(std::span<const double> actual, std::span<const double> predicted);

struct CellRecord {
    std::string level;
    std::string model;
    int window = 0;
    int repeat = 1;
    bool ok = false;
    ScoreResult scores;
    std::string error;
};

struct SummaryRecord {
    std::string level;
    std::string model;
    std::string metric;
    double mean = 0.0;
    double sd = 0.0;
    std::size_t cells = 0;
};

struct ExperimentReport {
    std::vector<CellRecord> records;    // (level, model, window, repeat) order
    std::vector<SummaryRecord> summary; // per (level, model, metric) across windows x repeats
    std::size_t failures = 0;
    std::string rng_name;
    std::uint64_t seed = 0;
};

/// Runs the full grid: repeats x levels (anonymize once per repeat/level),
/// then per window fits every model on each household or group centroid
/// series, forecasts one day, aggregates, and scores against the aggregated
/// actuals. Failing cells are recorded, not dropped.
ExperimentReport run_experiment(const ExperimentConfig& config, const ProfilePanel& panel);

std::string experiment_report_to_json(const ExperimentReport& report);
/// Long form `k,model,window,repeat,metric,value` (ok cells).
std::string experiment_report_to_csv(const ExperimentReport& report);

}  // namespace microagg
