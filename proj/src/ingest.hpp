#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "panel.hpp"

namespace microagg {

struct GapPolicy {
    enum class Mode { DropSeries, FillZero, LinearInterpolate };
    Mode mode = Mode::LinearInterpolate;
    std::size_t max_gap = 4;  // consecutive missing ticks tolerated by interpolation
};

GapPolicy::Mode gap_mode_from_string(const std::string& name);

struct LclColumns {
    std::string id = "LCLid";
    std::string timestamp = "DateTime";
    std::string energy = "KWH/hh (per half hour)";
};

struct LclParseResult {
    std::vector<Reading> readings;
    std::size_t skipped_rows = 0;
};

/// Long-format CSV -> readings. Rows whose energy or timestamp field does not
/// parse are counted and skipped. Throws MissingHeader / NoParseableRows.
LclParseResult parse_lcl_csv(std::istream& in, const LclColumns& columns = {});

/// Readings -> dense panel on the union grid, gaps resolved per policy.
/// Under drop-series any gap (leading, trailing, or interior beyond max_gap
/// for interpolation) removes the series. Throws AllSeriesDropped.
/// dropped_series, when non-null, receives the number of removed series.
ProfilePanel regularize(std::vector<Reading> readings, const GapPolicy& policy,
                        std::size_t* dropped_series = nullptr, std::int64_t step = 1800);

/// Uniform sample of n series without replacement; deterministic per seed;
/// rows re-sorted by id. Selected rows are copied bit-exactly.
ProfilePanel sample_households(const ProfilePanel& panel, std::size_t n, std::uint64_t seed);

struct SynthConfig {
    std::size_t n_households = 100;
    std::size_t days = 30;
    double base_load = 0.25;        // kWh per half hour
    double daily_amplitude = 0.2;
    double weekly_amplitude = 0.05;
    double noise_sd = 0.08;
    double spike_prob = 0.01;
    std::uint64_t seed = 1;
    std::int64_t start = 1356998400;  // 2013-01-01T00:00:00Z
};

/// Synthetic panel: shared daily (period 48) and weekly (period 336)
/// sinusoids with per-household phase/amplitude jitter, Gaussian noise and
/// occasional positive spikes; clipped at zero. Deterministic per seed, and
/// each household's series depends only on (seed, household index).
ProfilePanel synth_panel(const SynthConfig& config);

/// Wide panel CSV: `timestamp` column (ISO-8601 UTC) then one column per id.
void write_panel_csv(const ProfilePanel& panel, std::ostream& out);
void write_panel_csv_file(const ProfilePanel& panel, const std::string& path);
ProfilePanel read_panel_csv(std::istream& in);
ProfilePanel read_panel_csv_file(const std::string& path);

}  // namespace microagg
