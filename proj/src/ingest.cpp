#include "ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

#include "csv.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "timeutil.hpp"

namespace microagg {

namespace {

bool parse_double(const std::string& text, double& out) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    if (begin == end) return false;
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

}  // namespace

GapPolicy::Mode gap_mode_from_string(const std::string& name) {
    if (name == "drop-series") return GapPolicy::Mode::DropSeries;
    if (name == "fill-zero") return GapPolicy::Mode::FillZero;
    if (name == "linear-interpolate") return GapPolicy::Mode::LinearInterpolate;
    fail(ErrorCode::InvalidArgument, "unknown gap policy '" + name + "'");
}

LclParseResult parse_lcl_csv(std::istream& in, const LclColumns& columns) {
    std::vector<std::string> fields;
    if (!csv::read_record(in, fields))
        fail(ErrorCode::MissingHeader, "input stream is empty, expected a CSV header");

    auto column_index = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(fields.begin(), fields.end(), name);
        if (it == fields.end())
            fail(ErrorCode::MissingHeader, "header has no column '" + name + "'");
        return static_cast<std::size_t>(it - fields.begin());
    };
    const std::size_t id_col = column_index(columns.id);
    const std::size_t ts_col = column_index(columns.timestamp);
    const std::size_t kwh_col = column_index(columns.energy);
    const std::size_t need = std::max({id_col, ts_col, kwh_col}) + 1;

    LclParseResult result;
    while (csv::read_record(in, fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() < need) {
            ++result.skipped_rows;
            continue;
        }
        double kwh;
        if (!parse_double(fields[kwh_col], kwh)) {
            ++result.skipped_rows;
            continue;
        }
        std::int64_t ts;
        try {
            ts = timeutil::parse_utc(fields[ts_col]);
        } catch (const Error&) {
            ++result.skipped_rows;
            continue;
        }
        result.readings.push_back(Reading{fields[id_col], ts, kwh});
    }
    if (result.readings.empty())
        fail(ErrorCode::NoParseableRows, "no parseable rows in input");
    return result;
}

ProfilePanel regularize(std::vector<Reading> readings, const GapPolicy& policy,
                        std::size_t* dropped_series, std::int64_t step) {
    ProfilePanel raw = build_panel(std::move(readings), step);
    const std::size_t t = raw.num_ticks();

    std::vector<std::string> kept_ids;
    std::vector<double> kept_values;
    std::size_t dropped = 0;

    std::vector<double> series(t);
    for (std::size_t i = 0; i < raw.num_series(); ++i) {
        const auto row = raw.row(i);
        std::copy(row.begin(), row.end(), series.begin());
        bool keep = true;

        switch (policy.mode) {
            case GapPolicy::Mode::DropSeries:
                keep = std::none_of(series.begin(), series.end(), [](double v) { return std::isnan(v); });
                break;
            case GapPolicy::Mode::FillZero:
                for (double& v : series)
                    if (std::isnan(v)) v = 0.0;
                break;
            case GapPolicy::Mode::LinearInterpolate: {
                std::size_t j = 0;
                while (j < t && keep) {
                    if (!std::isnan(series[j])) {
                        ++j;
                        continue;
                    }
                    std::size_t gap_end = j;
                    while (gap_end < t && std::isnan(series[gap_end])) ++gap_end;
                    const std::size_t gap_len = gap_end - j;
                    // Leading/trailing gaps have no pair of neighbors to
                    // interpolate between; they always drop the series.
                    if (j == 0 || gap_end == t || gap_len > policy.max_gap) {
                        keep = false;
                        break;
                    }
                    const double left = series[j - 1];
                    const double right = series[gap_end];
                    for (std::size_t g = 0; g < gap_len; ++g) {
                        const double frac = static_cast<double>(g + 1) / static_cast<double>(gap_len + 1);
                        series[j + g] = left + (right - left) * frac;
                    }
                    j = gap_end;
                }
                break;
            }
        }

        if (keep) {
            kept_ids.push_back(raw.ids()[i]);
            kept_values.insert(kept_values.end(), series.begin(), series.end());
        } else {
            ++dropped;
        }
    }
    if (dropped_series) *dropped_series = dropped;
    if (kept_ids.empty())
        fail(ErrorCode::AllSeriesDropped, "gap policy removed every series");
    return ProfilePanel(std::move(kept_ids), raw.index(), std::move(kept_values));
}

ProfilePanel sample_households(const ProfilePanel& panel, std::size_t n, std::uint64_t seed) {
    if (n < 1 || n > panel.num_series())
        fail(ErrorCode::InvalidArgument,
             "sample size " + std::to_string(n) + " outside [1, " + std::to_string(panel.num_series()) + "]");
    rng::Prng prng(seed);
    std::vector<std::size_t> chosen = prng.sample_indices(panel.num_series(), n);
    std::sort(chosen.begin(), chosen.end());  // ids are sorted, so index order == id order

    const std::size_t t = panel.num_ticks();
    std::vector<std::string> ids;
    std::vector<double> values;
    ids.reserve(n);
    values.reserve(n * t);
    for (const std::size_t i : chosen) {
        ids.push_back(panel.ids()[i]);
        const auto row = panel.row(i);
        values.insert(values.end(), row.begin(), row.end());
    }
    return ProfilePanel(std::move(ids), panel.index(), std::move(values));
}

ProfilePanel synth_panel(const SynthConfig& config) {
    if (config.n_households < 1) fail(ErrorCode::InvalidArgument, "n_households must be >= 1");
    if (config.days < 1) fail(ErrorCode::InvalidArgument, "days must be >= 1");
    if (config.spike_prob < 0.0 || config.spike_prob > 1.0)
        fail(ErrorCode::InvalidArgument, "spike_prob must lie in [0, 1]");
    if (config.noise_sd < 0.0 || config.daily_amplitude < 0.0 || config.weekly_amplitude < 0.0 ||
        config.base_load < 0.0)
        fail(ErrorCode::InvalidArgument, "amplitudes, noise_sd and base_load must be non-negative");

    const std::size_t t = config.days * 48;
    const TimeIndex index{config.start, 1800, t};

    std::vector<std::string> ids(config.n_households);
    for (std::size_t h = 0; h < config.n_households; ++h) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "h%06zu", h);
        ids[h] = buf;
    }

    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> values(config.n_households * t);
    for (std::size_t h = 0; h < config.n_households; ++h) {
        rng::Prng prng(rng::derive_seed(config.seed, "synth/h=" + std::to_string(h)));
        const double daily_amp = config.daily_amplitude * (0.8 + 0.4 * prng.uniform01());
        const double weekly_amp = config.weekly_amplitude * (0.8 + 0.4 * prng.uniform01());
        const double daily_phase = prng.uniform(0.0, 48.0) * 0.1;   // mild phase jitter
        const double weekly_phase = prng.uniform(0.0, 336.0) * 0.1;
        const double spike_scale = config.base_load + config.daily_amplitude;
        double* row = values.data() + h * t;
        for (std::size_t j = 0; j < t; ++j) {
            const double tj = static_cast<double>(j);
            double v = config.base_load;
            v += daily_amp * std::sin(two_pi * (tj + daily_phase) / 48.0);
            v += weekly_amp * std::sin(two_pi * (tj + weekly_phase) / 336.0);
            if (config.noise_sd > 0.0) v += config.noise_sd * prng.normal();
            if (config.spike_prob > 0.0 && prng.uniform01() < config.spike_prob)
                v += prng.uniform(1.0, 4.0) * spike_scale;
            row[j] = v > 0.0 ? v : 0.0;
        }
    }
    return ProfilePanel(std::move(ids), index, std::move(values));
}

void write_panel_csv(const ProfilePanel& panel, std::ostream& out) {
    std::vector<std::string> record;
    record.reserve(panel.num_series() + 1);
    record.push_back("timestamp");
    for (const auto& id : panel.ids()) record.push_back(id);
    csv::write_record(out, record);

    for (std::size_t j = 0; j < panel.num_ticks(); ++j) {
        record.clear();
        record.push_back(timeutil::format_utc(panel.index().tick(j)));
        for (std::size_t i = 0; i < panel.num_series(); ++i)
            record.push_back(csv::format_double(panel.at(i, j)));
        csv::write_record(out, record);
    }
}

void write_panel_csv_file(const ProfilePanel& panel, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    write_panel_csv(panel, out);
    out.flush();
    if (!out) fail(ErrorCode::IoError, "failed writing '" + path + "'");
}

ProfilePanel read_panel_csv(std::istream& in) {
    std::vector<std::string> header;
    if (!csv::read_record(in, header))
        fail(ErrorCode::MissingHeader, "panel CSV is empty");
    if (header.size() < 2 || header[0] != "timestamp")
        fail(ErrorCode::ParseError, "panel CSV must start with a 'timestamp' column followed by series columns");

    const std::size_t n = header.size() - 1;
    std::vector<std::int64_t> ticks;
    std::vector<double> by_tick;  // tick-major staging
    std::vector<std::string> fields;
    while (csv::read_record(in, fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != header.size())
            fail(ErrorCode::ParseError,
                 "panel CSV row " + std::to_string(ticks.size() + 2) + " has " + std::to_string(fields.size()) +
                     " fields, expected " + std::to_string(header.size()));
        ticks.push_back(timeutil::parse_utc(fields[0]));
        for (std::size_t i = 0; i < n; ++i) {
            double v;
            if (!parse_double(fields[i + 1], v))
                fail(ErrorCode::ParseError, "unparseable value '" + fields[i + 1] + "' in column '" + header[i + 1] + "'");
            by_tick.push_back(v);
        }
    }
    if (ticks.empty()) fail(ErrorCode::NoParseableRows, "panel CSV has no data rows");

    const std::int64_t step = ticks.size() > 1 ? ticks[1] - ticks[0] : 1800;
    if (step <= 0) fail(ErrorCode::ParseError, "panel CSV timestamps must be strictly increasing");
    for (std::size_t j = 1; j < ticks.size(); ++j)
        if (ticks[j] - ticks[j - 1] != step)
            fail(ErrorCode::TimestampOffGrid, "panel CSV timestamps must be evenly spaced");

    // Re-sort columns so the panel invariant (ids sorted) holds for any input.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return header[a + 1] < header[b + 1]; });

    std::vector<std::string> ids(n);
    std::vector<double> values(n * ticks.size());
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t src = order[r];
        ids[r] = header[src + 1];
        for (std::size_t j = 0; j < ticks.size(); ++j)
            values[r * ticks.size() + j] = by_tick[j * n + src];
    }
    return ProfilePanel(std::move(ids), TimeIndex{ticks[0], step, ticks.size()}, std::move(values));
}

ProfilePanel read_panel_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    return read_panel_csv(in);
}

}  // namespace microagg
