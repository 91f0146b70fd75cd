#include "panel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "errors.hpp"
#include "timeutil.hpp"

namespace microagg {

void TimeIndex::validate() const {
    if (step <= 0) fail(ErrorCode::InvalidArgument, "time step must be positive");
    if (length < 1) fail(ErrorCode::InvalidArgument, "time index must have at least one tick");
}

std::size_t TimeIndex::index_of(std::int64_t timestamp) const {
    const std::int64_t offset = timestamp - start;
    if (offset % step != 0)
        fail(ErrorCode::TimestampOffGrid,
             "timestamp " + timeutil::format_utc(timestamp) + " is off the " + std::to_string(step) + "s grid");
    const std::int64_t i = offset / step;
    if (i < 0 || static_cast<std::size_t>(i) >= length)
        fail(ErrorCode::OutOfRange, "timestamp " + timeutil::format_utc(timestamp) + " outside index range");
    return static_cast<std::size_t>(i);
}

ProfilePanel::ProfilePanel(std::vector<std::string> ids, TimeIndex index, std::vector<double> values)
    : ids_(std::move(ids)), index_(index), values_(std::move(values)) {
    index_.validate();
    if (ids_.empty()) fail(ErrorCode::EmptyInput, "panel has no series");
    if (values_.size() != ids_.size() * index_.length)
        fail(ErrorCode::ShapeMismatch, "panel value count does not match ids x ticks");
    if (!std::is_sorted(ids_.begin(), ids_.end()))
        fail(ErrorCode::InvalidArgument, "panel ids must be sorted");
    if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end())
        fail(ErrorCode::DuplicateReading, "panel ids must be unique");
}

bool ProfilePanel::has_missing() const {
    return std::any_of(values_.begin(), values_.end(), [](double v) { return std::isnan(v); });
}

void ProfilePanel::require_dense(const char* operation) const {
    if (has_missing())
        fail(ErrorCode::InvalidArgument, std::string(operation) + " requires a panel without missing values");
}

ProfilePanel build_panel(std::vector<Reading> readings, std::int64_t step) {
    if (readings.empty()) fail(ErrorCode::EmptyInput, "no readings supplied");
    if (step <= 0) fail(ErrorCode::InvalidArgument, "time step must be positive");

    std::int64_t t_min = readings.front().timestamp;
    std::int64_t t_max = t_min;
    for (const auto& r : readings) {
        t_min = std::min(t_min, r.timestamp);
        t_max = std::max(t_max, r.timestamp);
    }
    for (const auto& r : readings) {
        if ((r.timestamp - t_min) % step != 0)
            fail(ErrorCode::TimestampOffGrid,
                 "reading at " + timeutil::format_utc(r.timestamp) + " (series '" + r.id + "') is off-grid");
    }

    TimeIndex index{t_min, step, static_cast<std::size_t>((t_max - t_min) / step) + 1};

    std::vector<std::string> ids;
    {
        std::unordered_map<std::string, bool> seen;
        seen.reserve(readings.size() / 4 + 1);
        for (const auto& r : readings)
            if (seen.emplace(r.id, true).second) ids.push_back(r.id);
        std::sort(ids.begin(), ids.end());
    }
    std::unordered_map<std::string, std::size_t> row_of;
    row_of.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) row_of.emplace(ids[i], i);

    std::vector<double> values(ids.size() * index.length, std::numeric_limits<double>::quiet_NaN());
    for (const auto& r : readings) {
        const std::size_t row = row_of.at(r.id);
        const std::size_t col = static_cast<std::size_t>((r.timestamp - t_min) / step);
        double& cell = values[row * index.length + col];
        if (!std::isnan(cell))
            fail(ErrorCode::DuplicateReading,
                 "duplicate reading for series '" + r.id + "' at " + timeutil::format_utc(r.timestamp));
        cell = r.kwh;
    }
    return ProfilePanel(std::move(ids), index, std::move(values));
}

std::vector<double> global_average_profile(const ProfilePanel& panel) {
    panel.require_dense("global_average_profile");
    const std::size_t n = panel.num_series();
    const std::size_t t = panel.num_ticks();
    std::vector<double> mean(t, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = panel.row(i);
        for (std::size_t j = 0; j < t; ++j) mean[j] += row[j];
    }
    for (double& v : mean) v /= static_cast<double>(n);
    return mean;
}

ProfilePanel slice_window(const ProfilePanel& panel, std::int64_t t_from, std::int64_t t_to) {
    if (t_from > t_to) fail(ErrorCode::InvalidArgument, "inverted window bounds");
    if (t_from == t_to) fail(ErrorCode::EmptyWindow, "window bounds select no ticks");
    const TimeIndex& idx = panel.index();
    const std::size_t first = idx.index_of(t_from);
    // t_to is exclusive and may be one past the final tick.
    std::size_t last_excl;
    if (t_to == idx.end()) {
        last_excl = idx.length;
    } else {
        last_excl = idx.index_of(t_to);
    }
    const std::size_t width = last_excl - first;
    std::vector<double> values(panel.num_series() * width);
    for (std::size_t i = 0; i < panel.num_series(); ++i) {
        const auto row = panel.row(i);
        std::copy(row.begin() + first, row.begin() + last_excl, values.begin() + i * width);
    }
    return ProfilePanel(panel.ids(), TimeIndex{idx.tick(first), idx.step, width}, std::move(values));
}

}  // namespace microagg
