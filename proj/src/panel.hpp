#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace microagg {

/// Regular half-hourly (by default) UTC time axis. tick(i) = start + i*step.
struct TimeIndex {
    std::int64_t start = 0;       // epoch seconds, UTC
    std::int64_t step = 1800;     // seconds
    std::size_t length = 0;

    std::int64_t tick(std::size_t i) const { return start + static_cast<std::int64_t>(i) * step; }
    std::int64_t end() const { return tick(length); }  // one past the last tick

    /// Index of an on-grid timestamp; throws if off-grid or out of range.
    std::size_t index_of(std::int64_t timestamp) const;

    void validate() const;
    bool operator==(const TimeIndex&) const = default;
};

struct Reading {
    std::string id;
    std::int64_t timestamp = 0;  // epoch seconds, UTC
    double kwh = 0.0;
};

/// Dense row-major panel of N aligned series over a shared TimeIndex.
/// Rows are sorted by id; gaps are NaN until a gap policy has been applied.
/// Immutable after construction (all mutations build a new panel).
class ProfilePanel {
public:
    ProfilePanel() = default;
    ProfilePanel(std::vector<std::string> ids, TimeIndex index, std::vector<double> values);

    std::size_t num_series() const { return ids_.size(); }
    std::size_t num_ticks() const { return index_.length; }
    const std::vector<std::string>& ids() const { return ids_; }
    const TimeIndex& index() const { return index_; }
    const std::vector<double>& values() const { return values_; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * index_.length, index_.length};
    }
    double at(std::size_t row, std::size_t col) const { return values_[row * index_.length + col]; }

    bool has_missing() const;
    /// Throws InvalidArgument when any value is missing (dense-panel precondition).
    void require_dense(const char* operation) const;

private:
    std::vector<std::string> ids_;
    TimeIndex index_;
    std::vector<double> values_;  // num_series x length, row-major
};

/// Builds a dense panel from readings. The grid is [min ts, max ts] at the
/// given step; every timestamp must sit on it. Ticks a series never reported
/// become NaN (a later gap policy resolves them). Rows sorted by id.
ProfilePanel build_panel(std::vector<Reading> readings, std::int64_t step = 1800);

/// Column means over all rows (the k=N centroid).
std::vector<double> global_average_profile(const ProfilePanel& panel);

/// Columns restricted to [t_from, t_to); both bounds on-grid.
ProfilePanel slice_window(const ProfilePanel& panel, std::int64_t t_from, std::int64_t t_to);

}  // namespace microagg
