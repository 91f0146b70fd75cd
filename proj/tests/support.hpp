#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "panel.hpp"

namespace testsupport {

inline std::int64_t t0() { return 1356998400; }  // 2013-01-01T00:00:00Z

/// Panel from explicit rows; ids "a", "b", ... must be passed sorted.
inline microagg::ProfilePanel panel_from_rows(std::vector<std::string> ids,
                                              const std::vector<std::vector<double>>& rows,
                                              std::int64_t start = t0()) {
    std::vector<double> values;
    for (const auto& row : rows) values.insert(values.end(), row.begin(), row.end());
    return microagg::ProfilePanel(std::move(ids), microagg::TimeIndex{start, 1800, rows.front().size()},
                                  std::move(values));
}

inline double spearman(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    const auto ranks = [n](std::span<const double> v) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> rank(n);
        for (std::size_t i = 0; i < n; ++i) rank[order[i]] = static_cast<double>(i);
        return rank;
    };
    const std::vector<double> rx = ranks(xs);
    const std::vector<double> ry = ranks(ys);
    const double mean = (static_cast<double>(n) - 1.0) / 2.0;
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (rx[i] - mean) * (ry[i] - mean);
        dx += (rx[i] - mean) * (rx[i] - mean);
        dy += (ry[i] - mean) * (ry[i] - mean);
    }
    return num / std::sqrt(dx * dy);
}

inline double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

}  // namespace testsupport
