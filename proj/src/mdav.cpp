#include "mdav.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "csv.hpp"
#include "errors.hpp"
#include "threading.hpp"
#include "timeutil.hpp"

namespace microagg {

std::vector<std::size_t> GroupAssignment::sizes() const {
    std::vector<std::size_t> out(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) out[g] = groups[g].size();
    return out;
}

void GroupAssignment::validate() const {
    const std::size_t n = ids.size();
    if (group_of.size() != n) fail(ErrorCode::ShapeMismatch, "group_of size does not match ids");
    std::vector<char> seen(n, 0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) fail(ErrorCode::InvalidArgument, "empty group in assignment");
        for (const std::uint32_t row : groups[g]) {
            if (row >= n || seen[row]) fail(ErrorCode::InvalidArgument, "assignment is not a partition");
            seen[row] = 1;
            if (group_of[row] != g) fail(ErrorCode::InvalidArgument, "group_of disagrees with groups");
        }
        if (!degenerate) {
            const auto size = static_cast<long long>(groups[g].size());
            if (size < k || size > 2 * k - 1)
                fail(ErrorCode::InvalidArgument, "group size " + std::to_string(size) + " outside [k, 2k-1]");
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        fail(ErrorCode::InvalidArgument, "assignment misses some ids");
}

double distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(ErrorCode::ShapeMismatch, "distance arguments differ in length");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

namespace {

// Squared Euclidean distance, accumulated left to right. Both the optimized
// kernel and the naive reference compare squared distances, so tie handling
// is identical between them.
double dist2(const double* a, const double* b, std::size_t t) {
    double acc = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return acc;
}

class MdavKernel {
public:
    MdavKernel(const double* data, std::size_t t, std::size_t n, int workers)
        : data_(data), t_(t), workers_(workers) {
        alive_.resize(n);
        std::iota(alive_.begin(), alive_.end(), 0u);
        mean_.resize(t);
        scratch_.resize(n);
    }

    std::vector<std::vector<std::uint32_t>> run(long long k) {
        std::vector<std::vector<std::uint32_t>> groups;
        const std::size_t uk = static_cast<std::size_t>(k);

        while (alive_.size() >= 3 * uk) {
            compute_mean();
            const std::size_t r = farthest_from(mean_.data(), alive_.size());
            fill_dist2(row(alive_[r]));
            const std::size_t s = farthest_from_scratch(r);
            // The two clusters are disjoint: x_r's neighbors are drawn from
            // R \ {x_r, x_s}, then x_s's from what remains.
            groups.push_back(take_cluster(r, s, uk));
            const std::size_t s_pos = position_of(alive_from_row_);
            fill_dist2(row(alive_[s_pos]));
            groups.push_back(take_cluster(s_pos, npos, uk));
        }
        if (alive_.size() >= 2 * uk) {
            compute_mean();
            const std::size_t r = farthest_from(mean_.data(), alive_.size());
            fill_dist2(row(alive_[r]));
            groups.push_back(take_cluster(r, npos, uk));
        }
        if (!alive_.empty()) {
            groups.emplace_back(alive_.begin(), alive_.end());
            alive_.clear();
        }
        return groups;
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    const double* row(std::uint32_t r) const { return data_ + static_cast<std::size_t>(r) * t_; }

    // Column means over alive rows, accumulated in ascending row order so the
    // result is bit-identical to a serial reference regardless of workers.
    void compute_mean() {
        std::fill(mean_.begin(), mean_.end(), 0.0);
        for (const std::uint32_t r : alive_) {
            const double* x = row(r);
            for (std::size_t j = 0; j < t_; ++j) mean_[j] += x[j];
        }
        const double inv = 1.0 / static_cast<double>(alive_.size());
        for (std::size_t j = 0; j < t_; ++j) mean_[j] *= inv;
    }

    // scratch_[i] = squared distance of alive_[i] to target. Rows are
    // independent, so chunking cannot change any value.
    void fill_dist2(const double* target) {
        const std::size_t n = alive_.size();
        threading::parallel_for(n, workers_, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i)
                scratch_[i] = dist2(row(alive_[i]), target, t_);
        });
    }

    std::size_t farthest_from(const double* target, std::size_t n) {
        fill_dist2(target);
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (scratch_[i] > scratch_[best]) best = i;  // ties keep the smaller id
        return best;
    }

    // Farthest entry of scratch_ excluding position `exclude`.
    std::size_t farthest_from_scratch(std::size_t exclude) {
        std::size_t best = npos;
        for (std::size_t i = 0; i < alive_.size(); ++i) {
            if (i == exclude) continue;
            if (best == npos || scratch_[i] > scratch_[best]) best = i;
        }
        return best;
    }

    std::size_t position_of(std::uint32_t row_index) const {
        const auto it = std::lower_bound(alive_.begin(), alive_.end(), row_index);
        return static_cast<std::size_t>(it - alive_.begin());
    }

    // Removes and returns {center} + its (k-1) nearest among alive rows,
    // excluding position `skip`. Assumes scratch_ holds squared distances to
    // the center. Nearest ties break toward the smaller id.
    std::vector<std::uint32_t> take_cluster(std::size_t center, std::size_t skip, std::size_t k) {
        candidates_.clear();
        for (std::size_t i = 0; i < alive_.size(); ++i) {
            if (i == center || i == skip) continue;
            candidates_.emplace_back(scratch_[i], alive_[i]);
        }
        const std::size_t m = std::min(k - 1, candidates_.size());
        std::partial_sort(candidates_.begin(), candidates_.begin() + static_cast<std::ptrdiff_t>(m),
                          candidates_.end());

        std::vector<std::uint32_t> cluster;
        cluster.reserve(k);
        cluster.push_back(alive_[center]);
        for (std::size_t i = 0; i < m; ++i) cluster.push_back(candidates_[i].second);
        std::sort(cluster.begin(), cluster.end());

        // Remember the row the caller may still need to locate (x_s) before
        // compacting alive_.
        alive_from_row_ = skip == npos ? 0 : alive_[skip];

        std::size_t out = 0;
        for (std::size_t i = 0; i < alive_.size(); ++i) {
            if (std::binary_search(cluster.begin(), cluster.end(), alive_[i]))
                continue;
            alive_[out++] = alive_[i];
        }
        alive_.resize(out);
        return cluster;
    }

    const double* data_;
    std::size_t t_;
    int workers_;
    std::vector<std::uint32_t> alive_;  // ascending row indices == id order
    std::vector<double> mean_;
    std::vector<double> scratch_;  // squared distances, indexed like alive_
    std::vector<std::pair<double, std::uint32_t>> candidates_;
    std::uint32_t alive_from_row_ = 0;
};

}  // namespace

GroupAssignment mdav_partition(const ProfilePanel& panel, long long k, const MdavOptions& options) {
    if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
    panel.require_dense("mdav_partition");
    const std::size_t n = panel.num_series();
    const std::size_t t = panel.num_ticks();

    GroupAssignment assignment;
    assignment.k = k;
    assignment.ids = panel.ids();
    assignment.group_of.assign(n, 0);

    if (static_cast<std::size_t>(k) > n) {
        assignment.degenerate = true;
        assignment.groups.emplace_back();
        auto& g = assignment.groups.back();
        g.resize(n);
        std::iota(g.begin(), g.end(), 0u);
        return assignment;
    }

    const double* data = panel.values().data();
    std::vector<double> scaled;
    if (options.standardize) {
        // Distance-only column scaling; centroids stay on raw values.
        scaled.assign(panel.values().begin(), panel.values().end());
        for (std::size_t j = 0; j < t; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += scaled[i * t + j];
            mean /= static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = scaled[i * t + j] - mean;
                ss += d * d;
            }
            const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
            const double inv = sd > 0.0 ? 1.0 / sd : 1.0;
            for (std::size_t i = 0; i < n; ++i) scaled[i * t + j] = (scaled[i * t + j] - mean) * inv;
        }
        data = scaled.data();
    }

    MdavKernel kernel(data, t, n, options.workers);
    assignment.groups = kernel.run(k);
    for (std::size_t g = 0; g < assignment.groups.size(); ++g)
        for (const std::uint32_t row : assignment.groups[g])
            assignment.group_of[row] = static_cast<std::uint32_t>(g);
    return assignment;
}

AnonymizedPanel::AnonymizedPanel(GroupAssignment assignment, TimeIndex index, std::vector<double> centroids)
    : assignment_(std::move(assignment)), index_(index), centroids_(std::move(centroids)) {
    if (centroids_.size() != assignment_.num_groups() * index_.length)
        fail(ErrorCode::ShapeMismatch, "centroid matrix does not match groups x ticks");
}

ProfilePanel AnonymizedPanel::expanded_view() const {
    const std::size_t n = num_series();
    const std::size_t t = index_.length;
    std::vector<double> values(n * t);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = expanded_row(i);
        std::copy(c.begin(), c.end(), values.begin() + i * t);
    }
    return ProfilePanel(assignment_.ids, index_, std::move(values));
}

AnonymizedPanel build_anonymized_panel(const ProfilePanel& panel, const GroupAssignment& assignment) {
    panel.require_dense("build_anonymized_panel");
    if (assignment.ids != panel.ids())
        fail(ErrorCode::ShapeMismatch, "assignment ids do not match panel ids");
    assignment.validate();

    const std::size_t t = panel.num_ticks();
    std::vector<double> centroids(assignment.num_groups() * t, 0.0);
    for (std::size_t g = 0; g < assignment.num_groups(); ++g) {
        double* c = centroids.data() + g * t;
        for (const std::uint32_t row : assignment.groups[g]) {
            const auto x = panel.row(row);
            for (std::size_t j = 0; j < t; ++j) c[j] += x[j];
        }
        const double inv = 1.0 / static_cast<double>(assignment.groups[g].size());
        for (std::size_t j = 0; j < t; ++j) c[j] *= inv;
    }
    return AnonymizedPanel(assignment, panel.index(), std::move(centroids));
}

void write_assignment_csv(const GroupAssignment& assignment, std::ostream& out) {
    csv::write_record(out, {"series_id", "group_index"});
    for (std::size_t i = 0; i < assignment.ids.size(); ++i)
        csv::write_record(out, {assignment.ids[i], std::to_string(assignment.group_of[i])});
}

void write_assignment_csv_file(const GroupAssignment& assignment, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    write_assignment_csv(assignment, out);
    out.flush();
    if (!out) fail(ErrorCode::IoError, "failed writing '" + path + "'");
}

void write_centroid_csv(const AnonymizedPanel& anonymized, std::ostream& out) {
    std::vector<std::string> record;
    record.push_back("timestamp");
    for (std::size_t g = 0; g < anonymized.num_groups(); ++g)
        record.push_back("group_" + std::to_string(g));
    csv::write_record(out, record);
    for (std::size_t j = 0; j < anonymized.index().length; ++j) {
        record.clear();
        record.push_back(timeutil::format_utc(anonymized.index().tick(j)));
        for (std::size_t g = 0; g < anonymized.num_groups(); ++g)
            record.push_back(csv::format_double(anonymized.centroid(g)[j]));
        csv::write_record(out, record);
    }
}

void write_centroid_csv_file(const AnonymizedPanel& anonymized, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    write_centroid_csv(anonymized, out);
    out.flush();
    if (!out) fail(ErrorCode::IoError, "failed writing '" + path + "'");
}

}  // namespace microagg
