#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "panel.hpp"

namespace microagg {

/// k-anonymous partition of a panel's series. Group indices follow the order
/// in which the kernel emits clusters; member lists are sorted by id.
struct GroupAssignment {
    long long k = 1;
    bool degenerate = false;  // k > N collapsed into a single flagged group
    std::vector<std::string> ids;                     // sorted, matches the source panel
    std::vector<std::uint32_t> group_of;              // parallel to ids
    std::vector<std::vector<std::uint32_t>> groups;   // member row indices per group

    std::size_t num_groups() const { return groups.size(); }
    std::vector<std::size_t> sizes() const;

    /// Checks the partition property and (unless degenerate) the [k, 2k-1]
    /// size bounds; throws on violation.
    void validate() const;
};

/// Group-mean view of a panel under an assignment.
class AnonymizedPanel {
public:
    AnonymizedPanel(GroupAssignment assignment, TimeIndex index, std::vector<double> centroids);

    const GroupAssignment& assignment() const { return assignment_; }
    const TimeIndex& index() const { return index_; }
    std::size_t num_groups() const { return assignment_.num_groups(); }
    std::size_t num_series() const { return assignment_.ids.size(); }

    std::span<const double> centroid(std::size_t group) const {
        return {centroids_.data() + group * index_.length, index_.length};
    }
    std::span<const double> expanded_row(std::size_t series_row) const {
        return centroid(assignment_.group_of[series_row]);
    }

    /// Materializes the N x T per-record centroid view as a panel.
    ProfilePanel expanded_view() const;

private:
    GroupAssignment assignment_;
    TimeIndex index_;
    std::vector<double> centroids_;  // G x T row-major
};

struct MdavOptions {
    int workers = 0;           // 0 = auto
    bool standardize = false;  // pre-scale columns to unit variance for distances only
};

/// Euclidean distance between equal-length vectors.
double distance(std::span<const double> a, std::span<const double> b);

/// MDAV partition at anonymity level k. Deterministic: all farthest/nearest
/// ties break toward the lexicographically smallest series id, and results
/// are identical for any worker count. k > N yields a flagged degenerate
/// single group so ladder sweeps never abort.
GroupAssignment mdav_partition(const ProfilePanel& panel, long long k, const MdavOptions& options = {});

/// Centroids (member means) for an assignment over its source panel.
AnonymizedPanel build_anonymized_panel(const ProfilePanel& panel, const GroupAssignment& assignment);

/// `series_id,group_index` rows in id order.
void write_assignment_csv(const GroupAssignment& assignment, std::ostream& out);
void write_assignment_csv_file(const GroupAssignment& assignment, const std::string& path);

/// Wide panel CSV with columns named `group_<index>`.
void write_centroid_csv(const AnonymizedPanel& anonymized, std::ostream& out);
void write_centroid_csv_file(const AnonymizedPanel& anonymized, const std::string& path);

}  // namespace microagg
