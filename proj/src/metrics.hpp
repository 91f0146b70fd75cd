#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdav.hpp"
#include "panel.hpp"

namespace microagg {

/// Privacy/utility measurements of one anonymized panel against its original.
struct PrivacyReport {
    long long k = 1;
    bool degenerate = false;
    double sse = 0.0;
    double il = 0.0;
    std::size_t il_excluded_columns = 0;      // zero-sigma columns with nonzero deviation
    std::vector<double> group_volatility;     // per group centroid, skipped groups omitted
    double volatility_mean = 0.0;
    double volatility_sd = 0.0;               // across groups (sample sd; 0 for one group)
    std::size_t excluded_returns = 0;         // zero-denominator steps across groups
    std::size_t skipped_groups = 0;           // groups with < 2 defined returns
};

/// Exponential decay fit y = a * exp(-t / b).
struct DecayFit {
    double a = 0.0;
    double b = 0.0;
    double r2 = 0.0;
    bool converged = false;
};

/// Sum of squared deviations between each record and its group centroid.
double sse(const ProfilePanel& original, const AnonymizedPanel& anonymized);

/// Mean absolute deviation scaled by sqrt(2) times each column's sample
/// standard deviation (computed on the original panel), averaged over the
/// included columns and all records. Zero-sigma columns contribute zero when
/// their deviations are zero, otherwise they are excluded from both the sum
/// and the column count (reported via excluded_columns).
double information_loss(const ProfilePanel& original, const AnonymizedPanel& anonymized,
                        std::size_t* excluded_columns = nullptr);

/// Sample standard deviation of period-over-period relative returns.
/// Steps with a zero denominator are excluded (count reported); throws
/// TooFewReturns when fewer than two returns remain.
double returns_volatility(std::span<const double> series, std::size_t* excluded_returns = nullptr);

struct PanelVolatility {
    std::vector<double> per_group;
    double mean = 0.0;
    double sd = 0.0;
    std::size_t excluded_returns = 0;
    std::size_t skipped_groups = 0;
};

/// returns_volatility per group centroid, summarized across groups. Groups
/// failing the returns precondition are skipped and counted.
PanelVolatility panel_volatility(const AnonymizedPanel& anonymized);

PrivacyReport evaluate_privacy(const ProfilePanel& original, const AnonymizedPanel& anonymized);

/// Least-squares fit of a*exp(-t/b): log-linear initializer, Gauss-Newton
/// refinement (<= 100 iterations, step tolerance 1e-10). Falls back to a grid
/// search over b when some y <= 0. r2 is computed in the original space.
DecayFit fit_exp_decay(std::span<const double> xs, std::span<const double> ys);

struct SweepOptions {
    std::vector<long long> ladder;     // anonymity levels, ascending
    int replicates = 10;
    long long sample_n = 0;            // per-replicate household subsample; 0 = all
    std::uint64_t seed = 0;
    int workers = 0;
    bool standardize = false;
};

/// Per-level sweep results aggregated across replicates. With sample_n = 0
/// MDAV is deterministic, so every replicate coincides and the spread is 0.
struct SweepEntry {
    long long k = 1;
    bool degenerate = false;
    double sse = 0.0;                   // mean across replicates
    double sse_sd = 0.0;
    double il = 0.0;
    double il_sd = 0.0;
    double volatility_mean = 0.0;       // mean across replicates of per-replicate group mean
    double volatility_sd = 0.0;         // spread of that mean across replicates
    double volatility_group_sd = 0.0;   // mean across replicates of the across-group sd
    std::size_t excluded_returns = 0;
    int replicate_count = 1;
};

struct SweepReport {
    std::vector<SweepEntry> entries;
    std::optional<DecayFit> fit;        // absent when fewer than 3 levels
    std::string rng_name;
    std::uint64_t seed = 0;
    long long sample_n = 0;
};

SweepReport metrics_sweep(const ProfilePanel& panel, const SweepOptions& options);

std::string sweep_report_to_json(const SweepReport& report);
/// `k,sse,il,volatility_mean,volatility_sd` rows.
std::string sweep_report_to_csv(const SweepReport& report);

}  // namespace microagg
