#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "errors.hpp"
#include "ingest.hpp"
#include "rng.hpp"
#include "threading.hpp"

namespace microagg {

namespace {

void require_same_shape(const ProfilePanel& original, const AnonymizedPanel& anonymized) {
    if (anonymized.assignment().ids != original.ids() || anonymized.index() != original.index())
        fail(ErrorCode::ShapeMismatch, "anonymized panel does not match the original panel");
}

std::pair<double, double> mean_sd(std::span<const double> xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (const double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (const double x : xs) {
        const double d = x - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace

double sse(const ProfilePanel& original, const AnonymizedPanel& anonymized) {
    require_same_shape(original, anonymized);
    const std::size_t t = original.num_ticks();
    double acc = 0.0;
    for (std::size_t i = 0; i < original.num_series(); ++i) {
        const auto x = original.row(i);
        const auto c = anonymized.expanded_row(i);
        for (std::size_t j = 0; j < t; ++j) {
            const double d = x[j] - c[j];
            acc += d * d;
        }
    }
    return acc;
}

double information_loss(const ProfilePanel& original, const AnonymizedPanel& anonymized,
                        std::size_t* excluded_columns) {
    require_same_shape(original, anonymized);
    const std::size_t n = original.num_series();
    const std::size_t t = original.num_ticks();

    // Per-column sample standard deviation of the original panel.
    std::vector<double> sigma(t);
    {
        std::vector<double> mean(t, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = original.row(i);
            for (std::size_t j = 0; j < t; ++j) mean[j] += x[j];
        }
        for (double& m : mean) m /= static_cast<double>(n);
        std::vector<double> ss(t, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = original.row(i);
            for (std::size_t j = 0; j < t; ++j) {
                const double d = x[j] - mean[j];
                ss[j] += d * d;
            }
        }
        for (std::size_t j = 0; j < t; ++j)
            sigma[j] = n > 1 ? std::sqrt(ss[j] / static_cast<double>(n - 1)) : 0.0;
    }

    std::vector<double> abs_dev(t, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = original.row(i);
        const auto c = anonymized.expanded_row(i);
        for (std::size_t j = 0; j < t; ++j) abs_dev[j] += std::abs(x[j] - c[j]);
    }

    const double sqrt2 = std::sqrt(2.0);
    double acc = 0.0;
    std::size_t included = 0;
    std::size_t excluded = 0;
    for (std::size_t j = 0; j < t; ++j) {
        if (sigma[j] == 0.0) {
            if (abs_dev[j] == 0.0) {
                ++included;  // contributes zero
            } else {
                ++excluded;
            }
            continue;
        }
        acc += abs_dev[j] / (sqrt2 * sigma[j]);
        ++included;
    }
    if (excluded_columns) *excluded_columns = excluded;
    if (included == 0) return 0.0;
    return acc / (static_cast<double>(included) * static_cast<double>(n));
}

double returns_volatility(std::span<const double> series, std::size_t* excluded_returns) {
    if (series.size() < 3) fail(ErrorCode::TooShort, "volatility needs at least 3 observations");
    std::vector<double> returns;
    returns.reserve(series.size() - 1);
    std::size_t excluded = 0;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double prev = series[i - 1];
        if (prev == 0.0) {
            ++excluded;
            continue;
        }
        returns.push_back((series[i] - prev) / prev);
    }
    if (excluded_returns) *excluded_returns = excluded;
    if (returns.size() < 2)
        fail(ErrorCode::TooFewReturns, "fewer than 2 defined returns");
    const auto [mean, sd] = mean_sd(returns);
    (void)mean;
    return sd;
}

PanelVolatility panel_volatility(const AnonymizedPanel& anonymized) {
    if (anonymized.num_groups() < 1) fail(ErrorCode::EmptyInput, "no groups");
    PanelVolatility out;
    for (std::size_t g = 0; g < anonymized.num_groups(); ++g) {
        std::size_t excluded = 0;
        try {
            out.per_group.push_back(returns_volatility(anonymized.centroid(g), &excluded));
            out.excluded_returns += excluded;
        } catch (const Error&) {
            ++out.skipped_groups;
        }
    }
    const auto [mean, sd] = mean_sd(out.per_group);
    out.mean = mean;
    out.sd = sd;
    return out;
}

PrivacyReport evaluate_privacy(const ProfilePanel& original, const AnonymizedPanel& anonymized) {
    PrivacyReport report;
    report.k = anonymized.assignment().k;
    report.degenerate = anonymized.assignment().degenerate;
    report.sse = sse(original, anonymized);
    report.il = information_loss(original, anonymized, &report.il_excluded_columns);
    PanelVolatility vol = panel_volatility(anonymized);
    report.group_volatility = std::move(vol.per_group);
    report.volatility_mean = vol.mean;
    report.volatility_sd = vol.sd;
    report.excluded_returns = vol.excluded_returns;
    report.skipped_groups = vol.skipped_groups;
    return report;
}

namespace {

double decay_sse(std::span<const double> xs, std::span<const double> ys, double a, double b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - a * std::exp(-xs[i] / b);
        acc += r * r;
    }
    return acc;
}

double r_squared(std::span<const double> xs, std::span<const double> ys, double a, double b) {
    double mean = 0.0;
    for (const double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    double ss_tot = 0.0;
    for (const double y : ys) ss_tot += (y - mean) * (y - mean);
    const double ss_res = decay_sse(xs, ys, a, b);
    if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
    return 1.0 - ss_res / ss_tot;
}

// Ordinary least squares of ln(y) on t; returns (a, b) or nullopt when the
// slope is non-negative (no decay to initialize from).
std::optional<std::pair<double, double>> log_linear_init(std::span<const double> xs,
                                                         std::span<const double> ys) {
    const std::size_t n = xs.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ly = std::log(ys[i]);
        sx += xs[i];
        sy += ly;
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ly;
    }
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    const double slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / static_cast<double>(n);
    if (slope >= 0.0) return std::nullopt;
    return std::make_pair(std::exp(intercept), -1.0 / slope);
}

// For a fixed b the optimal amplitude is linear least squares in closed form.
double best_amplitude(std::span<const double> xs, std::span<const double> ys, double b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = std::exp(-xs[i] / b);
        num += ys[i] * e;
        den += e * e;
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace

DecayFit fit_exp_decay(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) fail(ErrorCode::ShapeMismatch, "xs and ys differ in length");
    if (xs.size() < 3) fail(ErrorCode::TooFewPoints, "decay fit needs at least 3 points");

    double a, b;
    const bool all_positive = std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0; });
    std::optional<std::pair<double, double>> init;
    if (all_positive) init = log_linear_init(xs, ys);
    if (init) {
        a = init->first;
        b = init->second;
    } else {
        // Grid search over the decay constant, spanning the x range.
        const auto [x_lo, x_hi] = std::minmax_element(xs.begin(), xs.end());
        const double b_lo = std::max(1e-6, (*x_hi - *x_lo) / 1e3);
        const double b_hi = std::max(b_lo * 10.0, (*x_hi - *x_lo) * 10.0);
        double best_b = b_lo, best_sse = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 200; ++i) {
            const double cand = b_lo * std::pow(b_hi / b_lo, i / 200.0);
            const double cand_a = best_amplitude(xs, ys, cand);
            const double s = decay_sse(xs, ys, cand_a, cand);
            if (s < best_sse) {
                best_sse = s;
                best_b = cand;
            }
        }
        b = best_b;
        a = best_amplitude(xs, ys, b);
    }

    bool converged = false;
    double current_sse = decay_sse(xs, ys, a, b);
    for (int iter = 0; iter < 100; ++iter) {
        // Gauss-Newton normal equations for residuals y - a*exp(-x/b).
        double jaa = 0.0, jab = 0.0, jbb = 0.0, ga = 0.0, gb = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double e = std::exp(-xs[i] / b);
            const double r = ys[i] - a * e;
            const double da = e;
            const double db = a * e * xs[i] / (b * b);
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        const double det = jaa * jbb - jab * jab;
        if (det == 0.0 || !std::isfinite(det)) break;
        double step_a = (jbb * ga - jab * gb) / det;
        double step_b = (jaa * gb - jab * ga) / det;

        // Backtrack when a full step overshoots.
        double scale = 1.0;
        double next_sse = 0.0;
        double na = a, nb = b;
        bool improved = false;
        for (int half = 0; half < 20; ++half) {
            na = a + scale * step_a;
            nb = b + scale * step_b;
            if (nb > 0.0) {
                next_sse = decay_sse(xs, ys, na, nb);
                if (next_sse <= current_sse) {
                    improved = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if (!improved) break;
        const double moved = std::max(std::abs(na - a), std::abs(nb - b));
        a = na;
        b = nb;
        current_sse = next_sse;
        if (moved < 1e-10 * std::max(1.0, std::max(std::abs(a), std::abs(b)))) {
            converged = true;
            break;
        }
    }
    if (!converged && current_sse <= 1e-24) converged = true;  // already exact

    DecayFit fit;
    fit.a = a;
    fit.b = b;
    fit.converged = converged;
    fit.r2 = r_squared(xs, ys, a, b);
    return fit;
}

SweepReport metrics_sweep(const ProfilePanel& panel, const SweepOptions& options) {
    if (options.ladder.empty()) fail(ErrorCode::InvalidArgument, "k ladder is empty");
    if (options.replicates < 1) fail(ErrorCode::InvalidArgument, "replicates must be >= 1");
    panel.require_dense("metrics_sweep");
    if (options.sample_n < 0 || options.sample_n > static_cast<long long>(panel.num_series()))
        fail(ErrorCode::InvalidArgument, "sample size outside [0, N]");

    // With no subsampling MDAV is deterministic, so all replicates coincide;
    // compute once and report zero spread.
    const bool subsampled = options.sample_n > 0 &&
                            options.sample_n < static_cast<long long>(panel.num_series());
    const int effective = subsampled ? options.replicates : 1;

    std::vector<PrivacyReport> cells(options.ladder.size() * static_cast<std::size_t>(effective));

    threading::parallel_for(cells.size(), options.workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            const std::size_t level = c / static_cast<std::size_t>(effective);
            const std::size_t rep = c % static_cast<std::size_t>(effective);
            ProfilePanel subsample;
            const ProfilePanel* input = &panel;
            if (subsampled) {
                const std::uint64_t rep_seed =
                    rng::derive_seed(options.seed, "metrics/replicate=" + std::to_string(rep) + "/sample");
                subsample = sample_households(panel, static_cast<std::size_t>(options.sample_n), rep_seed);
                input = &subsample;
            }
            const GroupAssignment assignment =
                mdav_partition(*input, options.ladder[level], MdavOptions{1, options.standardize});
            const AnonymizedPanel anonymized = build_anonymized_panel(*input, assignment);
            cells[c] = evaluate_privacy(*input, anonymized);
        }
    });

    SweepReport report;
    report.rng_name = std::string(rng::kGeneratorName);
    report.seed = options.seed;
    report.sample_n = options.sample_n;
    for (std::size_t level = 0; level < options.ladder.size(); ++level) {
        std::vector<double> sses, ils, vols, group_sds;
        std::size_t excluded = 0;
        bool degenerate = false;
        for (int rep = 0; rep < effective; ++rep) {
            const auto& r = cells[level * static_cast<std::size_t>(effective) + static_cast<std::size_t>(rep)];
            sses.push_back(r.sse);
            ils.push_back(r.il);
            vols.push_back(r.volatility_mean);
            group_sds.push_back(r.volatility_sd);
            excluded += r.excluded_returns;
            degenerate = degenerate || r.degenerate;
        }
        SweepEntry entry;
        entry.k = options.ladder[level];
        entry.degenerate = degenerate;
        std::tie(entry.sse, entry.sse_sd) = mean_sd(sses);
        std::tie(entry.il, entry.il_sd) = mean_sd(ils);
        std::tie(entry.volatility_mean, entry.volatility_sd) = mean_sd(vols);
        const auto [gsd_mean, gsd_sd] = mean_sd(group_sds);
        (void)gsd_sd;
        entry.volatility_group_sd = gsd_mean;
        entry.excluded_returns = excluded;
        entry.replicate_count = options.replicates;
        report.entries.push_back(entry);
    }

    if (report.entries.size() >= 3) {
        std::vector<double> xs, ys;
        for (const auto& e : report.entries) {
            xs.push_back(static_cast<double>(e.k));
            ys.push_back(e.volatility_mean);
        }
        report.fit = fit_exp_decay(xs, ys);
    }
    return report;
}

std::string sweep_report_to_json(const SweepReport& report) {
    nlohmann::ordered_json doc;
    doc["rng"] = report.rng_name;
    doc["seed"] = report.seed;
    doc["sample_n"] = report.sample_n;
    doc["levels"] = nlohmann::ordered_json::array();
    for (const auto& e : report.entries) {
        nlohmann::ordered_json level;
        level["k"] = e.k;
        level["degenerate"] = e.degenerate;
        level["sse"] = e.sse;
        level["sse_sd"] = e.sse_sd;
        level["il"] = e.il;
        level["il_sd"] = e.il_sd;
        level["volatility_mean"] = e.volatility_mean;
        level["volatility_sd"] = e.volatility_sd;
        level["volatility_group_sd"] = e.volatility_group_sd;
        level["excluded_returns"] = e.excluded_returns;
        level["replicate_count"] = e.replicate_count;
        doc["levels"].push_back(level);
    }
    if (report.fit) {
        doc["decay_fit"] = {{"a", report.fit->a},
                            {"b", report.fit->b},
                            {"r2", report.fit->r2},
                            {"converged", report.fit->converged}};
    } else {
        doc["decay_fit"] = {{"insufficient_points", true}};
    }
    return doc.dump(2) + "\n";
}

std::string sweep_report_to_csv(const SweepReport& report) {
    std::ostringstream out;
    out << "k,sse,il,volatility_mean,volatility_sd\n";
    for (const auto& e : report.entries) {
        out << e.k << ',' << csv::format_double(e.sse) << ',' << csv::format_double(e.il) << ','
            << csv::format_double(e.volatility_mean) << ',' << csv::format_double(e.volatility_sd) << '\n';
    }
    return out.str();
}

}  // namespace microagg
