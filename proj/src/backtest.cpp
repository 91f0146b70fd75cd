#include "backtest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "errors.hpp"
#include "ingest.hpp"
#include "threading.hpp"
#include "timeutil.hpp"

namespace microagg {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& message) {
    fail(ErrorCode::ConfigError, message, path);
}

const json& require_field(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) config_fail(path + "." + key, "missing required field");
    return obj.at(key);
}

std::int64_t parse_day(const json& value, const std::string& path) {
    if (!value.is_string()) config_fail(path, "expected a YYYY-MM-DD date string");
    try {
        return timeutil::parse_utc_date(value.get<std::string>());
    } catch (const Error& e) {
        config_fail(path, e.what());
    }
}

ModelSpec parse_model_spec(const json& m, const std::string& path) {
    if (!m.is_object()) config_fail(path, "expected a model object");
    ModelSpec spec;
    const json& kind = require_field(m, path, "kind");
    if (!kind.is_string()) config_fail(path + ".kind", "expected a string");
    try {
        spec.kind = model_kind_from_string(kind.get<std::string>());
    } catch (const Error& e) {
        config_fail(path + ".kind", e.what());
    }
    auto get_int = [&](const char* key, int fallback, int lo) {
        if (!m.contains(key)) return fallback;
        if (!m.at(key).is_number_integer()) config_fail(path + "." + key, "expected an integer");
        const int v = m.at(key).get<int>();
        if (v < lo) config_fail(path + "." + key, "value below minimum " + std::to_string(lo));
        return v;
    };
    auto get_double = [&](const char* key, double fallback, double lo) {
        if (!m.contains(key)) return fallback;
        if (!m.at(key).is_number()) config_fail(path + "." + key, "expected a number");
        const double v = m.at(key).get<double>();
        if (v < lo) config_fail(path + "." + key, "value below minimum");
        return v;
    };
    if (m.contains("name")) {
        if (!m.at("name").is_string()) config_fail(path + ".name", "expected a string");
        spec.name = m.at("name").get<std::string>();
    }
    spec.period = get_int("period", spec.period, 2);
    spec.horizon = get_int("horizon", spec.horizon, 1);
    spec.ridge_l2 = get_double("l2", spec.ridge_l2, 0.0);
    spec.mlp_hidden = get_int("hidden", spec.mlp_hidden, 1);
    spec.mlp_epochs = get_int("epochs", spec.mlp_epochs, 0);
    spec.mlp_learning_rate = get_double("learning_rate", spec.mlp_learning_rate, 0.0);
    spec.mlp_input = get_int("input_window", spec.mlp_input, 1);
    spec.mlp_batch = get_int("batch", spec.mlp_batch, 1);
    return spec;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        config_fail("", std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) config_fail("", "config root must be an object");

    ExperimentConfig config;

    const json& input = require_field(doc, "", "input");
    if (!input.is_string()) config_fail(".input", "expected a path string");
    config.input_path = input.get<std::string>();

    const json& ladder = require_field(doc, "", "k_ladder");
    if (ladder.is_string() && ladder.get<std::string>() == "default") {
        config.levels.push_back(LadderLevel{true, 0});
        for (const long long k : default_k_ladder()) config.levels.push_back(LadderLevel{false, k});
    } else if (ladder.is_array()) {
        if (ladder.empty()) config_fail(".k_ladder", "ladder must not be empty");
        for (std::size_t i = 0; i < ladder.size(); ++i) {
            const std::string path = ".k_ladder[" + std::to_string(i) + "]";
            const json& entry = ladder.at(i);
            if (entry.is_string()) {
                if (entry.get<std::string>() != "raw") config_fail(path, "expected an integer >= 2 or \"raw\"");
                config.levels.push_back(LadderLevel{true, 0});
            } else if (entry.is_number_integer()) {
                const long long k = entry.get<long long>();
                if (k < 2) config_fail(path, "k levels must be >= 2 (use \"raw\" for the untouched panel)");
                config.levels.push_back(LadderLevel{false, k});
            } else {
                config_fail(path, "expected an integer >= 2 or \"raw\"");
            }
        }
    } else {
        config_fail(".k_ladder", "expected \"default\" or an array");
    }

    const json& models = require_field(doc, "", "models");
    if (!models.is_array() || models.empty()) config_fail(".models", "expected a non-empty array");
    for (std::size_t i = 0; i < models.size(); ++i)
        config.models.push_back(parse_model_spec(models.at(i), ".models[" + std::to_string(i) + "]"));

    const json& windows = require_field(doc, "", "windows");
    if (windows.is_string() && windows.get<std::string>() == "default") {
        // resolved against the panel's year at run time
    } else if (windows.is_array()) {
        if (windows.empty()) config_fail(".windows", "expected at least one window");
        for (std::size_t i = 0; i < windows.size(); ++i) {
            const std::string path = ".windows[" + std::to_string(i) + "]";
            const json& w = windows.at(i);
            if (!w.is_object()) config_fail(path, "expected a window object");
            Window window;
            window.train_end = parse_day(require_field(w, path, "train_end"), path + ".train_end");
            window.forecast_day = window.train_end + 1;
            if (w.contains("forecast_day")) {
                const std::int64_t fd = parse_day(w.at("forecast_day"), path + ".forecast_day");
                if (fd != window.train_end + 1)
                    config_fail(path + ".forecast_day", "forecast_day must be the day after train_end");
            }
            window.label = static_cast<int>(i) + 1;
            if (w.contains("label")) {
                if (!w.at("label").is_number_integer()) config_fail(path + ".label", "expected an integer");
                window.label = w.at("label").get<int>();
            }
            config.windows.push_back(window);
        }
    } else {
        config_fail(".windows", "expected \"default\" or an array");
    }

    const json& seed = require_field(doc, "", "seed");
    if (!seed.is_number_integer()) config_fail(".seed", "expected an integer");
    config.seed = seed.get<std::uint64_t>();

    if (doc.contains("repeats")) {
        if (!doc.at("repeats").is_number_integer()) config_fail(".repeats", "expected an integer");
        config.repeats = doc.at("repeats").get<int>();
        if (config.repeats < 1) config_fail(".repeats", "repeats must be >= 1");
    }
    if (doc.contains("sample_households")) {
        if (!doc.at("sample_households").is_number_integer())
            config_fail(".sample_households", "expected an integer");
        config.sample_households = doc.at("sample_households").get<long long>();
        if (config.sample_households < 0) config_fail(".sample_households", "must be >= 0");
    }
    if (doc.contains("workers")) {
        if (!doc.at("workers").is_number_integer()) config_fail(".workers", "expected an integer");
        config.workers = doc.at("workers").get<int>();
        if (config.workers < 0) config_fail(".workers", "must be >= 0");
    }
    if (doc.contains("standardize")) {
        if (!doc.at("standardize").is_boolean()) config_fail(".standardize", "expected a boolean");
        config.standardize = doc.at("standardize").get<bool>();
    }
    return config;
}

std::vector<long long> default_k_ladder() {
    return {2, 3, 5, 10, 15, 20, 25, 30, 40, 50, 70, 100, 200, 500, 1000};
}

std::vector<Window> default_windows(int year) {
    const auto day = [year](unsigned month, unsigned dom) {
        return timeutil::days_from_civil(year, month, dom);
    };
    return {
        Window{day(8, 28), day(8, 29), 1},
        Window{day(9, 28), day(9, 29), 2},
        Window{day(10, 29), day(10, 30), 3},
        Window{day(11, 29), day(11, 30), 4},
        Window{day(12, 30), day(12, 31), 5},
    };
}

std::vector<double> aggregate_raw(std::span<const double> forecasts, std::size_t rows, std::size_t horizon) {
    if (rows < 1) fail(ErrorCode::EmptyInput, "no rows to aggregate");
    if (forecasts.size() != rows * horizon) fail(ErrorCode::ShapeMismatch, "forecast matrix shape mismatch");
    std::vector<double> out(horizon, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < horizon; ++j) out[j] += forecasts[i * horizon + j];
    return out;
}

std::vector<double> aggregate_anonymized(std::span<const double> forecasts, std::size_t rows,
                                         std::size_t horizon, std::span<const std::size_t> group_sizes) {
    if (group_sizes.size() != rows) fail(ErrorCode::ShapeMismatch, "one size per group required");
    if (forecasts.size() != rows * horizon) fail(ErrorCode::ShapeMismatch, "forecast matrix shape mismatch");
    std::vector<double> out(horizon, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        const double w = static_cast<double>(group_sizes[i]);
        for (std::size_t j = 0; j < horizon; ++j) out[j] += w * forecasts[i * horizon + j];
    }
    return out;
}

ScoreResult score(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) fail(ErrorCode::ShapeMismatch, "actual/predicted length mismatch");
    if (actual.empty()) fail(ErrorCode::EmptyInput, "empty score input");
    const std::size_t n = actual.size();
    ScoreResult r;
    double abs_sum = 0.0, sq_sum = 0.0, mape_sum = 0.0, smape_sum = 0.0;
    std::size_t mape_n = 0, smape_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = predicted[i] - actual[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        if (actual[i] != 0.0) {
            mape_sum += std::abs(e) / std::abs(actual[i]);
            ++mape_n;
        } else {
            ++r.mape_excluded;
        }
        const double denom = (std::abs(actual[i]) + std::abs(predicted[i])) / 2.0;
        if (denom > 0.0) {
            smape_sum += std::abs(e) / denom;
            ++smape_n;
        } else {
            ++r.smape_excluded;
        }
    }
    if (mape_n == 0) fail(ErrorCode::EmptyInput, "MAPE undefined: every actual is zero");
    if (smape_n == 0) fail(ErrorCode::EmptyInput, "SMAPE undefined: every point is zero");
    r.mae = abs_sum / static_cast<double>(n);
    r.mse = sq_sum / static_cast<double>(n);
    r.rmse = std::sqrt(r.mse);
    r.mape = mape_sum / static_cast<double>(mape_n);
    r.smape = smape_sum / static_cast<double>(smape_n);
    return r;
}

namespace {

struct WindowSlices {
    std::size_t train_ticks = 0;
    std::size_t day_first = 0;  // first forecast-day column
    std::size_t day_ticks = 0;  // == horizon
};

WindowSlices locate_window(const TimeIndex& index, const Window& window) {
    const std::int64_t train_to = (window.train_end + 1) * 86400;
    const std::int64_t fc_from = window.forecast_day * 86400;
    const std::int64_t fc_to = fc_from + 86400;
    if (index.start >= train_to || fc_from < index.start || fc_to > index.end())
        fail(ErrorCode::OutOfRange,
             "panel does not span window " + std::to_string(window.label) + " (" +
                 timeutil::format_date(window.forecast_day) + ")");
    WindowSlices s;
    s.train_ticks = index.index_of(train_to - index.step) + 1;
    s.day_first = index.index_of(fc_from);
    s.day_ticks = static_cast<std::size_t>(86400 / index.step);
    return s;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const ProfilePanel& panel) {
    panel.require_dense("run_experiment");
    if (config.levels.empty()) fail(ErrorCode::InvalidArgument, "no anonymity levels configured");
    if (config.models.empty()) fail(ErrorCode::InvalidArgument, "no models configured");
    if (config.repeats < 1) fail(ErrorCode::InvalidArgument, "repeats must be >= 1");
    if (config.sample_households < 0 ||
        config.sample_households > static_cast<long long>(panel.num_series()))
        fail(ErrorCode::InvalidArgument, "sample_households outside [0, N]");

    std::vector<Window> windows = config.windows;
    if (windows.empty()) {
        std::int64_t start_days = panel.index().start / 86400;
        int year;
        unsigned month, dom;
        timeutil::civil_from_days(start_days, year, month, dom);
        windows = default_windows(year);
    }
    const std::size_t horizon = static_cast<std::size_t>(86400 / panel.index().step);
    for (const auto& model : config.models)
        if (static_cast<std::size_t>(model.horizon) != horizon)
            fail(ErrorCode::InvalidArgument,
                 "model '" + model.label() + "' horizon must equal one day (" + std::to_string(horizon) + " ticks)");
    for (const auto& window : windows) locate_window(panel.index(), window);  // validate up front

    const std::size_t n_levels = config.levels.size();
    const std::size_t n_models = config.models.size();
    const std::size_t n_windows = windows.size();
    const std::size_t reps = static_cast<std::size_t>(config.repeats);
    const bool subsample = config.sample_households > 0 &&
                           config.sample_households < static_cast<long long>(panel.num_series());

    std::vector<CellRecord> cells(reps * n_levels * n_windows * n_models);
    const auto cell_at = [&](std::size_t rep, std::size_t level, std::size_t window,
                             std::size_t model) -> CellRecord& {
        return cells[((rep * n_levels + level) * n_windows + window) * n_models + model];
    };

    threading::parallel_for(reps * n_levels, config.workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t job = begin; job < end; ++job) {
            const std::size_t rep = job / n_levels;
            const std::size_t level_idx = job % n_levels;
            const LadderLevel level = config.levels[level_idx];

            ProfilePanel sampled;
            const ProfilePanel* base = &panel;
            if (subsample) {
                sampled = sample_households(
                    panel, static_cast<std::size_t>(config.sample_households),
                    rng::derive_seed(config.seed, "backtest/repeat=" + std::to_string(rep + 1) + "/sample"));
                base = &sampled;
            }

            // Forecaster inputs: households for raw, group centroids otherwise.
            std::optional<AnonymizedPanel> anonymized;
            std::vector<std::span<const double>> series;
            std::vector<std::string> series_names;
            std::vector<std::size_t> sizes;
            if (level.raw) {
                for (std::size_t i = 0; i < base->num_series(); ++i) {
                    series.push_back(base->row(i));
                    series_names.push_back(base->ids()[i]);
                }
            } else {
                const GroupAssignment assignment =
                    mdav_partition(*base, level.k, MdavOptions{1, config.standardize});
                anonymized.emplace(build_anonymized_panel(*base, assignment));
                for (std::size_t g = 0; g < anonymized->num_groups(); ++g) {
                    series.push_back(anonymized->centroid(g));
                    series_names.push_back("group_" + std::to_string(g));
                }
                sizes = anonymized->assignment().sizes();
            }

            for (std::size_t w = 0; w < n_windows; ++w) {
                const WindowSlices slices = locate_window(base->index(), windows[w]);
                const TimeIndex train_calendar{base->index().start, base->index().step, slices.train_ticks};

                // Aggregated actuals: raw household sums for the forecast day.
                std::vector<double> actual(slices.day_ticks, 0.0);
                for (std::size_t i = 0; i < base->num_series(); ++i) {
                    const auto row = base->row(i);
                    for (std::size_t j = 0; j < slices.day_ticks; ++j)
                        actual[j] += row[slices.day_first + j];
                }

                for (std::size_t m = 0; m < n_models; ++m) {
                    CellRecord& cell = cell_at(rep, level_idx, w, m);
                    cell.level = level.label();
                    cell.model = config.models[m].label();
                    cell.window = windows[w].label;
                    cell.repeat = static_cast<int>(rep) + 1;
                    try {
                        std::vector<double> forecasts(series.size() * slices.day_ticks);
                        for (std::size_t s = 0; s < series.size(); ++s) {
                            const std::uint64_t seed = rng::derive_seed(
                                config.seed, "backtest/repeat=" + std::to_string(rep + 1) +
                                                 "/level=" + level.label() + "/window=" +
                                                 std::to_string(windows[w].label) + "/model=" +
                                                 config.models[m].label() + "/series=" + series_names[s]);
                            const std::span<const double> train = series[s].subspan(0, slices.train_ticks);
                            const FittedModel fitted =
                                fit_model(config.models[m], train, train_calendar, seed);
                            const std::vector<double> prediction = predict_recursive(
                                fitted, train, train_calendar, static_cast<int>(slices.day_ticks));
                            std::copy(prediction.begin(), prediction.end(),
                                      forecasts.begin() + s * slices.day_ticks);
                        }
                        const std::vector<double> aggregated =
                            level.raw
                                ? aggregate_raw(forecasts, series.size(), slices.day_ticks)
                                : aggregate_anonymized(forecasts, series.size(), slices.day_ticks, sizes);
                        cell.scores = score(actual, aggregated);
                        cell.ok = true;
                    } catch (const std::exception& e) {
                        cell.ok = false;
                        cell.error = e.what();
                    }
                }
            }
        }
    });

    ExperimentReport report;
    report.rng_name = std::string(rng::kGeneratorName);
    report.seed = config.seed;
    report.records.reserve(cells.size());
    for (std::size_t level = 0; level < n_levels; ++level)
        for (std::size_t m = 0; m < n_models; ++m)
            for (std::size_t w = 0; w < n_windows; ++w)
                for (std::size_t rep = 0; rep < reps; ++rep)
                    report.records.push_back(cell_at(rep, level, w, m));

    for (const auto& record : report.records)
        if (!record.ok) ++report.failures;

    const char* metric_names[] = {"mae", "mape", "mse", "rmse", "smape"};
    for (std::size_t level = 0; level < n_levels; ++level) {
        for (std::size_t m = 0; m < n_models; ++m) {
            std::vector<double> values[5];
            for (std::size_t w = 0; w < n_windows; ++w) {
                for (std::size_t rep = 0; rep < reps; ++rep) {
                    const CellRecord& cell = cell_at(rep, level, w, m);
                    if (!cell.ok) continue;
                    values[0].push_back(cell.scores.mae);
                    values[1].push_back(cell.scores.mape);
                    values[2].push_back(cell.scores.mse);
                    values[3].push_back(cell.scores.rmse);
                    values[4].push_back(cell.scores.smape);
                }
            }
            for (int metric = 0; metric < 5; ++metric) {
                SummaryRecord s;
                s.level = config.levels[level].label();
                s.model = config.models[m].label();
                s.metric = metric_names[metric];
                s.cells = values[metric].size();
                if (!values[metric].empty()) {
                    double mean = 0.0;
                    for (const double v : values[metric]) mean += v;
                    mean /= static_cast<double>(values[metric].size());
                    double ss = 0.0;
                    for (const double v : values[metric]) ss += (v - mean) * (v - mean);
                    s.mean = mean;
                    s.sd = values[metric].size() > 1
                               ? std::sqrt(ss / static_cast<double>(values[metric].size() - 1))
                               : 0.0;
                }
                report.summary.push_back(s);
            }
        }
    }
    return report;
}

std::string experiment_report_to_json(const ExperimentReport& report) {
    nlohmann::ordered_json doc;
    doc["rng"] = report.rng_name;
    doc["seed"] = report.seed;
    doc["failures"] = report.failures;
    doc["records"] = nlohmann::ordered_json::array();
    for (const auto& r : report.records) {
        nlohmann::ordered_json rec;
        rec["k"] = r.level;
        rec["model"] = r.model;
        rec["window"] = r.window;
        rec["repeat"] = r.repeat;
        rec["ok"] = r.ok;
        if (r.ok) {
            rec["metrics"] = {{"mae", r.scores.mae},
                              {"mape", r.scores.mape},
                              {"mse", r.scores.mse},
                              {"rmse", r.scores.rmse},
                              {"smape", r.scores.smape}};
            rec["mape_excluded"] = r.scores.mape_excluded;
            rec["smape_excluded"] = r.scores.smape_excluded;
        } else {
            rec["error"] = r.error;
        }
        doc["records"].push_back(rec);
    }
    doc["summary"] = nlohmann::ordered_json::array();
    for (const auto& s : report.summary) {
        doc["summary"].push_back({{"k", s.level},
                                  {"model", s.model},
                                  {"metric", s.metric},
                                  {"mean", s.mean},
                                  {"sd", s.sd},
                                  {"cells", s.cells}});
    }
    return doc.dump(2) + "\n";
}

std::string experiment_report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "k,model,window,repeat,metric,value\n";
    for (const auto& r : report.records) {
        if (!r.ok) continue;
        const std::pair<const char*, double> metrics[] = {{"mae", r.scores.mae},
                                                          {"mape", r.scores.mape},
                                                          {"mse", r.scores.mse},
                                                          {"rmse", r.scores.rmse},
                                                          {"smape", r.scores.smape}};
        for (const auto& [name, value] : metrics) {
            out << r.level << ',' << csv::escape_field(r.model) << ',' << r.window << ',' << r.repeat
                << ',' << name << ',' << csv::format_double(value) << '\n';
        }
    }
    return out.str();
}

}  // namespace microagg
