#include "microagg.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "backtest.hpp"
#include "errors.hpp"
#include "ingest.hpp"
#include "mdav.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "timeutil.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

thread_local std::string g_last_error;
thread_local std::string g_last_error_field;

ma_status map_code(microagg::ErrorCode code) {
    using microagg::ErrorCode;
    switch (code) {
        case ErrorCode::IoError:
            return MA_ERR_IO;
        case ErrorCode::ParseError:
        case ErrorCode::MissingHeader:
        case ErrorCode::NoParseableRows:
            return MA_ERR_PARSE;
        case ErrorCode::ConfigError:
            return MA_ERR_CONFIG;
        default:
            return MA_ERR_DOMAIN;
    }
}

template <typename Fn>
ma_status guarded(Fn&& fn) {
    g_last_error.clear();
    g_last_error_field.clear();
    try {
        fn();
        return MA_OK;
    } catch (const microagg::Error& e) {
        g_last_error = e.what();
        g_last_error_field = e.field();
        return map_code(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return MA_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MA_ERR_INTERNAL;
    }
}

ma_status invalid(const char* message) {
    g_last_error = message;
    g_last_error_field.clear();
    return MA_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct ma_panel {
    microagg::ProfilePanel panel;
};

struct ma_anonymized {
    microagg::AnonymizedPanel value;
};

extern "C" {

const char* ma_version(void) { return kVersion; }

const char* ma_rng_name(void) { return microagg::rng::kGeneratorName.data(); }

const char* ma_last_error(void) { return g_last_error.c_str(); }

const char* ma_last_error_field(void) { return g_last_error_field.c_str(); }

void ma_string_free(char* s) { std::free(s); }

ma_status ma_panel_read_csv(const char* path, ma_panel** out) {
    if (!path || !out) return invalid("path and out must be non-null");
    return guarded([&] { *out = new ma_panel{microagg::read_panel_csv_file(path)}; });
}

ma_status ma_panel_write_csv(const ma_panel* panel, const char* path) {
    if (!panel || !path) return invalid("panel and path must be non-null");
    return guarded([&] { microagg::write_panel_csv_file(panel->panel, path); });
}

ma_status ma_panel_from_lcl_csv(const char* path, const char* id_column, const char* time_column,
                                const char* energy_column, const char* gap_mode, long long max_gap,
                                long long* skipped_rows, long long* dropped_series, ma_panel** out) {
    if (!path || !out) return invalid("path and out must be non-null");
    if (max_gap < 0) return invalid("max_gap must be >= 0");
    return guarded([&] {
        microagg::LclColumns columns;
        if (id_column) columns.id = id_column;
        if (time_column) columns.timestamp = time_column;
        if (energy_column) columns.energy = energy_column;
        microagg::GapPolicy policy;
        if (gap_mode) policy.mode = microagg::gap_mode_from_string(gap_mode);
        policy.max_gap = static_cast<std::size_t>(max_gap);

        std::ifstream in(path, std::ios::binary);
        if (!in) microagg::fail(microagg::ErrorCode::IoError, std::string("cannot open '") + path + "'");
        microagg::LclParseResult parsed = microagg::parse_lcl_csv(in, columns);
        std::size_t dropped = 0;
        microagg::ProfilePanel panel = microagg::regularize(std::move(parsed.readings), policy, &dropped);
        if (skipped_rows) *skipped_rows = static_cast<long long>(parsed.skipped_rows);
        if (dropped_series) *dropped_series = static_cast<long long>(dropped);
        *out = new ma_panel{std::move(panel)};
    });
}

ma_status ma_panel_synth(long long households, long long days, const char* start_utc,
                         double base_load, double daily_amplitude, double weekly_amplitude,
                         double noise_sd, double spike_prob, uint64_t seed, ma_panel** out) {
    if (!out) return invalid("out must be non-null");
    return guarded([&] {
        if (households < 1) microagg::fail(microagg::ErrorCode::InvalidArgument, "households must be >= 1");
        if (days < 1) microagg::fail(microagg::ErrorCode::InvalidArgument, "days must be >= 1");
        microagg::SynthConfig config;
        config.n_households = static_cast<std::size_t>(households);
        config.days = static_cast<std::size_t>(days);
        config.base_load = base_load;
        config.daily_amplitude = daily_amplitude;
        config.weekly_amplitude = weekly_amplitude;
        config.noise_sd = noise_sd;
        config.spike_prob = spike_prob;
        config.seed = seed;
        if (start_utc) config.start = microagg::timeutil::parse_utc(start_utc);
        *out = new ma_panel{microagg::synth_panel(config)};
    });
}

ma_status ma_panel_sample(const ma_panel* panel, long long n, uint64_t seed, ma_panel** out) {
    if (!panel || !out) return invalid("panel and out must be non-null");
    return guarded([&] {
        if (n < 1) microagg::fail(microagg::ErrorCode::InvalidArgument, "sample size must be >= 1");
        *out = new ma_panel{microagg::sample_households(panel->panel, static_cast<std::size_t>(n), seed)};
    });
}

size_t ma_panel_series_count(const ma_panel* panel) { return panel ? panel->panel.num_series() : 0; }

size_t ma_panel_tick_count(const ma_panel* panel) { return panel ? panel->panel.num_ticks() : 0; }

void ma_panel_free(ma_panel* panel) { delete panel; }

ma_status ma_mdav_anonymize(const ma_panel* panel, long long k, int workers, int standardize,
                            ma_anonymized** out) {
    if (!panel || !out) return invalid("panel and out must be non-null");
    return guarded([&] {
        const microagg::GroupAssignment assignment = microagg::mdav_partition(
            panel->panel, k, microagg::MdavOptions{workers, standardize != 0});
        *out = new ma_anonymized{microagg::build_anonymized_panel(panel->panel, assignment)};
    });
}

size_t ma_anonymized_group_count(const ma_anonymized* a) { return a ? a->value.num_groups() : 0; }

size_t ma_anonymized_group_size(const ma_anonymized* a, size_t group) {
    if (!a || group >= a->value.num_groups()) return 0;
    return a->value.assignment().groups[group].size();
}

int ma_anonymized_degenerate(const ma_anonymized* a) {
    return a && a->value.assignment().degenerate ? 1 : 0;
}

ma_status ma_anonymized_write_assignment_csv(const ma_anonymized* a, const char* path) {
    if (!a || !path) return invalid("handle and path must be non-null");
    return guarded([&] { microagg::write_assignment_csv_file(a->value.assignment(), path); });
}

ma_status ma_anonymized_write_centroids_csv(const ma_anonymized* a, const char* path) {
    if (!a || !path) return invalid("handle and path must be non-null");
    return guarded([&] { microagg::write_centroid_csv_file(a->value, path); });
}

void ma_anonymized_free(ma_anonymized* a) { delete a; }

size_t ma_default_k_ladder(long long* out, size_t capacity) {
    const std::vector<long long> ladder = microagg::default_k_ladder();
    if (out) {
        const size_t n = capacity < ladder.size() ? capacity : ladder.size();
        for (size_t i = 0; i < n; ++i) out[i] = ladder[i];
    }
    return ladder.size();
}

ma_status ma_metrics_sweep(const ma_panel* panel, const long long* ladder, size_t ladder_len,
                           int replicates, long long sample_n, uint64_t seed, int workers,
                           char** json_out, char** csv_out) {
    if (!panel || !ladder || ladder_len == 0 || !json_out)
        return invalid("panel, ladder and json_out must be non-null");
    return guarded([&] {
        microagg::SweepOptions options;
        options.ladder.assign(ladder, ladder + ladder_len);
        options.replicates = replicates;
        options.sample_n = sample_n;
        options.seed = seed;
        options.workers = workers;
        const microagg::SweepReport report = microagg::metrics_sweep(panel->panel, options);
        *json_out = dup_string(microagg::sweep_report_to_json(report));
        if (csv_out) *csv_out = dup_string(microagg::sweep_report_to_csv(report));
    });
}

ma_status ma_backtest_run(const char* config_json, char** report_json, char** report_csv) {
    if (!config_json || !report_json) return invalid("config_json and report_json must be non-null");
    return guarded([&] {
        const microagg::ExperimentConfig config = microagg::parse_experiment_config(config_json);
        const microagg::ProfilePanel panel = microagg::read_panel_csv_file(config.input_path);
        const microagg::ExperimentReport report = microagg::run_experiment(config, panel);
        *report_json = dup_string(microagg::experiment_report_to_json(report));
        if (report_csv) *report_csv = dup_string(microagg::experiment_report_to_csv(report));
    });
}

ma_status ma_file_digest(const char* path, uint64_t* digest, uint64_t* bytes) {
    if (!path || !digest) return invalid("path and digest must be non-null");
    return guarded([&] {
        std::ifstream in(path, std::ios::binary);
        if (!in) microagg::fail(microagg::ErrorCode::IoError, std::string("cannot open '") + path + "'");
        std::uint64_t h = 1469598103934665603ull;
        std::uint64_t count = 0;
        char buf[1 << 16];
        while (in) {
            in.read(buf, sizeof buf);
            const std::streamsize got = in.gcount();
            for (std::streamsize i = 0; i < got; ++i) {
                h ^= static_cast<unsigned char>(buf[i]);
                h *= 1099511628211ull;
            }
            count += static_cast<std::uint64_t>(got);
        }
        *digest = h;
        if (bytes) *bytes = count;
    });
}

uint64_t ma_string_digest(const char* text) {
    return microagg::rng::fnv1a64(text ? std::string_view(text) : std::string_view());
}

}  // extern "C"
