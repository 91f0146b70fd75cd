/*
 * microagg - k-anonymous microaggregation of half-hourly load panels,
 * privacy/utility metrics, and an aggregated day-ahead forecasting backtest.
 *
 * C API of the shared library. All functions return ma_status; on failure
 * ma_last_error() describes the problem for the calling thread. Objects are
 * opaque handles released with their matching *_free function. Strings
 * returned through char** are heap-allocated and released with
 * ma_string_free().
 */
#ifndef MICROAGG_H
#define MICROAGG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MICROAGG_API __declspec(dllexport)
#else
#define MICROAGG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ma_status {
    MA_OK = 0,
    MA_ERR_INVALID_ARGUMENT = 1, /* null handle, bad flag value */
    MA_ERR_IO = 2,               /* file cannot be opened/written */
    MA_ERR_PARSE = 3,            /* malformed input data */
    MA_ERR_DOMAIN = 4,           /* violated precondition or domain rule */
    MA_ERR_CONFIG = 5,           /* config schema violation; see ma_last_error_field() */
    MA_ERR_INTERNAL = 6
} ma_status;

typedef struct ma_panel ma_panel;           /* N aligned series x T half-hourly ticks */
typedef struct ma_anonymized ma_anonymized; /* MDAV partition + group centroids */

MICROAGG_API const char* ma_version(void);

/* Name of the pseudo-random generator pipeline (recorded in manifests so
 * runs are reproducible across implementations). */
MICROAGG_API const char* ma_rng_name(void);

/* Message for the most recent failure on this thread. */
MICROAGG_API const char* ma_last_error(void);

/* Offending config field path (e.g. ".seed") after MA_ERR_CONFIG; empty
 * string otherwise. */
MICROAGG_API const char* ma_last_error_field(void);

MICROAGG_API void ma_string_free(char* s);

/* ---- panels ------------------------------------------------------------ */

/* Wide CSV: `timestamp` column (ISO-8601 UTC) then one column per series. */
MICROAGG_API ma_status ma_panel_read_csv(const char* path, ma_panel** out);
MICROAGG_API ma_status ma_panel_write_csv(const ma_panel* panel, const char* path);

/* Long-format readings CSV (Low Carbon London layout). Pass NULL for the
 * default column names `LCLid`, `DateTime`, `KWH/hh (per half hour)`.
 * gap_mode is one of "drop-series", "fill-zero", "linear-interpolate";
 * max_gap bounds interpolated runs. Unparseable rows are skipped and
 * counted; series removed by the gap policy are counted separately. */
MICROAGG_API ma_status ma_panel_from_lcl_csv(const char* path, const char* id_column,
                                             const char* time_column, const char* energy_column,
                                             const char* gap_mode, long long max_gap,
                                             long long* skipped_rows, long long* dropped_series,
                                             ma_panel** out);

/* Synthetic panel: shared daily/weekly sinusoids with per-household jitter,
 * Gaussian noise, occasional positive spikes; clipped at zero;
 * deterministic per seed. start_utc NULL means 2013-01-01T00:00:00Z. */
MICROAGG_API ma_status ma_panel_synth(long long households, long long days, const char* start_utc,
                                      double base_load, double daily_amplitude,
                                      double weekly_amplitude, double noise_sd, double spike_prob,
                                      uint64_t seed, ma_panel** out);

/* Uniform household sample without replacement; deterministic per seed. */
MICROAGG_API ma_status ma_panel_sample(const ma_panel* panel, long long n, uint64_t seed,
                                       ma_panel** out);

MICROAGG_API size_t ma_panel_series_count(const ma_panel* panel);
MICROAGG_API size_t ma_panel_tick_count(const ma_panel* panel);
MICROAGG_API void ma_panel_free(ma_panel* panel);

/* ---- MDAV microaggregation --------------------------------------------- */

/* Partitions the panel into groups of size [k, 2k-1] (MDAV) and builds the
 * group-mean centroids. Deterministic for any worker count; ties break
 * toward the smallest series id. k > N collapses to one flagged group
 * rather than failing, so ladder sweeps never abort. standardize != 0
 * scales columns to unit variance for the distance computations only. */
MICROAGG_API ma_status ma_mdav_anonymize(const ma_panel* panel, long long k, int workers,
                                         int standardize, ma_anonymized** out);

MICROAGG_API size_t ma_anonymized_group_count(const ma_anonymized* a);
MICROAGG_API size_t ma_anonymized_group_size(const ma_anonymized* a, size_t group);
MICROAGG_API int ma_anonymized_degenerate(const ma_anonymized* a);

/* `series_id,group_index` rows. */
MICROAGG_API ma_status ma_anonymized_write_assignment_csv(const ma_anonymized* a, const char* path);
/* Wide CSV of centroid series named `group_<index>`. */
MICROAGG_API ma_status ma_anonymized_write_centroids_csv(const ma_anonymized* a, const char* path);
MICROAGG_API void ma_anonymized_free(ma_anonymized* a);

/* ---- privacy metrics ---------------------------------------------------- */

/* Copies the default anonymity ladder into `out` (up to capacity) and
 * returns the full ladder length. Call with out == NULL for the length. */
MICROAGG_API size_t ma_default_k_ladder(long long* out, size_t capacity);

/* Sweeps the ladder: per level SSE, information loss, and centroid returns
 * volatility, aggregated over `replicates` runs, plus an exponential-decay
 * fit of volatility versus k. sample_n > 0 draws that many households per
 * replicate (seeded), making replicates distinct; sample_n = 0 uses the
 * whole panel. json_out receives the report; csv_out (optional, may be
 * NULL) receives plot-ready `k,sse,il,volatility_mean,volatility_sd` rows. */
MICROAGG_API ma_status ma_metrics_sweep(const ma_panel* panel, const long long* ladder,
                                        size_t ladder_len, int replicates, long long sample_n,
                                        uint64_t seed, int workers, char** json_out,
                                        char** csv_out);

/* ---- forecasting backtest ----------------------------------------------- */

/* Runs the experiment grid described by a JSON config document (see README
 * for the schema) and returns the report as JSON plus long-form CSV
 * `k,model,window,repeat,metric,value`. The input panel is loaded from the
 * config's `input` path. On MA_ERR_CONFIG, ma_last_error_field() points at
 * the offending field. */
MICROAGG_API ma_status ma_backtest_run(const char* config_json, char** report_json,
                                       char** report_csv);

/* ---- hashing (manifests) ------------------------------------------------ */

/* FNV-1a 64-bit digest of a file's bytes; also reports the byte count. */
MICROAGG_API ma_status ma_file_digest(const char* path, uint64_t* digest, uint64_t* bytes);
MICROAGG_API uint64_t ma_string_digest(const char* text);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MICROAGG_H */
