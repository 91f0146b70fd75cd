// microagg CLI: synth / ingest / anonymize / metrics / backtest subcommands
// wired through the shared library's C API. Every command writes a run
// manifest next to its primary output so results can be reproduced and
// compared byte for byte.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "microagg.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDomain = 4;
constexpr int kExitConfig = 5;

int exit_code_for(ma_status status) {
    switch (status) {
        case MA_OK: return kExitOk;
        case MA_ERR_IO: return kExitIo;
        case MA_ERR_CONFIG: return kExitConfig;
        default: return kExitDomain;
    }
}

[[noreturn]] void die(ma_status status, const std::string& context) {
    std::cerr << "microagg: " << context << ": " << ma_last_error();
    if (status == MA_ERR_CONFIG && ma_last_error_field()[0] != '\0')
        std::cerr << " (at " << ma_last_error_field() << ")";
    std::cerr << "\n";
    std::exit(exit_code_for(status));
}

void check(ma_status status, const std::string& context) {
    if (status != MA_OK) die(status, context);
}

struct StringHandle {
    char* ptr = nullptr;
    ~StringHandle() { ma_string_free(ptr); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "microagg: cannot open '" << path << "' for writing\n";
        std::exit(kExitIo);
    }
    out << content;
    out.flush();
    if (!out) {
        std::cerr << "microagg: failed writing '" << path << "'\n";
        std::exit(kExitIo);
    }
}

std::string hex64(uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Collects everything the manifest records. Execution knobs (worker count)
// stay out of the config hash: they may not change any output byte.
class ManifestBuilder {
public:
    ManifestBuilder(std::string command, const std::string& started)
        : command_(std::move(command)), started_(started) {}

    void config(const std::string& key, const std::string& value) { config_[key] = value; }
    void config(const std::string& key, long long value) { config_[key] = std::to_string(value); }
    void config(const std::string& key, uint64_t value) { config_[key] = std::to_string(value); }
    void config(const std::string& key, double value) {
        std::ostringstream s;
        s.precision(17);
        s << value;
        config_[key] = s.str();
    }
    void seed(uint64_t value) {
        seed_ = value;
        config("seed", value);
    }
    void input(const std::string& path) {
        uint64_t digest = 0, bytes = 0;
        check(ma_file_digest(path.c_str(), &digest, &bytes), "digesting '" + path + "'");
        inputs_.push_back({path, digest, bytes});
    }
    void output(const std::string& path) { outputs_.push_back(path); }

    void write(const std::string& path, const std::string& finished) const {
        std::string canonical = "command=" + command_;
        for (const auto& [key, value] : config_) canonical += ";" + key + "=" + value;

        nlohmann::ordered_json doc;
        doc["tool"] = {{"name", "microagg"}, {"version", ma_version()}};
        doc["command"] = command_;
        doc["config"] = config_;
        doc["config_hash"] = hex64(ma_string_digest(canonical.c_str()));
        doc["root_seed"] = seed_;
        doc["rng"] = ma_rng_name();
        doc["inputs"] = nlohmann::ordered_json::array();
        for (const auto& in : inputs_)
            doc["inputs"].push_back(
                {{"path", in.path}, {"fnv1a64", hex64(in.digest)}, {"bytes", in.bytes}});
        doc["outputs"] = outputs_;
        // Timestamps live in their own object so content comparisons can
        // drop this single field.
        doc["timestamps"] = {{"started_utc", started_}, {"finished_utc", finished}};
        write_file(path, doc.dump(2) + "\n");
    }

private:
    struct InputRecord {
        std::string path;
        uint64_t digest;
        uint64_t bytes;
    };
    std::string command_;
    std::string started_;
    std::map<std::string, std::string> config_;
    uint64_t seed_ = 0;
    std::vector<InputRecord> inputs_;
    std::vector<std::string> outputs_;
};

std::string timestamp_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct PanelHandle {
    ma_panel* ptr = nullptr;
    ~PanelHandle() { ma_panel_free(ptr); }
};

struct AnonymizedHandle {
    ma_anonymized* ptr = nullptr;
    ~AnonymizedHandle() { ma_anonymized_free(ptr); }
};

std::vector<long long> parse_ladder(const std::string& text) {
    if (text == "default") {
        std::vector<long long> ladder(ma_default_k_ladder(nullptr, 0));
        ma_default_k_ladder(ladder.data(), ladder.size());
        return ladder;
    }
    std::vector<long long> ladder;
    std::stringstream s(text);
    std::string item;
    while (std::getline(s, item, ',')) {
        try {
            std::size_t pos = 0;
            const long long k = std::stoll(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            ladder.push_back(k);
        } catch (const std::exception&) {
            std::cerr << "microagg: --k-ladder entry '" << item << "' is not an integer\n";
            std::exit(kExitDomain);
        }
    }
    if (ladder.empty()) {
        std::cerr << "microagg: --k-ladder is empty\n";
        std::exit(kExitDomain);
    }
    return ladder;
}

int run_synth(long long households, long long days, uint64_t seed, const std::string& out,
              const std::string& start, double base_load, double daily_amplitude,
              double weekly_amplitude, double noise_sd, double spike_prob,
              const std::string& manifest_path) {
    if (households < 1) {
        std::cerr << "microagg: --households must be >= 1 (got " << households << ")\n";
        return kExitDomain;
    }
    if (days < 1) {
        std::cerr << "microagg: --days must be >= 1 (got " << days << ")\n";
        return kExitDomain;
    }
    ManifestBuilder manifest("synth", timestamp_now());
    manifest.config("households", households);
    manifest.config("days", days);
    manifest.config("start", start);
    manifest.config("base_load", base_load);
    manifest.config("daily_amplitude", daily_amplitude);
    manifest.config("weekly_amplitude", weekly_amplitude);
    manifest.config("noise_sd", noise_sd);
    manifest.config("spike_prob", spike_prob);
    manifest.seed(seed);

    PanelHandle panel;
    check(ma_panel_synth(households, days, start.c_str(), base_load, daily_amplitude,
                         weekly_amplitude, noise_sd, spike_prob, seed, &panel.ptr),
          "generating panel");
    check(ma_panel_write_csv(panel.ptr, out.c_str()), "writing '" + out + "'");
    manifest.output(out);
    manifest.write(manifest_path.empty() ? out + ".manifest.json" : manifest_path, timestamp_now());
    std::cerr << "microagg: wrote " << ma_panel_series_count(panel.ptr) << " series x "
              << ma_panel_tick_count(panel.ptr) << " ticks to " << out << "\n";
    return kExitOk;
}

int run_ingest(const std::string& input, const std::string& out, const std::string& id_column,
               const std::string& time_column, const std::string& energy_column,
               const std::string& gap_mode, long long max_gap, long long sample, uint64_t seed,
               const std::string& manifest_path) {
    ManifestBuilder manifest("ingest", timestamp_now());
    manifest.config("input", input);
    manifest.config("id_column", id_column);
    manifest.config("time_column", time_column);
    manifest.config("energy_column", energy_column);
    manifest.config("gap_mode", gap_mode);
    manifest.config("max_gap", max_gap);
    manifest.config("sample", sample);
    manifest.seed(seed);
    manifest.input(input);

    long long skipped = 0, dropped = 0;
    PanelHandle panel;
    check(ma_panel_from_lcl_csv(input.c_str(), id_column.c_str(), time_column.c_str(),
                                energy_column.c_str(), gap_mode.c_str(), max_gap, &skipped,
                                &dropped, &panel.ptr),
          "ingesting '" + input + "'");
    std::cerr << "microagg: parsed panel (" << ma_panel_series_count(panel.ptr) << " series, "
              << skipped << " rows skipped, " << dropped << " series dropped by gap policy)\n";

    PanelHandle sampled;
    const ma_panel* final_panel = panel.ptr;
    if (sample > 0) {
        check(ma_panel_sample(panel.ptr, sample, seed, &sampled.ptr), "sampling households");
        final_panel = sampled.ptr;
    }
    check(ma_panel_write_csv(final_panel, out.c_str()), "writing '" + out + "'");
    manifest.output(out);
    manifest.write(manifest_path.empty() ? out + ".manifest.json" : manifest_path, timestamp_now());
    return kExitOk;
}

int run_anonymize(const std::string& input, long long k, const std::string& out_assignments,
                  const std::string& out_centroids, int workers, bool standardize,
                  const std::string& manifest_path) {
    if (k < 1) {
        std::cerr << "microagg: --k must be >= 1 (got " << k << ")\n";
        return kExitDomain;
    }
    ManifestBuilder manifest("anonymize", timestamp_now());
    manifest.config("input", input);
    manifest.config("k", k);
    manifest.config("standardize", static_cast<long long>(standardize ? 1 : 0));
    manifest.input(input);

    PanelHandle panel;
    check(ma_panel_read_csv(input.c_str(), &panel.ptr), "reading '" + input + "'");
    AnonymizedHandle anonymized;
    check(ma_mdav_anonymize(panel.ptr, k, workers, standardize ? 1 : 0, &anonymized.ptr),
          "anonymizing");
    if (ma_anonymized_degenerate(anonymized.ptr))
        std::cerr << "microagg: warning: k=" << k << " exceeds the series count ("
                  << ma_panel_series_count(panel.ptr) << "); emitted one degenerate group\n";
    check(ma_anonymized_write_assignment_csv(anonymized.ptr, out_assignments.c_str()),
          "writing '" + out_assignments + "'");
    check(ma_anonymized_write_centroids_csv(anonymized.ptr, out_centroids.c_str()),
          "writing '" + out_centroids + "'");
    manifest.output(out_assignments);
    manifest.output(out_centroids);
    manifest.write(manifest_path.empty() ? out_assignments + ".manifest.json" : manifest_path,
                   timestamp_now());
    std::cerr << "microagg: " << ma_anonymized_group_count(anonymized.ptr) << " groups at k=" << k
              << "\n";
    return kExitOk;
}

int run_metrics(const std::string& input, const std::string& ladder_text, int replicates,
                long long sample, uint64_t seed, int workers, const std::string& out,
                const std::string& out_csv, const std::string& manifest_path) {
    if (replicates < 1) {
        std::cerr << "microagg: --replicates must be >= 1 (got " << replicates << ")\n";
        return kExitDomain;
    }
    const std::vector<long long> ladder = parse_ladder(ladder_text);

    ManifestBuilder manifest("metrics", timestamp_now());
    manifest.config("input", input);
    manifest.config("k_ladder", ladder_text);
    manifest.config("replicates", static_cast<long long>(replicates));
    manifest.config("sample", sample);
    manifest.seed(seed);
    manifest.input(input);

    PanelHandle panel;
    check(ma_panel_read_csv(input.c_str(), &panel.ptr), "reading '" + input + "'");
    StringHandle json, csv;
    check(ma_metrics_sweep(panel.ptr, ladder.data(), ladder.size(), replicates, sample, seed,
                           workers, &json.ptr, &csv.ptr),
          "running metrics sweep");
    write_file(out, json.ptr);
    manifest.output(out);
    if (!out_csv.empty()) {
        write_file(out_csv, csv.ptr);
        manifest.output(out_csv);
    }
    manifest.write(manifest_path.empty() ? out + ".manifest.json" : manifest_path, timestamp_now());
    return kExitOk;
}

int run_backtest(const std::string& config_path, const std::string& out_json,
                 const std::string& out_csv, int workers, bool workers_set,
                 const std::string& manifest_path) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "microagg: cannot open config '" << config_path << "'\n";
        return kExitIo;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string config_text = buffer.str();

    // The --workers flag overrides the config; worker count never changes
    // output bytes, so it stays out of the manifest's config hash.
    std::string input_path;
    uint64_t seed = 0;
    try {
        nlohmann::json doc = nlohmann::json::parse(config_text);
        if (workers_set && doc.is_object()) {
            doc["workers"] = workers;
            config_text = doc.dump();
        }
        if (doc.is_object() && doc.contains("input") && doc.at("input").is_string())
            input_path = doc.at("input").get<std::string>();
        if (doc.is_object() && doc.contains("seed") && doc.at("seed").is_number_integer())
            seed = doc.at("seed").get<uint64_t>();
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "microagg: config is not valid JSON: " << e.what() << "\n";
        return kExitConfig;
    }

    ManifestBuilder manifest("backtest", timestamp_now());
    manifest.config("config", config_path);
    manifest.seed(seed);
    manifest.input(config_path);
    if (!input_path.empty()) manifest.input(input_path);

    StringHandle json, csv;
    check(ma_backtest_run(config_text.c_str(), &json.ptr, &csv.ptr), "running backtest");
    write_file(out_json, json.ptr);
    write_file(out_csv, csv.ptr);
    manifest.output(out_json);
    manifest.output(out_csv);
    manifest.write(manifest_path.empty() ? out_json + ".manifest.json" : manifest_path,
                   timestamp_now());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MDAV microaggregation, privacy metrics, and aggregated day-ahead forecasting "
                 "backtests for half-hourly load panels"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    int workers = 0;
    app.add_option("--workers", workers, "Worker thread cap (0 = auto)")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic load panel");
    long long synth_households = 100, synth_days = 30;
    uint64_t synth_seed = 1;
    std::string synth_out, synth_start = "2013-01-01T00:00:00Z", synth_manifest;
    double base_load = 0.25, daily_amplitude = 0.2, weekly_amplitude = 0.05, noise_sd = 0.08,
           spike_prob = 0.01;
    synth->add_option("--households", synth_households, "Number of households")->capture_default_str();
    synth->add_option("--days", synth_days, "Number of days (48 ticks each)")->capture_default_str();
    synth->add_option("--seed", synth_seed, "Root seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Output wide panel CSV")->required();
    synth->add_option("--start", synth_start, "First tick (ISO-8601 UTC)")->capture_default_str();
    synth->add_option("--base-load", base_load, "Base load, kWh per half hour")->capture_default_str();
    synth->add_option("--daily-amplitude", daily_amplitude, "Daily sinusoid amplitude")->capture_default_str();
    synth->add_option("--weekly-amplitude", weekly_amplitude, "Weekly sinusoid amplitude")->capture_default_str();
    synth->add_option("--noise-sd", noise_sd, "Gaussian noise standard deviation")->capture_default_str();
    synth->add_option("--spike-prob", spike_prob, "Per-tick positive spike probability")->capture_default_str();
    synth->add_option("--manifest", synth_manifest, "Manifest path (default <out>.manifest.json)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Convert long-format readings CSV to a wide panel");
    std::string ingest_input, ingest_out, ingest_manifest;
    std::string id_column = "LCLid", time_column = "DateTime",
                energy_column = "KWH/hh (per half hour)", gap_mode = "linear-interpolate";
    long long max_gap = 4, ingest_sample = 0;
    uint64_t ingest_seed = 1;
    ingest->add_option("--input", ingest_input, "Long-format readings CSV")->required();
    ingest->add_option("--out", ingest_out, "Output wide panel CSV")->required();
    ingest->add_option("--id-column", id_column, "Series id column name")->capture_default_str();
    ingest->add_option("--time-column", time_column, "Timestamp column name")->capture_default_str();
    ingest->add_option("--energy-column", energy_column, "Energy column name")->capture_default_str();
    ingest->add_option("--gap-mode", gap_mode, "drop-series | fill-zero | linear-interpolate")
        ->capture_default_str();
    ingest->add_option("--max-gap", max_gap, "Longest interpolatable gap (ticks)")->capture_default_str();
    ingest->add_option("--sample", ingest_sample, "Sample this many households (0 = all)")
        ->capture_default_str();
    ingest->add_option("--seed", ingest_seed, "Sampling seed")->capture_default_str();
    ingest->add_option("--manifest", ingest_manifest, "Manifest path (default <out>.manifest.json)");

    // anonymize
    auto* anonymize = app.add_subcommand("anonymize", "MDAV-partition a panel and emit centroids");
    std::string anon_input, out_assignments, out_centroids, anon_manifest;
    long long anon_k = 0;
    bool standardize = false;
    anonymize->add_option("--input", anon_input, "Wide panel CSV")->required();
    anonymize->add_option("--k", anon_k, "Anonymity level (>= 1)")->required();
    anonymize->add_option("--out-assignments", out_assignments, "Assignment CSV path")->required();
    anonymize->add_option("--out-centroids", out_centroids, "Centroid panel CSV path")->required();
    anonymize->add_flag("--standardize", standardize,
                        "Scale columns to unit variance for distances only");
    anonymize->add_option("--manifest", anon_manifest,
                          "Manifest path (default <out-assignments>.manifest.json)");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "Privacy/utility sweep over a k ladder");
    std::string metrics_input, ladder_text = "default", metrics_out, metrics_out_csv,
                metrics_manifest;
    int replicates = 10;
    long long metrics_sample = 0;
    uint64_t metrics_seed = 1;
    metrics->add_option("--input", metrics_input, "Wide panel CSV")->required();
    metrics->add_option("--k-ladder", ladder_text, "Comma-separated ks or 'default'")
        ->capture_default_str();
    metrics->add_option("--replicates", replicates, "Microaggregated datasets per level")
        ->capture_default_str();
    metrics->add_option("--sample", metrics_sample,
                        "Households drawn per replicate (0 = all; replicates then coincide)")
        ->capture_default_str();
    metrics->add_option("--seed", metrics_seed, "Root seed")->capture_default_str();
    metrics->add_option("--out", metrics_out, "Report JSON path")->required();
    metrics->add_option("--out-csv", metrics_out_csv, "Plot-ready CSV path");
    metrics->add_option("--manifest", metrics_manifest, "Manifest path (default <out>.manifest.json)");

    // backtest
    auto* backtest = app.add_subcommand("backtest", "Run the forecasting experiment grid");
    std::string config_path, bt_out_json = "experiment_report.json",
                bt_out_csv = "experiment_report.csv", bt_manifest;
    backtest->add_option("--config", config_path, "Experiment config JSON")->required();
    backtest->add_option("--out-json", bt_out_json, "Report JSON path")->capture_default_str();
    backtest->add_option("--out-csv", bt_out_csv, "Report CSV path")->capture_default_str();
    backtest->add_option("--manifest", bt_manifest,
                         "Manifest path (default <out-json>.manifest.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "microagg: " << e.what() << "\n";
        return kExitUsage;
    }

    if (synth->parsed())
        return run_synth(synth_households, synth_days, synth_seed, synth_out, synth_start,
                         base_load, daily_amplitude, weekly_amplitude, noise_sd, spike_prob,
                         synth_manifest);
    if (ingest->parsed())
        return run_ingest(ingest_input, ingest_out, id_column, time_column, energy_column,
                          gap_mode, max_gap, ingest_sample, ingest_seed, ingest_manifest);
    if (anonymize->parsed())
        return run_anonymize(anon_input, anon_k, out_assignments, out_centroids, workers,
                             standardize, anon_manifest);
    if (metrics->parsed())
        return run_metrics(metrics_input, ladder_text, replicates, metrics_sample, metrics_seed,
                           workers, metrics_out, metrics_out_csv, metrics_manifest);
    if (backtest->parsed())
        return run_backtest(config_path, bt_out_json, bt_out_csv, workers,
                            app.count("--workers") > 0, bt_manifest);
    return kExitUsage;
}
