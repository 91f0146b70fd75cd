#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "panel.hpp"
#include "rng.hpp"

namespace microagg {

enum class ModelKind { SeasonalNaive, Decomposition, LagLinear, Mlp };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct ModelSpec {
    ModelKind kind = ModelKind::SeasonalNaive;
    std::string name;        // report label; defaults to the kind name
    int period = 48;
    int horizon = 48;
    double ridge_l2 = 1e-3;  // lag-linear
    int mlp_hidden = 64;
    int mlp_epochs = 50;
    double mlp_learning_rate = 1e-3;
    int mlp_input = 500;
    int mlp_batch = 32;

    std::string label() const { return name.empty() ? model_kind_name(kind) : name; }
};

/// Lagged training design. One row per timestamp t >= 336 (the largest lag);
/// the target is the doubly differenced next value, NaN where its own lags
/// are not yet available (such rows are skipped at fit time).
struct FeatureMatrix {
    static constexpr int kColumns = 12;  // lag1, lag48, lag336, expanding, rolling24, dow 0..6
    std::vector<std::string> column_names;
    std::vector<double> values;     // rows x kColumns, row-major
    std::vector<double> target;
    std::vector<std::size_t> row_time;
    int lag_short = 48;             // differencing lags, inversion metadata
    int lag_long = 336;

    std::size_t rows() const { return row_time.size(); }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * kColumns, kColumns}; }
};

FeatureMatrix make_features(std::span<const double> series, const TimeIndex& calendar);

/// Repeats the last observed season: y(t+h) = y(t + h - period*ceil(h/period)).
std::vector<double> seasonal_naive_forecast(std::span<const double> series, int period, int horizon);

/// Classical additive decomposition (centered moving-average trend, per-phase
/// seasonal normalized to sum zero) extended by linear drift of the trend.
std::vector<double> decomposition_forecast(std::span<const double> series, int period, int horizon);

namespace mlpnet {

/// Single-hidden-layer tanh network trained with mini-batch SGD on squared
/// error. Exposed so gradients can be checked against finite differences.
struct Network {
    int n_in = 0, n_hidden = 0, n_out = 0;
    std::vector<double> w1, b1, w2, b2;  // w1: hidden x in, w2: out x hidden

    void init(int in, int hidden, int out, rng::Prng& prng);
    void zero_like(const Network& shape);
    void forward(const double* x, std::vector<double>& hidden, std::vector<double>& out) const;
    double loss(const double* x, const double* y) const;
    /// Adds dLoss/dParam into `grads` (same shapes); returns the sample loss.
    double loss_and_gradient(const double* x, const double* y, Network& grads) const;
    void step(const Network& grads, double lr, double scale);
};

}  // namespace mlpnet

struct SeasonalNaiveState {
    std::vector<double> last_season;
};

struct DecompositionState {
    int period = 48;
    double trend_last = 0.0;
    double slope = 0.0;
    std::size_t trend_last_pos = 0;
    std::size_t fit_length = 0;
    std::vector<double> seasonal;
};

struct LagLinearState {
    std::vector<double> weights;
    std::vector<double> feat_mean;
    std::vector<double> feat_std;
    double target_mean = 0.0;
    int lag_short = 48;
    int lag_long = 336;
};

struct RobustScale {
    double center = 0.0;
    double scale = 1.0;
    bool degenerate = false;  // IQR was zero, fell back to scale 1
};

struct MlpState {
    mlpnet::Network net;
    RobustScale scale;
    std::vector<double> epoch_loss;  // full-dataset loss after each epoch
};

struct FittedModel {
    ModelSpec spec;
    std::variant<SeasonalNaiveState, DecompositionState, LagLinearState, MlpState> state;
};

/// Median/IQR scale of a series (quartiles by linear interpolation).
RobustScale robust_scale_of(std::span<const double> series);

/// Ridge regression on standardized feature columns with an unpenalized
/// intercept (the target mean). l2 = 0 with a singular normal matrix throws
/// Singular.
FittedModel fit_lag_linear(const FeatureMatrix& features, double l2, const ModelSpec& spec = {ModelKind::LagLinear});

/// Direct multi-output network over the last `mlp_input` robust-scaled
/// values. Deterministic per seed.
FittedModel fit_mlp(std::span<const double> series, const ModelSpec& spec, std::uint64_t seed);

FittedModel fit_model(const ModelSpec& spec, std::span<const double> series, const TimeIndex& calendar,
                      std::uint64_t seed);

/// One-step-at-a-time forecast feeding predictions back into the lag
/// features and inverting the differencing transforms (recursive kinds);
/// direct forward pass for the network. `calendar` is the history's axis and
/// supplies timestamps past its end.
std::vector<double> predict_recursive(const FittedModel& model, std::span<const double> history,
                                      const TimeIndex& calendar, int horizon);

}  // namespace microagg
