#include "forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "errors.hpp"
#include "timeutil.hpp"

namespace microagg {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

int day_of_week_at(const TimeIndex& calendar, std::size_t tick) {
    const std::int64_t ts = calendar.start + static_cast<std::int64_t>(tick) * calendar.step;
    std::int64_t days = ts / 86400;
    if (ts % 86400 < 0) --days;
    return timeutil::weekday_from_days(days);
}

// Cholesky solve of (A)x = rhs for a symmetric positive-definite A (n x n,
// row-major). Returns false when a pivot collapses (singular system).
bool cholesky_solve(std::vector<double> a, std::vector<double> rhs, std::size_t n, std::vector<double>& out) {
    double diag_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag_max = std::max(diag_max, std::abs(a[i * n + i]));
    const double tiny = diag_max > 0.0 ? diag_max * 1e-12 : 1e-300;

    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > tiny)) return false;
        const double l = std::sqrt(d);
        a[j * n + j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = v / l;
        }
    }
    // Forward then backward substitution.
    for (std::size_t i = 0; i < n; ++i) {
        double v = rhs[i];
        for (std::size_t k = 0; k < i; ++k) v -= a[i * n + k] * rhs[k];
        rhs[i] = v / a[i * n + i];
    }
    out.assign(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double v = rhs[ii];
        for (std::size_t k = ii + 1; k < n; ++k) v -= a[k * n + ii] * out[k];
        out[ii] = v / a[ii * n + ii];
    }
    return true;
}

}  // namespace

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::SeasonalNaive: return "seasonal-naive";
        case ModelKind::Decomposition: return "decomposition";
        case ModelKind::LagLinear: return "lag-linear";
        case ModelKind::Mlp: return "mlp";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "seasonal-naive") return ModelKind::SeasonalNaive;
    if (name == "decomposition") return ModelKind::Decomposition;
    if (name == "lag-linear") return ModelKind::LagLinear;
    if (name == "mlp") return ModelKind::Mlp;
    fail(ErrorCode::InvalidArgument, "unknown model kind '" + name + "'");
}

FeatureMatrix make_features(std::span<const double> series, const TimeIndex& calendar) {
    FeatureMatrix fm;
    const std::size_t t_len = series.size();
    const std::size_t lag_long = static_cast<std::size_t>(fm.lag_long);
    const std::size_t lag_short = static_cast<std::size_t>(fm.lag_short);
    if (t_len <= lag_long)
        fail(ErrorCode::TooShort,
             "series length " + std::to_string(t_len) + " must exceed the largest lag (" + std::to_string(lag_long) + ")");

    fm.column_names = {"lag_1",  "lag_48", "lag_336", "expanding_mean", "rolling_mean_24",
                       "dow_0",  "dow_1",  "dow_2",   "dow_3",          "dow_4",
                       "dow_5",  "dow_6"};

    double prefix = 0.0;
    for (std::size_t i = 0; i < lag_long; ++i) prefix += series[i];

    const std::size_t rows = t_len - lag_long;
    fm.values.reserve(rows * FeatureMatrix::kColumns);
    fm.target.reserve(rows);
    fm.row_time.reserve(rows);

    for (std::size_t t = lag_long; t < t_len; ++t) {
        fm.row_time.push_back(t);
        fm.values.push_back(series[t - 1]);
        fm.values.push_back(series[t - lag_short]);
        fm.values.push_back(series[t - lag_long]);
        fm.values.push_back(prefix / static_cast<double>(t));
        double roll = 0.0;
        for (std::size_t j = t - 24; j < t; ++j) roll += series[j];
        fm.values.push_back(roll / 24.0);
        const int dow = day_of_week_at(calendar, t);
        for (int d = 0; d < 7; ++d) fm.values.push_back(d == dow ? 1.0 : 0.0);

        if (t >= lag_long + lag_short) {
            const double d1_now = series[t] - series[t - lag_short];
            const double d1_then = series[t - lag_long] - series[t - lag_long - lag_short];
            fm.target.push_back(d1_now - d1_then);
        } else {
            fm.target.push_back(kNan);
        }
        prefix += series[t];
    }
    return fm;
}

std::vector<double> seasonal_naive_forecast(std::span<const double> series, int period, int horizon) {
    if (period < 2) fail(ErrorCode::InvalidArgument, "period must be >= 2");
    if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be >= 1");
    if (series.size() < static_cast<std::size_t>(period))
        fail(ErrorCode::TooShort, "series shorter than one season");
    std::vector<double> out(static_cast<std::size_t>(horizon));
    const std::size_t t_len = series.size();
    for (int h = 1; h <= horizon; ++h) {
        const int wraps = (h + period - 1) / period;  // ceil(h/period)
        const std::size_t src = t_len + static_cast<std::size_t>(h - 1) - static_cast<std::size_t>(wraps * period);
        out[static_cast<std::size_t>(h - 1)] = series[src];
    }
    return out;
}

namespace {

struct Decomposition {
    std::vector<double> trend;   // values over [first, last] positions
    std::size_t first = 0;      // first position with defined trend
    std::vector<double> seasonal;
};

Decomposition classical_decompose(std::span<const double> series, int period) {
    const std::size_t t_len = series.size();
    const std::size_t p = static_cast<std::size_t>(period);
    Decomposition dec;
    if (p % 2 == 0) {
        // 2 x p moving average: half weights on the window endpoints.
        const std::size_t half = p / 2;
        dec.first = half;
        for (std::size_t i = half; i + half < t_len; ++i) {
            double acc = 0.5 * series[i - half] + 0.5 * series[i + half];
            for (std::size_t j = i - half + 1; j < i + half; ++j) acc += series[j];
            dec.trend.push_back(acc / static_cast<double>(p));
        }
    } else {
        const std::size_t half = (p - 1) / 2;
        dec.first = half;
        for (std::size_t i = half; i + half < t_len; ++i) {
            double acc = 0.0;
            for (std::size_t j = i - half; j <= i + half; ++j) acc += series[j];
            dec.trend.push_back(acc / static_cast<double>(p));
        }
    }

    std::vector<double> phase_sum(p, 0.0);
    std::vector<std::size_t> phase_count(p, 0);
    for (std::size_t idx = 0; idx < dec.trend.size(); ++idx) {
        const std::size_t i = dec.first + idx;
        const std::size_t phase = i % p;
        phase_sum[phase] += series[i] - dec.trend[idx];
        ++phase_count[phase];
    }
    dec.seasonal.resize(p, 0.0);
    for (std::size_t phase = 0; phase < p; ++phase)
        if (phase_count[phase] > 0) dec.seasonal[phase] = phase_sum[phase] / static_cast<double>(phase_count[phase]);
    double grand = std::accumulate(dec.seasonal.begin(), dec.seasonal.end(), 0.0) / static_cast<double>(p);
    for (double& s : dec.seasonal) s -= grand;
    return dec;
}

double trend_drift_slope(const std::vector<double>& trend, int period) {
    const std::size_t q = std::min<std::size_t>(trend.size(), static_cast<std::size_t>(period));
    if (q < 2) return 0.0;
    const std::size_t off = trend.size() - q;
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        sx += static_cast<double>(i);
        sy += trend[off + i];
    }
    const double mx = sx / static_cast<double>(q), my = sy / static_cast<double>(q);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        const double dx = static_cast<double>(i) - mx;
        num += dx * (trend[off + i] - my);
        den += dx * dx;
    }
    return den > 0.0 ? num / den : 0.0;
}

DecompositionState fit_decomposition(std::span<const double> series, int period) {
    if (period < 2) fail(ErrorCode::InvalidArgument, "period must be >= 2");
    if (series.size() < 2 * static_cast<std::size_t>(period))
        fail(ErrorCode::TooShort, "decomposition needs at least two seasons");
    Decomposition dec = classical_decompose(series, period);
    DecompositionState state;
    state.period = period;
    state.fit_length = series.size();
    state.trend_last = dec.trend.back();
    state.trend_last_pos = dec.first + dec.trend.size() - 1;
    state.slope = trend_drift_slope(dec.trend, period);
    state.seasonal = std::move(dec.seasonal);
    return state;
}

std::vector<double> predict_decomposition(const DecompositionState& st, int horizon) {
    std::vector<double> out(static_cast<std::size_t>(horizon));
    const std::size_t p = st.seasonal.size();
    for (int h = 1; h <= horizon; ++h) {
        const std::size_t pos = st.fit_length + static_cast<std::size_t>(h - 1);
        const double steps = static_cast<double>(pos - st.trend_last_pos);
        out[static_cast<std::size_t>(h - 1)] = st.trend_last + st.slope * steps + st.seasonal[pos % p];
    }
    return out;
}

}  // namespace

std::vector<double> decomposition_forecast(std::span<const double> series, int period, int horizon) {
    if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be >= 1");
    return predict_decomposition(fit_decomposition(series, period), horizon);
}

RobustScale robust_scale_of(std::span<const double> series) {
    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
    };
    RobustScale rs;
    rs.center = quantile(0.5);
    const double iqr = quantile(0.75) - quantile(0.25);
    if (iqr > 0.0) {
        rs.scale = iqr;
    } else {
        rs.scale = 1.0;
        rs.degenerate = true;
    }
    return rs;
}

FittedModel fit_lag_linear(const FeatureMatrix& fm, double l2, const ModelSpec& spec) {
    if (l2 < 0.0) fail(ErrorCode::InvalidArgument, "l2 must be non-negative");
    std::vector<std::size_t> usable;
    for (std::size_t r = 0; r < fm.rows(); ++r)
        if (std::isfinite(fm.target[r])) usable.push_back(r);
    if (usable.empty()) fail(ErrorCode::TooShort, "no usable training rows (all targets undefined)");

    const std::size_t n = usable.size();
    const std::size_t cols = FeatureMatrix::kColumns;

    LagLinearState state;
    state.lag_short = fm.lag_short;
    state.lag_long = fm.lag_long;
    state.feat_mean.assign(cols, 0.0);
    state.feat_std.assign(cols, 1.0);

    for (const std::size_t r : usable) {
        const auto row = fm.row(r);
        for (std::size_t c = 0; c < cols; ++c) state.feat_mean[c] += row[c];
    }
    for (double& m : state.feat_mean) m /= static_cast<double>(n);
    std::vector<double> ss(cols, 0.0);
    for (const std::size_t r : usable) {
        const auto row = fm.row(r);
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = row[c] - state.feat_mean[c];
            ss[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        const double sd = n > 1 ? std::sqrt(ss[c] / static_cast<double>(n - 1)) : 0.0;
        state.feat_std[c] = sd > 0.0 ? sd : 1.0;
    }

    double ty_mean = 0.0;
    for (const std::size_t r : usable) ty_mean += fm.target[r];
    ty_mean /= static_cast<double>(n);
    state.target_mean = ty_mean;

    // Normal equations on standardized features, centered target.
    std::vector<double> xtx(cols * cols, 0.0);
    std::vector<double> xty(cols, 0.0);
    std::vector<double> z(cols);
    for (const std::size_t r : usable) {
        const auto row = fm.row(r);
        for (std::size_t c = 0; c < cols; ++c) z[c] = (row[c] - state.feat_mean[c]) / state.feat_std[c];
        const double ty = fm.target[r] - ty_mean;
        for (std::size_t i = 0; i < cols; ++i) {
            for (std::size_t j = i; j < cols; ++j) xtx[i * cols + j] += z[i] * z[j];
            xty[i] += z[i] * ty;
        }
    }
    for (std::size_t i = 0; i < cols; ++i) {
        xtx[i * cols + i] += l2;
        for (std::size_t j = 0; j < i; ++j) xtx[i * cols + j] = xtx[j * cols + i];
    }

    if (!cholesky_solve(std::move(xtx), std::move(xty), cols, state.weights))
        fail(ErrorCode::Singular, "normal matrix is singular; use l2 > 0");

    FittedModel model;
    model.spec = spec;
    model.spec.kind = ModelKind::LagLinear;
    model.state = std::move(state);
    return model;
}

namespace mlpnet {

void Network::init(int in, int hidden, int out, rng::Prng& prng) {
    n_in = in;
    n_hidden = hidden;
    n_out = out;
    w1.resize(static_cast<std::size_t>(hidden) * in);
    b1.assign(static_cast<std::size_t>(hidden), 0.0);
    w2.resize(static_cast<std::size_t>(out) * hidden);
    b2.assign(static_cast<std::size_t>(out), 0.0);
    const double bound1 = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : w1) w = prng.uniform(-bound1, bound1);
    const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (double& w : w2) w = prng.uniform(-bound2, bound2);
}

void Network::zero_like(const Network& shape) {
    n_in = shape.n_in;
    n_hidden = shape.n_hidden;
    n_out = shape.n_out;
    w1.assign(shape.w1.size(), 0.0);
    b1.assign(shape.b1.size(), 0.0);
    w2.assign(shape.w2.size(), 0.0);
    b2.assign(shape.b2.size(), 0.0);
}

void Network::forward(const double* x, std::vector<double>& hidden, std::vector<double>& out) const {
    hidden.resize(static_cast<std::size_t>(n_hidden));
    out.resize(static_cast<std::size_t>(n_out));
    for (int h = 0; h < n_hidden; ++h) {
        double acc = b1[static_cast<std::size_t>(h)];
        const double* row = w1.data() + static_cast<std::size_t>(h) * n_in;
        for (int i = 0; i < n_in; ++i) acc += row[i] * x[i];
        hidden[static_cast<std::size_t>(h)] = std::tanh(acc);
    }
    for (int o = 0; o < n_out; ++o) {
        double acc = b2[static_cast<std::size_t>(o)];
        const double* row = w2.data() + static_cast<std::size_t>(o) * n_hidden;
        for (int h = 0; h < n_hidden; ++h) acc += row[h] * hidden[static_cast<std::size_t>(h)];
        out[static_cast<std::size_t>(o)] = acc;
    }
}

double Network::loss(const double* x, const double* y) const {
    std::vector<double> hidden, out;
    forward(x, hidden, out);
    double acc = 0.0;
    for (int o = 0; o < n_out; ++o) {
        const double e = out[static_cast<std::size_t>(o)] - y[o];
        acc += e * e;
    }
    return acc / static_cast<double>(n_out);
}

double Network::loss_and_gradient(const double* x, const double* y, Network& grads) const {
    std::vector<double> hidden, out;
    forward(x, hidden, out);
    double acc = 0.0;
    std::vector<double> dout(static_cast<std::size_t>(n_out));
    for (int o = 0; o < n_out; ++o) {
        const double e = out[static_cast<std::size_t>(o)] - y[o];
        acc += e * e;
        dout[static_cast<std::size_t>(o)] = 2.0 * e / static_cast<double>(n_out);
    }
    std::vector<double> dhidden(static_cast<std::size_t>(n_hidden), 0.0);
    for (int o = 0; o < n_out; ++o) {
        const double g = dout[static_cast<std::size_t>(o)];
        double* grow = grads.w2.data() + static_cast<std::size_t>(o) * n_hidden;
        const double* row = w2.data() + static_cast<std::size_t>(o) * n_hidden;
        for (int h = 0; h < n_hidden; ++h) {
            grow[h] += g * hidden[static_cast<std::size_t>(h)];
            dhidden[static_cast<std::size_t>(h)] += g * row[h];
        }
        grads.b2[static_cast<std::size_t>(o)] += g;
    }
    for (int h = 0; h < n_hidden; ++h) {
        const double hv = hidden[static_cast<std::size_t>(h)];
        const double da = dhidden[static_cast<std::size_t>(h)] * (1.0 - hv * hv);
        double* grow = grads.w1.data() + static_cast<std::size_t>(h) * n_in;
        for (int i = 0; i < n_in; ++i) grow[i] += da * x[i];
        grads.b1[static_cast<std::size_t>(h)] += da;
    }
    return acc / static_cast<double>(n_out);
}

void Network::step(const Network& grads, double lr, double scale) {
    const double f = lr * scale;
    for (std::size_t i = 0; i < w1.size(); ++i) w1[i] -= f * grads.w1[i];
    for (std::size_t i = 0; i < b1.size(); ++i) b1[i] -= f * grads.b1[i];
    for (std::size_t i = 0; i < w2.size(); ++i) w2[i] -= f * grads.w2[i];
    for (std::size_t i = 0; i < b2.size(); ++i) b2[i] -= f * grads.b2[i];
}

}  // namespace mlpnet

FittedModel fit_mlp(std::span<const double> series, const ModelSpec& spec, std::uint64_t seed) {
    const std::size_t in = static_cast<std::size_t>(spec.mlp_input);
    const std::size_t out = static_cast<std::size_t>(spec.horizon);
    if (spec.mlp_input < 1 || spec.horizon < 1 || spec.mlp_hidden < 1 || spec.mlp_epochs < 0 ||
        spec.mlp_batch < 1 || spec.mlp_learning_rate <= 0.0)
        fail(ErrorCode::InvalidArgument, "invalid mlp hyperparameters");
    if (series.size() < in + out)
        fail(ErrorCode::TooShort, "series shorter than input window + horizon");

    MlpState state;
    state.scale = robust_scale_of(series);
    std::vector<double> scaled(series.size());
    for (std::size_t i = 0; i < series.size(); ++i)
        scaled[i] = (series[i] - state.scale.center) / state.scale.scale;

    rng::Prng prng(seed);
    state.net.init(spec.mlp_input, spec.mlp_hidden, spec.horizon, prng);

    const std::size_t samples = series.size() - in - out + 1;
    std::vector<std::size_t> order(samples);
    std::iota(order.begin(), order.end(), 0);

    mlpnet::Network grads;
    const std::size_t batch = static_cast<std::size_t>(spec.mlp_batch);
    for (int epoch = 0; epoch < spec.mlp_epochs; ++epoch) {
        // Fisher-Yates with the model's own stream keeps runs reproducible.
        for (std::size_t i = 0; i + 1 < samples; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(prng.uniform_below(samples - i));
            std::swap(order[i], order[j]);
        }
        for (std::size_t pos = 0; pos < samples; pos += batch) {
            const std::size_t stop = std::min(samples, pos + batch);
            grads.zero_like(state.net);
            for (std::size_t s = pos; s < stop; ++s) {
                const double* x = scaled.data() + order[s];
                const double* y = scaled.data() + order[s] + in;
                state.net.loss_and_gradient(x, y, grads);
            }
            state.net.step(grads, spec.mlp_learning_rate, 1.0 / static_cast<double>(stop - pos));
        }
        double epoch_total = 0.0;
        for (std::size_t s = 0; s < samples; ++s)
            epoch_total += state.net.loss(scaled.data() + s, scaled.data() + s + in);
        state.epoch_loss.push_back(epoch_total / static_cast<double>(samples));
    }

    FittedModel model;
    model.spec = spec;
    model.spec.kind = ModelKind::Mlp;
    model.state = std::move(state);
    return model;
}

FittedModel fit_model(const ModelSpec& spec, std::span<const double> series, const TimeIndex& calendar,
                      std::uint64_t seed) {
    FittedModel model;
    model.spec = spec;
    switch (spec.kind) {
        case ModelKind::SeasonalNaive: {
            if (series.size() < static_cast<std::size_t>(spec.period))
                fail(ErrorCode::TooShort, "series shorter than one season");
            SeasonalNaiveState st;
            st.last_season.assign(series.end() - spec.period, series.end());
            model.state = std::move(st);
            return model;
        }
        case ModelKind::Decomposition:
            model.state = fit_decomposition(series, spec.period);
            return model;
        case ModelKind::LagLinear:
            return fit_lag_linear(make_features(series, calendar), spec.ridge_l2, spec);
        case ModelKind::Mlp:
            return fit_mlp(series, spec, seed);
    }
    fail(ErrorCode::InvalidArgument, "unknown model kind");
}

namespace {

std::vector<double> predict_lag_linear(const LagLinearState& st, std::span<const double> history,
                                       const TimeIndex& calendar, int horizon) {
    const std::size_t lag_long = static_cast<std::size_t>(st.lag_long);
    const std::size_t lag_short = static_cast<std::size_t>(st.lag_short);
    if (history.size() < lag_long + lag_short)
        fail(ErrorCode::TooShort, "history shorter than the differencing lags");

    std::vector<double> hist(history.begin(), history.end());
    double prefix = std::accumulate(hist.begin(), hist.end(), 0.0);
    std::vector<double> feats(FeatureMatrix::kColumns);

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (int h = 0; h < horizon; ++h) {
        const std::size_t t = hist.size();
        feats[0] = hist[t - 1];
        feats[1] = hist[t - lag_short];
        feats[2] = hist[t - lag_long];
        feats[3] = prefix / static_cast<double>(t);
        double roll = 0.0;
        for (std::size_t j = t - 24; j < t; ++j) roll += hist[j];
        feats[4] = roll / 24.0;
        const int dow = day_of_week_at(calendar, t);
        for (int d = 0; d < 7; ++d) feats[5 + static_cast<std::size_t>(d)] = d == dow ? 1.0 : 0.0;

        double d2 = st.target_mean;
        for (std::size_t c = 0; c < feats.size(); ++c)
            d2 += st.weights[c] * (feats[c] - st.feat_mean[c]) / st.feat_std[c];
        // Invert the lag-336 difference, then the lag-48 difference.
        const double d1 = d2 + (hist[t - lag_long] - hist[t - lag_long - lag_short]);
        const double y = d1 + hist[t - lag_short];

        out.push_back(y);
        hist.push_back(y);
        prefix += y;
    }
    return out;
}

std::vector<double> predict_mlp(const MlpState& st, std::span<const double> history, int horizon) {
    const std::size_t in = static_cast<std::size_t>(st.net.n_in);
    if (history.size() < in) fail(ErrorCode::TooShort, "history shorter than the network input window");
    if (horizon != st.net.n_out)
        fail(ErrorCode::InvalidArgument, "mlp forecasts exactly its configured horizon");
    std::vector<double> x(in);
    for (std::size_t i = 0; i < in; ++i)
        x[i] = (history[history.size() - in + i] - st.scale.center) / st.scale.scale;
    std::vector<double> hidden, out;
    st.net.forward(x.data(), hidden, out);
    for (double& v : out) v = v * st.scale.scale + st.scale.center;
    return out;
}

}  // namespace

std::vector<double> predict_recursive(const FittedModel& model, std::span<const double> history,
                                      const TimeIndex& calendar, int horizon) {
    if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be >= 1");
    if (const auto* naive = std::get_if<SeasonalNaiveState>(&model.state)) {
        if (history.size() < naive->last_season.size())
            fail(ErrorCode::TooShort, "history shorter than one season");
        std::vector<double> out(static_cast<std::size_t>(horizon));
        const std::size_t p = naive->last_season.size();
        for (int h = 0; h < horizon; ++h) out[static_cast<std::size_t>(h)] = naive->last_season[static_cast<std::size_t>(h) % p];
        return out;
    }
    if (const auto* dec = std::get_if<DecompositionState>(&model.state))
        return predict_decomposition(*dec, horizon);
    if (const auto* lin = std::get_if<LagLinearState>(&model.state))
        return predict_lag_linear(*lin, history, calendar, horizon);
    const auto& mlp = std::get<MlpState>(model.state);
    return predict_mlp(mlp, history, horizon);
}

}  // namespace microagg
