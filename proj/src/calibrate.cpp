#include "stockflow/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stockflow/numfmt.hpp"

namespace stockflow {

double RegressionFit::predict(double x) const {
    double v = 0.0;
    for (std::size_t k = coefficients.size(); k-- > 0;) {
        v = v * x + coefficients[k];
    }
    return v;
}

// ---------------------------------------------------------------------------
// Price change rate
// ---------------------------------------------------------------------------

TimeSeries pcr_series(const TimeSeries& price, double dt_data) {
    if (price.size() < 2) {
        throw std::invalid_argument("pcr_series: need at least 2 price samples");
    }
    if (!(dt_data > 0.0)) {
        throw std::invalid_argument("pcr_series: dt_data must be > 0");
    }
    if (std::abs(price.dt - dt_data) > 1e-12 * std::max(1.0, std::abs(dt_data))) {
        throw std::invalid_argument(
            "pcr_series: dt_data does not match the series spacing (resolution mix)");
    }
    TimeSeries out;
    out.name = price.name.empty() ? "pcr" : "pcr_" + price.name;
    out.units = (price.units.empty() ? "1" : price.units) + "/" + price.time_unit;
    out.time_unit = price.time_unit;
    out.t0 = price.t0;
    out.dt = price.dt;
    out.values.reserve(price.size() - 1);
    for (std::size_t k = 0; k + 1 < price.size(); ++k) {
        out.values.push_back((price.values[k + 1] - price.values[k]) / dt_data);
    }
    return out;
}

TimeSeries pcr_series(std::span<const double> times,
                      std::span<const double> prices, double dt_data) {
    if (times.size() != prices.size()) {
        throw std::invalid_argument("pcr_series: times/prices length mismatch");
    }
    if (times.size() < 2) {
        throw std::invalid_argument("pcr_series: need at least 2 price samples");
    }
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double gap = times[k + 1] - times[k];
        if (std::abs(gap - dt_data) > 1e-9 * std::max(1.0, std::abs(dt_data))) {
            throw std::invalid_argument("pcr_series: non-uniform spacing at sample " +
                                        std::to_string(k + 1));
        }
    }
    TimeSeries series;
    series.t0 = times[0];
    series.dt = dt_data;
    series.values.assign(prices.begin(), prices.end());
    return pcr_series(series, dt_data);
}

// ---------------------------------------------------------------------------
// Ordinary least squares
// ---------------------------------------------------------------------------

namespace {

// Multiplies a polynomial (coefficients low-to-high) by (a + b*x).
std::vector<double> poly_mul_linear(const std::vector<double>& p, double a, double b) {
    std::vector<double> out(p.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] += p[i] * a;
        out[i + 1] += p[i] * b;
    }
    return out;
}

} // namespace

RegressionFit ols_fit(std::span<const double> x, std::span<const double> y,
                      int degree) {
    const std::size_t n = x.size();
    if (n != y.size()) {
        throw std::invalid_argument("ols_fit: x and y lengths differ");
    }
    if (degree < 1) {
        throw std::invalid_argument("ols_fit: degree must be >= 1");
    }
    const std::size_t p = static_cast<std::size_t>(degree) + 1;
    if (n < p + 1) {
        throw std::invalid_argument("ols_fit: need at least " + std::to_string(p + 1) +
                                    " samples for a degree-" + std::to_string(degree) +
                                    " fit, got " + std::to_string(n));
    }

    const double x_mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double x_var = 0.0;
    for (double xi : x) x_var += (xi - x_mean) * (xi - x_mean);
    x_var /= static_cast<double>(n);
    if (x_var == 0.0) {
        throw std::invalid_argument("ols_fit: degenerate regressor (zero variance)");
    }
    const double x_scale = std::sqrt(x_var);

    // Normal equations on the centered/scaled regressor for conditioning.
    std::vector<long double> moments(2 * p - 1, 0.0L); // sum of z^k
    std::vector<long double> rhs(p, 0.0L);             // sum of y * z^k
    for (std::size_t i = 0; i < n; ++i) {
        const long double z = (x[i] - x_mean) / x_scale;
        long double zk = 1.0L;
        for (std::size_t k = 0; k < 2 * p - 1; ++k) {
            moments[k] += zk;
            if (k < p) rhs[k] += y[i] * zk;
            zk *= z;
        }
    }
    std::vector<std::vector<long double>> mat(p, std::vector<long double>(p + 1, 0.0L));
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t c = 0; c < p; ++c) mat[r][c] = moments[r + c];
        mat[r][p] = rhs[r];
    }

    // Gaussian elimination with partial pivoting.
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::abs(static_cast<double>(mat[r][col])) >
                std::abs(static_cast<double>(mat[pivot][col]))) {
                pivot = r;
            }
        }
        std::swap(mat[col], mat[pivot]);
        const long double diag = mat[col][col];
        if (std::abs(static_cast<double>(diag)) < 1e-12 * static_cast<double>(n)) {
            throw std::invalid_argument("ols_fit: rank-deficient system (regressor powers "
                                        "are numerically dependent)");
        }
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) continue;
            const long double f = mat[r][col] / diag;
            for (std::size_t c = col; c <= p; ++c) mat[r][c] -= f * mat[col][c];
        }
    }
    std::vector<double> z_coeffs(p);
    for (std::size_t r = 0; r < p; ++r) {
        z_coeffs[r] = static_cast<double>(mat[r][p] / mat[r][r]);
    }

    // Back-substitute z = (x - mean)/scale into raw-x coefficients (Horner
    // over polynomial coefficients).
    std::vector<double> raw{z_coeffs[p - 1]};
    for (std::size_t k = p - 1; k-- > 0;) {
        raw = poly_mul_linear(raw, -x_mean / x_scale, 1.0 / x_scale);
        raw[0] += z_coeffs[k];
    }

    RegressionFit fit;
    fit.coefficients = std::move(raw);
    fit.samples = static_cast<int>(n);

    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sse = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.predict(x[i]);
        sse += r * r;
        sst += (y[i] - y_mean) * (y[i] - y_mean);
    }
    fit.residual_std = std::sqrt(sse / static_cast<double>(n - p));
    fit.r_squared = sst > 0.0 ? 1.0 - sse / sst : 1.0;
    return fit;
}

RegressionFit ols_fit(const TimeSeries& x, const TimeSeries& y, int degree) {
    if (x.size() != y.size() || x.t0 != y.t0 || x.dt != y.dt) {
        throw std::invalid_argument("ols_fit: series are not aligned");
    }
    if (x.time_unit != y.time_unit) {
        throw std::invalid_argument("ols_fit: series mix time units ('" + x.time_unit +
                                    "' vs '" + y.time_unit + "')");
    }
    return ols_fit(std::span<const double>(x.values), std::span<const double>(y.values),
                   degree);
}

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

StatsRow descriptive_stats(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) {
        throw std::invalid_argument("descriptive_stats: empty series");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("descriptive_stats: non-finite value");
        }
    }

    StatsRow row;
    row.min = *std::min_element(values.begin(), values.end());
    row.max = *std::max_element(values.begin(), values.end());
    row.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    row.median = n % 2 == 1 ? sorted[n / 2]
                            : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    if (n < 2) return row;
    const double nd = static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - row.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    row.std_dev = std::sqrt(m2 / (nd - 1.0));
    m2 /= nd;
    m3 /= nd;
    m4 /= nd;

    if (m2 > 0.0) {
        if (n >= 3) {
            row.skewness = nd * nd / ((nd - 1.0) * (nd - 2.0)) * m3 / std::pow(m2, 1.5);
        }
        if (n >= 4) {
            // Sample-corrected excess kurtosis (0 for a normal distribution).
            row.excess_kurtosis = (nd - 1.0) / ((nd - 2.0) * (nd - 3.0)) *
                                  ((nd + 1.0) * (m4 / (m2 * m2) - 3.0) + 6.0);
        }
    }
    return row;
}

// ---------------------------------------------------------------------------
// Calibration pipeline
// ---------------------------------------------------------------------------

PriceLawFit calibrate_price_law(const QuarterlySeries& data) {
    const std::size_t k = data.size();
    if (k < 3) {
        throw std::invalid_argument("calibrate_price_law: need >= 3 quarters, got " +
                                    std::to_string(k));
    }
    if (data.demand.size() != k || data.supply.size() != k || data.price.size() != k) {
        throw std::invalid_argument("calibrate_price_law: column lengths differ");
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (!(data.demand[i] > 0.0) || !(data.supply[i] > 0.0)) {
            throw std::invalid_argument("calibrate_price_law: demand and supply must be > 0 (" +
                                        data.quarters[i] + ")");
        }
    }

    PriceLawFit out;
    out.ratio.reserve(k - 1);
    out.pcr.reserve(k - 1);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        out.ratio.push_back(data.supply[i] / data.demand[i]);
        out.pcr.push_back(data.price[i + 1] - data.price[i]); // dt_data = 1 quarter
    }
    out.fit = ols_fit(out.ratio, out.pcr, 1);
    return out;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

std::string stats_table_csv(const std::vector<std::string>& names,
                            const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size()) {
        throw std::invalid_argument("stats_table_csv: names/columns length mismatch");
    }
    std::vector<StatsRow> stats;
    stats.reserve(columns.size());
    for (const auto& col : columns) stats.push_back(descriptive_stats(col));

    std::string out = "stat";
    for (const auto& n : names) out += "," + n;
    out += "\n";

    auto emit = [&](const std::string& label, auto getter) {
        out += label;
        for (const auto& s : stats) {
            out += ",";
            auto v = getter(s);
            if (v) out += format_number(*v);
        }
        out += "\n";
    };
    using Opt = std::optional<double>;
    emit("Min", [](const StatsRow& s) { return Opt(s.min); });
    emit("Max", [](const StatsRow& s) { return Opt(s.max); });
    emit("Mean", [](const StatsRow& s) { return Opt(s.mean); });
    emit("Median", [](const StatsRow& s) { return Opt(s.median); });
    emit("STD", [](const StatsRow& s) { return s.std_dev; });
    emit("Kurtosis", [](const StatsRow& s) { return s.excess_kurtosis; });
    emit("Skewness", [](const StatsRow& s) { return s.skewness; });
    return out;
}

std::string calibration_stats_csv(const QuarterlySeries& data) {
    std::vector<double> ratio;
    ratio.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        ratio.push_back(data.supply[i] / data.demand[i]);
    }
    std::vector<double> pcr;
    pcr.reserve(data.size() - 1);
    for (std::size_t i = 0; i + 1 < data.size(); ++i) {
        pcr.push_back(data.price[i + 1] - data.price[i]);
    }
    return stats_table_csv({"total_demand", "total_supply", "ratio", "price", "pcr"},
                           {data.demand, data.supply, ratio, data.price, pcr});
}

} // namespace stockflow
