#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stockflow/timeseries.hpp"

namespace stockflow {

/// Aligned quarterly observations of demand, supply and price.
struct QuarterlySeries {
    std::vector<std::string> quarters; // labels like "2010Q1", consecutive
    std::vector<double> demand;        // > 0
    std::vector<double> supply;        // > 0
    std::vector<double> price;

    [[nodiscard]] std::size_t size() const { return quarters.size(); }
};

/// Least-squares polynomial fit. coefficients[k] multiplies x^k, so for a
/// degree-1 fit the slope is coefficients[1] and the intercept
/// coefficients[0].
struct RegressionFit {
    std::vector<double> coefficients;
    double residual_std = 0.0; // sqrt(SSE / (n - p))
    double r_squared = 0.0;
    int samples = 0;

    [[nodiscard]] double slope() const { return coefficients.at(1); }
    [[nodiscard]] double intercept() const { return coefficients.at(0); }
    [[nodiscard]] double predict(double x) const;
};

/// One row of the descriptive-statistics report. Fields that need more
/// samples than provided (std: 2, skewness: 3, kurtosis: 4) or a nonzero
/// variance are left empty.
struct StatsRow {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double median = 0.0;
    std::optional<double> std_dev;         // sample, n-1 divisor
    std::optional<double> skewness;        // n^2/((n-1)(n-2)) * m3 / m2^1.5
    std::optional<double> excess_kurtosis; // sample-corrected, normal -> 0
};

/// Price change rate: PCR(t_k) = (P(t_{k+1}) - P(t_k)) / dt_data, one
/// sample shorter than the price series. dt_data must match the series
/// spacing (a resolution-mixing guard).
TimeSeries pcr_series(const TimeSeries& price, double dt_data);

/// Validates uniform spacing of an irregularly-carried price sequence
/// before differencing. Throws on fewer than 2 samples or uneven spacing.
TimeSeries pcr_series(std::span<const double> times,
                      std::span<const double> prices, double dt_data);

/// Least-squares polynomial fit of y on x via normal equations on a
/// mean-centered, scaled regressor. Throws std::invalid_argument on a
/// degenerate (zero-variance) x, rank deficiency, or fewer than degree+2
/// samples.
RegressionFit ols_fit(std::span<const double> x, std::span<const double> y,
                      int degree);

/// Alignment-checked overload: x and y must share t0, dt, time unit and
/// length.
RegressionFit ols_fit(const TimeSeries& x, const TimeSeries& y, int degree);

StatsRow descriptive_stats(std::span<const double> values);

/// Full calibration pipeline on quarterly data: ratio = supply/demand over
/// the first K-1 quarters, PCR by first differences, then a degree-1 fit
/// PCR = slope * ratio + intercept. Requires at least 3 quarters.
struct PriceLawFit {
    RegressionFit fit;
    std::vector<double> ratio; // regressor, length K-1
    std::vector<double> pcr;   // regressand, length K-1 (USD/quarter)
};

PriceLawFit calibrate_price_law(const QuarterlySeries& data);

/// Stats table over the five calibration columns (demand, supply, ratio,
/// price, PCR) in the report layout: one row per statistic, one column per
/// quantity. Undefined cells are left empty.
std::string calibration_stats_csv(const QuarterlySeries& data);

/// Generic per-column stats table for arbitrary named columns.
std::string stats_table_csv(const std::vector<std::string>& names,
                            const std::vector<std::vector<double>>& columns);

} // namespace stockflow
