#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stockflow {

/// Nearest integer k with |x - k*unit| within a relative tolerance, if any.
/// Used everywhere a duration has to sit on the simulation grid.
inline std::optional<long long> grid_multiple(double x, double unit,
                                              double rel_tol = 1e-9) {
    if (unit <= 0.0 || !std::isfinite(x) || !std::isfinite(unit)) {
        return std::nullopt;
    }
    const double ratio = x / unit;
    const double k = std::round(ratio);
    if (k < 0) {
        return std::nullopt;
    }
    const double tol = rel_tol * std::max(1.0, std::abs(ratio));
    if (std::abs(ratio - k) > tol) {
        return std::nullopt;
    }
    return static_cast<long long>(k);
}

/// Simulation clock. dt_internal is the integration step; dt_data is the
/// resolution of any sampled data attached to the run. Both ratios
/// (horizon/dt_internal and dt_data/dt_internal) must be whole numbers,
/// checked at construction.
class TimeGrid {
public:
    TimeGrid(double t0, double horizon, double dt_internal = 0.0625,
             std::optional<double> dt_data = std::nullopt)
        : t0_(t0), horizon_(horizon), dt_internal_(dt_internal),
          dt_data_(dt_data.value_or(dt_internal)) {
        if (!(dt_internal_ > 0.0)) {
            throw std::invalid_argument("TimeGrid: dt_internal must be > 0");
        }
        if (!(horizon_ > 0.0)) {
            throw std::invalid_argument("TimeGrid: horizon must be > 0");
        }
        auto steps = grid_multiple(horizon_, dt_internal_);
        if (!steps || *steps < 1) {
            throw std::invalid_argument(
                "TimeGrid: horizon is not an integer multiple of dt_internal");
        }
        steps_ = static_cast<std::size_t>(*steps);
        auto data_ratio = grid_multiple(dt_data_, dt_internal_);
        if (!data_ratio || *data_ratio < 1) {
            throw std::invalid_argument(
                "TimeGrid: dt_data / dt_internal must be a positive integer");
        }
    }

    [[nodiscard]] double t0() const { return t0_; }
    [[nodiscard]] double horizon() const { return horizon_; }
    [[nodiscard]] double dt_internal() const { return dt_internal_; }
    [[nodiscard]] double dt_data() const { return dt_data_; }
    [[nodiscard]] double t_end() const { return t0_ + horizon_; }
    [[nodiscard]] std::size_t step_count() const { return steps_; }
    [[nodiscard]] double time_at(std::size_t k) const {
        return t0_ + static_cast<double>(k) * dt_internal_;
    }

private:
    double t0_;
    double horizon_;
    double dt_internal_;
    double dt_data_;
    std::size_t steps_ = 0;
};

/// Uniformly sampled named sequence; the universal input/output currency.
/// `units` labels the sample values, `time_unit` the spacing (days for
/// simulation output, quarters for the calibration data).
struct TimeSeries {
    std::string name;
    std::string units;
    std::string time_unit = "day";
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] double time_at(std::size_t k) const {
        return t0 + static_cast<double>(k) * dt;
    }
};

} // namespace stockflow
