#pragma once

#include <string>

#include "stockflow/csv.hpp"

namespace stockflow {

/// Simulated-versus-reference comparison over the overlapping time range.
struct ComparisonReport {
    double rmse = 0.0;
    double max_abs_error = 0.0;
    /// Fraction of consecutive steps whose simulated and reference price
    /// changes share a sign (sign of zero counts as its own sign).
    double trend_sign_agreement = 0.0;
    int samples = 0;
};

/// Resamples the reference onto the simulation grid by nearest-preceding
/// sample (daily closes are step-valued between trading days), restricted
/// to the overlapping time range. Throws std::invalid_argument when the
/// ranges do not overlap or either series is empty.
ComparisonReport compare_series(const SampledSeries& sim,
                                const SampledSeries& reference);

std::string comparison_csv(const ComparisonReport& report);
std::string comparison_summary(const ComparisonReport& report);

} // namespace stockflow
