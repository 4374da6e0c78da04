#include "stockflow/compare.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stockflow/numfmt.hpp"

namespace stockflow {

namespace {
int sign_of(double v) { return (v > 0.0) - (v < 0.0); }
} // namespace

ComparisonReport compare_series(const SampledSeries& sim,
                                const SampledSeries& reference) {
    if (sim.size() == 0 || reference.size() == 0) {
        throw std::invalid_argument("compare: empty series");
    }
    const double lo = std::max(sim.t.front(), reference.t.front());
    const double hi = std::min(sim.t.back(), reference.t.back());
    if (lo > hi) {
        throw std::invalid_argument("compare: time ranges do not overlap");
    }

    // Simulation samples inside the overlap; reference resampled to them by
    // nearest-preceding value.
    std::vector<double> sim_v, ref_v;
    for (std::size_t i = 0; i < sim.size(); ++i) {
        const double t = sim.t[i];
        if (t < lo || t > hi) continue;
        auto it = std::upper_bound(reference.t.begin(), reference.t.end(), t);
        const auto idx = static_cast<std::size_t>(it - reference.t.begin());
        // t >= lo >= reference.t.front(), so idx >= 1.
        sim_v.push_back(sim.values[i]);
        ref_v.push_back(reference.values[idx - 1]);
    }
    if (sim_v.empty()) {
        throw std::invalid_argument("compare: no simulation samples inside the overlap");
    }

    ComparisonReport report;
    report.samples = static_cast<int>(sim_v.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < sim_v.size(); ++i) {
        const double d = sim_v[i] - ref_v[i];
        sq += d * d;
        report.max_abs_error = std::max(report.max_abs_error, std::abs(d));
    }
    report.rmse = std::sqrt(sq / static_cast<double>(sim_v.size()));

    if (sim_v.size() < 2) {
        report.trend_sign_agreement = 1.0;
    } else {
        int agree = 0;
        for (std::size_t i = 0; i + 1 < sim_v.size(); ++i) {
            const int s = sign_of(sim_v[i + 1] - sim_v[i]);
            const int r = sign_of(ref_v[i + 1] - ref_v[i]);
            if (s == r) ++agree;
        }
        report.trend_sign_agreement =
            static_cast<double>(agree) / static_cast<double>(sim_v.size() - 1);
    }
    return report;
}

std::string comparison_csv(const ComparisonReport& report) {
    std::string out = "metric,value\n";
    out += "rmse," + format_number(report.rmse) + "\n";
    out += "max_abs_error," + format_number(report.max_abs_error) + "\n";
    out += "trend_sign_agreement," + format_number(report.trend_sign_agreement) + "\n";
    out += "samples," + std::to_string(report.samples) + "\n";
    return out;
}

std::string comparison_summary(const ComparisonReport& report) {
    std::ostringstream os;
    os << "compared " << report.samples << " samples: rmse " << format_number(report.rmse)
       << ", max abs error " << format_number(report.max_abs_error)
       << ", trend sign agreement " << format_number(report.trend_sign_agreement);
    return os.str();
}

} // namespace stockflow
