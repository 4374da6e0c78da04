#pragma once

#include <utility>
#include <vector>

#include "stockflow/model.hpp"
#include "stockflow/modelfmt.hpp"
#include "stockflow/timeseries.hpp"

namespace stockflow {

/// Sentinel for "never happens" event times.
inline constexpr double kNeverTime = 1e9;

/// Exogenous multiplier path: a constant, or a piecewise-linear table over
/// time (clamped outside the listed range).
struct PathSpec {
    double constant = 1.0;
    std::vector<std::pair<double, double>> points; // (t, multiplier)

    [[nodiscard]] bool is_constant() const { return points.empty(); }
};

/// Parameters of the oil-market model: a single OilPrice stock driven by
/// the expected supply-to-demand ratio through the calibrated linear price
/// law dP/dt = alpha1 * ratio + beta1.
struct OilMarketParams {
    double alpha1 = -0.547945205479452;  // USD/day per ratio unit
    double beta1 = 0.5638356164383562;   // USD/day
    double initial_price = 100.0;        // USD
    double base_tod = 90.0;              // demand level
    double base_tos = 90.0;              // supply level
    double supply_growth = 0.0;          // fraction of base_tos per day
    PathSpec exs_path;                   // supply-expectation multiplier
    PathSpec exd_path;                   // demand-expectation multiplier

    // Upset machinery (inert while upset_time stays at kNeverTime).
    double upset_time = kNeverTime;      // day the supply cut hits
    double upset_magnitude = 0.05;       // fraction of base_tos removed
    double speculation_level = 0.029;    // ExS excess once fully ramped
    double speculation_ramp = 3.0;       // days from upset to full ramp
    double meeting_delay = 10.0;         // upset -> OPEC meeting, days
    int opec_decision = 0;               // 1 = release spare supply
    double spare_lag = 5.0;              // transport delay to market, days
    double spare_duration = 90.0;        // length of the spare pulse, days
};

/// Expected supply over expected demand: (exs*tos) / (exd*tod). Throws on
/// a nonpositive expected demand.
double effective_ratio(double tos, double tod, double exs, double exd);

/// Builds the market model. Elements:
///   stock OilPrice                inflow dPrice, initial initial_price
///   flow  dPrice                  alpha1 * Ratio + beta1
///   aux   Ratio                   (ExS * TOS) / (ExD * TOD)
///   aux   TOS                     base path minus the upset cut plus any
///                                 spare supply arriving through the delay
///   aux   TOD, ExS, ExD           demand level and expectation multipliers
///   delay SpareArrival            OPECDecision-gated spare feed, lag
///                                 spare_lag
/// The upset/spare knobs are constants so scenario events can drive them.
Model build_oil_model(const OilMarketParams& params);

struct ScenarioSetup {
    ScenarioDoc doc;
    TimeGrid grid;
};

/// Tuned parameters for the neutral study: slight supply surplus with slow
/// growth so that a $100 starting price decays to $99.16 on day 43.
OilMarketParams scenario_a_params();

/// Neutral market, 43 days at dt 0.0625. No events: the surplus and growth
/// live in the params baked into the model.
ScenarioSetup scenario_a(const OilMarketParams& params);

/// Balanced-market parameters for the upset study: 5% production cut on
/// day 15, OPEC meeting 10 days later, spare supply landing after a 5-day
/// transport lag and holding for 90 days.
OilMarketParams scenario_b_params();

/// Geopolitical-upset study, 120 days at dt 0.0625: the supply cut engages
/// at upset_time, and at upset_time + meeting_delay the OPEC decision is
/// switched; decision 1 additionally pulses the spare-supply feed, which
/// reaches the market through the spare_lag transport delay and holds for
/// spare_duration days. Throws if upset_time is outside the horizon.
ScenarioSetup scenario_b(const OilMarketParams& params, int decision);

} // namespace stockflow
