#include "stockflow/oilmarket.hpp"

#include <cmath>
#include <stdexcept>

namespace stockflow {

double effective_ratio(double tos, double tod, double exs, double exd) {
    const double expected_demand = exd * tod;
    if (!(expected_demand > 0.0)) {
        throw std::invalid_argument("effective_ratio: expected demand must be > 0");
    }
    return (exs * tos) / expected_demand;
}

namespace {

void validate(const OilMarketParams& p) {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string("oil market params: ") + what +
                                        " must be > 0");
        }
    };
    positive(p.base_tod, "base_tod");
    positive(p.base_tos, "base_tos");
    positive(p.speculation_ramp, "speculation_ramp");
    if (p.exs_path.is_constant()) positive(p.exs_path.constant, "ExS multiplier");
    if (p.exd_path.is_constant()) positive(p.exd_path.constant, "ExD multiplier");
    for (auto [t, v] : p.exs_path.points) positive(v, "ExS multiplier");
    for (auto [t, v] : p.exd_path.points) positive(v, "ExD multiplier");
    if (p.upset_magnitude < 0.0) {
        throw std::invalid_argument("oil market params: upset_magnitude must be >= 0");
    }
    if (p.spare_duration < 0.0) {
        throw std::invalid_argument("oil market params: spare_duration must be >= 0");
    }
    if (!(p.spare_lag >= 0.0)) {
        throw std::invalid_argument("oil market params: spare_lag must be >= 0");
    }
    if (p.opec_decision != 0 && p.opec_decision != 1) {
        throw std::invalid_argument("oil market params: opec_decision must be 0 or 1");
    }
}

// Multiplier path as an expression of t; piecewise paths become a lookup.
Expr path_expr(const PathSpec& path, const std::string& lookup_name,
               ModelDefs& defs) {
    if (path.is_constant()) {
        return expr_number(path.constant);
    }
    defs.lookups.push_back({lookup_name, path.points});
    return expr_apply(lookup_name, expr_time());
}

// 1 for t >= start, else 0 (select picks the second branch at c <= 0).
Expr step_at(Expr start) {
    return expr_ternary(ExprOp::Select, std::move(start) - expr_time(),
                        expr_number(0.0), expr_number(1.0));
}

} // namespace

Model build_oil_model(const OilMarketParams& p) {
    validate(p);
    ModelDefs defs;

    defs.constants = {
        {"alpha1", p.alpha1},
        {"beta1", p.beta1},
        {"initial_price", p.initial_price},
        {"base_TOS", p.base_tos},
        {"base_TOD", p.base_tod},
        {"supply_growth", p.supply_growth},
        {"start_time", 0.0},
        {"UpsetTime", p.upset_time},
        {"UpsetCut", p.upset_magnitude},
        {"SpecLevel", p.speculation_level},
        {"SpecRamp", p.speculation_ramp},
        {"OPECDecision", static_cast<double>(p.opec_decision)},
        {"SpareFeed", 0.0},
    };

    // TOD = base_TOD
    defs.auxes.push_back({"TOD", expr_var("base_TOD"), ""});

    // TOS = base_TOS*(1 + supply_growth*(t - start_time))
    //       - [t >= UpsetTime]*UpsetCut*base_TOS + SpareArrival
    Expr base_path = expr_var("base_TOS") *
                     (expr_number(1.0) +
                      expr_var("supply_growth") * (expr_time() - expr_var("start_time")));
    Expr upset_cut = step_at(expr_var("UpsetTime")) * expr_var("UpsetCut") *
                     expr_var("base_TOS");
    defs.auxes.push_back(
        {"TOS", std::move(base_path) - std::move(upset_cut) + expr_var("SpareArrival"), ""});

    // ExS = path(t) * (1 + SpecLevel*clamp((t - UpsetTime)/SpecRamp, 0, 1));
    // the speculative rise engages at the upset and holds afterwards.
    Expr ramp = expr_ternary(ExprOp::Clamp,
                             (expr_time() - expr_var("UpsetTime")) / expr_var("SpecRamp"),
                             expr_number(0.0), expr_number(1.0));
    Expr spec_factor = expr_number(1.0) + expr_var("SpecLevel") * std::move(ramp);
    defs.auxes.push_back(
        {"ExS", path_expr(p.exs_path, "ExSPath", defs) * std::move(spec_factor), ""});
    defs.auxes.push_back({"ExD", path_expr(p.exd_path, "ExDPath", defs), ""});

    // Ratio = (ExS * TOS) / (ExD * TOD)
    defs.auxes.push_back({"Ratio", (expr_var("ExS") * expr_var("TOS")) /
                                       (expr_var("ExD") * expr_var("TOD")),
                          ""});

    // Spare supply reaches the market through a transport delay, gated by
    // the OPEC decision.
    defs.delays.push_back(
        {"SpareArrival", expr_var("OPECDecision") * expr_var("SpareFeed"), p.spare_lag});

    // dPrice = alpha1*Ratio + beta1 (may be negative; it is the only inflow)
    defs.flows.push_back(
        {"dPrice", expr_var("alpha1") * expr_var("Ratio") + expr_var("beta1"), "USD/day"});

    StockDecl price;
    price.name = "OilPrice";
    price.initial = expr_var("initial_price");
    price.inflows = {"dPrice"};
    defs.stocks.push_back(std::move(price));

    BuildResult built = build_model(std::move(defs));
    if (!built.ok()) {
        std::string msg = "build_oil_model: internal model failed validation:";
        for (const auto& i : built.issues) msg += " " + i.message + ";";
        throw std::logic_error(msg);
    }
    return std::move(*built.model);
}

OilMarketParams scenario_a_params() {
    OilMarketParams p;
    p.initial_price = 100.0;
    p.base_tod = 90.0;
    // Ratio starts at 92.7/90 = 1.03, just above the zero-change ratio
    // -beta1/alpha1 = 1.029, so the price decays from day one.
    p.base_tos = 92.7;
    // Tuned so the closed-form price integral lands at 99.16 on day 43:
    // g = (-0.84 - alpha1*(R0 - 1.029)*43) / (alpha1*R0*43^2/2).
    p.supply_growth = 0.001564739796373799;
    return p;
}

ScenarioSetup scenario_a(const OilMarketParams& p) {
    (void)p; // the neutral study needs no overlay: everything is in the params
    ScenarioSetup setup{ScenarioDoc{}, TimeGrid(0.0, 43.0, 0.0625)};
    return setup;
}

OilMarketParams scenario_b_params() {
    OilMarketParams p; // balanced market, flat supply
    p.upset_time = 15.0;
    p.upset_magnitude = 0.05;
    p.meeting_delay = 10.0;
    p.spare_lag = 5.0;
    p.spare_duration = 90.0;
    // ExS settles at 1.029 = -beta1/alpha1, so a fully restored supply
    // holds the elevated price with a near-zero change rate.
    p.speculation_level = 0.029;
    p.speculation_ramp = 3.0;
    return p;
}

ScenarioSetup scenario_b(const OilMarketParams& p, int decision) {
    if (decision != 0 && decision != 1) {
        throw std::invalid_argument("scenario_b: decision must be 0 or 1");
    }
    TimeGrid grid(0.0, 120.0, 0.0625);
    if (!(p.upset_time > grid.t0()) || p.upset_time >= grid.t_end()) {
        throw std::invalid_argument("scenario_b: upset_time must lie within the horizon");
    }
    const double meeting_time = p.upset_time + p.meeting_delay;
    if (meeting_time >= grid.t_end()) {
        throw std::invalid_argument("scenario_b: OPEC meeting falls outside the horizon");
    }

    ScenarioDoc doc;
    doc.events.push_back(
        {p.upset_time, EventKind::SetConstant, "UpsetTime", p.upset_time, std::nullopt, {}});
    doc.events.push_back({meeting_time, EventKind::SwitchDecision, "OPECDecision",
                          static_cast<double>(decision), std::nullopt, {}});
    if (decision == 1) {
        // Spare release sized to restore the cut exactly; it reaches the
        // market spare_lag days later through the SpareArrival delay.
        doc.events.push_back({meeting_time, EventKind::PulseInput, "SpareFeed",
                              p.upset_magnitude * p.base_tos, p.spare_duration, {}});
    }
    return {std::move(doc), grid};
}

} // namespace stockflow
