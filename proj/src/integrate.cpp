#include "stockflow/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace stockflow {

namespace {

void rates_at(const Model& model, double t, std::span<const double> stocks,
              const std::vector<DelayBuffer>& bufs, const InputOverlay* overlay,
              EvalScratch& scratch, std::span<double> rates) {
    eval_pass(model, t, stocks, &bufs, overlay, scratch);
    stock_rates(model, scratch, rates);
}

void check_step(const Model& model, const SimState& state, double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("step size must be > 0");
    }
    for (std::size_t i = 0; i < model.delays().size(); ++i) {
        if (model.delays()[i].lag_days > 0.0 && dt != state.dt) {
            throw std::invalid_argument(
                "step size differs from the grid the delay buffers were built for");
        }
    }
}

// Advances the delay buffers by one sample: inputs evaluated at the
// pre-step state (scratch must hold the pass at that state).
void push_delays(const Model& model, const SimState& pre, SimState& next,
                 const EvalScratch& scratch) {
    for (std::size_t i = 0; i < model.delays().size(); ++i) {
        if (model.delays()[i].lag_days == 0.0) continue;
        const double u = eval_delay_input(model, static_cast<int>(i), pre.t,
                                          pre.stocks, scratch);
        next.delay_bufs[i].push(u);
    }
}

} // namespace

SimState euler_step(const Model& model, const SimState& state, double dt,
                    const InputOverlay* overlay) {
    check_step(model, state, dt);
    EvalScratch scratch;
    std::vector<double> rates(model.stocks().size());
    rates_at(model, state.t, state.stocks, state.delay_bufs, overlay, scratch, rates);

    SimState next = state;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        next.stocks[i] = state.stocks[i] + dt * rates[i];
    }
    push_delays(model, state, next, scratch);
    next.t = state.t + dt;
    return next;
}

SimState rk4_step(const Model& model, const SimState& state, double dt,
                  const InputOverlay* overlay) {
    check_step(model, state, dt);
    const std::size_t n = model.stocks().size();
    EvalScratch scratch;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), y(n);

    rates_at(model, state.t, state.stocks, state.delay_bufs, overlay, scratch, k1);

    for (std::size_t i = 0; i < n; ++i) y[i] = state.stocks[i] + 0.5 * dt * k1[i];
    rates_at(model, state.t + 0.5 * dt, y, state.delay_bufs, overlay, scratch, k2);

    for (std::size_t i = 0; i < n; ++i) y[i] = state.stocks[i] + 0.5 * dt * k2[i];
    rates_at(model, state.t + 0.5 * dt, y, state.delay_bufs, overlay, scratch, k3);

    for (std::size_t i = 0; i < n; ++i) y[i] = state.stocks[i] + dt * k3[i];
    rates_at(model, state.t + dt, y, state.delay_bufs, overlay, scratch, k4);

    SimState next = state;
    for (std::size_t i = 0; i < n; ++i) {
        next.stocks[i] =
            state.stocks[i] + dt * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }

    // Buffers stay frozen for all four stages; the pushed sample is the
    // input at the step-start state.
    rates_at(model, state.t, state.stocks, state.delay_bufs, overlay, scratch, k1);
    push_delays(model, state, next, scratch);
    next.t = state.t + dt;
    return next;
}

Trajectory simulate(const Model& model, const TimeGrid& grid,
                    IntegratorKind kind, std::span<const std::string> record,
                    const InputOverlay* overlay) {
    // Requested names must exist and be recordable.
    std::vector<ElementRef> extra_refs;
    std::vector<std::string> extra_names;
    for (const std::string& name : record) {
        auto ref = model.find(name);
        if (!ref) {
            throw std::invalid_argument("record: unknown element '" + name + "'");
        }
        if (ref->kind == ElementKind::Lookup) {
            throw std::invalid_argument("record: '" + name + "' is a lookup table");
        }
        if (ref->kind == ElementKind::Stock) continue; // always recorded
        if (std::find(extra_names.begin(), extra_names.end(), name) != extra_names.end())
            continue;
        extra_refs.push_back(*ref);
        extra_names.push_back(name);
    }

    SimState st = init_state(model, grid, overlay);

    Trajectory traj{grid, {}};
    const std::size_t samples = grid.step_count() + 1;
    for (const auto& s : model.stocks()) {
        TimeSeries ts{s.name, "", "day", grid.t0(), grid.dt_internal(), {}};
        ts.values.reserve(samples);
        traj.series.push_back(std::move(ts));
    }
    for (std::size_t i = 0; i < extra_names.size(); ++i) {
        TimeSeries ts{extra_names[i], "", "day", grid.t0(), grid.dt_internal(), {}};
        ts.values.reserve(samples);
        traj.series.push_back(std::move(ts));
    }

    EvalScratch scratch;
    auto record_sample = [&] {
        if (!extra_refs.empty()) {
            eval_pass(model, st.t, st.stocks, &st.delay_bufs, overlay, scratch);
        }
        std::size_t col = 0;
        for (std::size_t i = 0; i < model.stocks().size(); ++i, ++col) {
            traj.series[col].values.push_back(st.stocks[i]);
        }
        for (const ElementRef ref : extra_refs) {
            const auto i = static_cast<std::size_t>(ref.index);
            double v = 0.0;
            switch (ref.kind) {
            case ElementKind::Constant: v = scratch.constants[i]; break;
            case ElementKind::Aux: v = scratch.auxes[i]; break;
            case ElementKind::Flow: v = scratch.flows[i]; break;
            case ElementKind::Delay: v = scratch.delay_out[i]; break;
            default: break;
            }
            traj.series[col++].values.push_back(v);
        }
    };

    record_sample();
    const double dt = grid.dt_internal();
    for (std::size_t k = 0; k < grid.step_count(); ++k) {
        try {
            st = kind == IntegratorKind::Euler ? euler_step(model, st, dt, overlay)
                                               : rk4_step(model, st, dt, overlay);
        } catch (const EvalError& e) {
            throw SimulationError(k, st.t, e.what());
        }
        record_sample();
    }
    return traj;
}

double estimate_lipschitz(const Model& model, const SimState& state,
                          std::string_view stock_name, double span,
                          int samples) {
    if (samples < 2) throw std::invalid_argument("estimate_lipschitz: samples must be >= 2");
    if (!(span > 0.0)) throw std::invalid_argument("estimate_lipschitz: span must be > 0");
    auto idx = model.stock_index(stock_name);
    if (!idx) {
        throw std::invalid_argument("estimate_lipschitz: unknown stock '" +
                                    std::string(stock_name) + "'");
    }
    const auto si = static_cast<std::size_t>(*idx);

    EvalScratch scratch;
    std::vector<double> rates(model.stocks().size());
    rates_at(model, state.t, state.stocks, state.delay_bufs, nullptr, scratch, rates);
    const double f0 = rates[si];
    const double y0 = state.stocks[si];

    std::vector<double> stocks = state.stocks;
    double best = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double y = y0 - span +
                         2.0 * span * static_cast<double>(i) / static_cast<double>(samples - 1);
        if (y == y0) continue;
        stocks[si] = y;
        rates_at(model, state.t, stocks, state.delay_bufs, nullptr, scratch, rates);
        best = std::max(best, std::abs(rates[si] - f0) / std::abs(y - y0));
    }
    return best;
}

} // namespace stockflow
