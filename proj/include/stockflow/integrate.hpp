#pragma once

#include <span>
#include <string>
#include <vector>

#include "stockflow/model.hpp"
#include "stockflow/timeseries.hpp"

namespace stockflow {

enum class IntegratorKind { Euler, Rk4 };

/// A simulation run failure with step context.
class SimulationError : public std::runtime_error {
public:
    SimulationError(std::size_t step, double t, const std::string& what_arg)
        : std::runtime_error("step " + std::to_string(step) + " (t=" +
                             std::to_string(t) + "): " + what_arg),
          step_(step), t_(t) {}
    [[nodiscard]] std::size_t step() const { return step_; }
    [[nodiscard]] double time() const { return t_; }

private:
    std::size_t step_;
    double t_;
};

struct Trajectory {
    TimeGrid grid;
    std::vector<TimeSeries> series;

    [[nodiscard]] const TimeSeries* find(std::string_view name) const {
        for (const auto& s : series) {
            if (s.name == name) return &s;
        }
        return nullptr;
    }
};

/// One forward-Euler step: y_{k+1} = y_k + dt * f(t_k, y_k). Advances the
/// delay buffers by one sample (inputs evaluated at the pre-step state).
SimState euler_step(const Model& model, const SimState& state, double dt,
                    const InputOverlay* overlay = nullptr);

/// One classical fourth-order Runge-Kutta step (stage weights 1,2,2,1 over
/// 6). Delay buffers are frozen at the step start for all four stages and
/// advance once per step.
SimState rk4_step(const Model& model, const SimState& state, double dt,
                  const InputOverlay* overlay = nullptr);

/// Runs the model over the grid with the chosen stepper. Stocks are always
/// recorded; `record` adds auxiliaries, flows, constants or delay outputs
/// by name. Every series has step_count()+1 samples at internal-step
/// resolution. The first evaluation error aborts the run as a
/// SimulationError carrying step index and element name.
Trajectory simulate(const Model& model, const TimeGrid& grid,
                    IntegratorKind kind,
                    std::span<const std::string> record = {},
                    const InputOverlay* overlay = nullptr);

/// Numerical lower bound on the local Lipschitz constant of a stock's net
/// rate with respect to its own value: max |f(t,y') - f(t,y)| / |y' - y|
/// over `samples` perturbations y' spread uniformly on [y-span, y+span].
/// A step-size diagnostic, not a guarantee.
double estimate_lipschitz(const Model& model, const SimState& state,
                          std::string_view stock_name, double span,
                          int samples);

} // namespace stockflow
