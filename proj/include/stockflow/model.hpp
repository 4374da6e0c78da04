#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stockflow/expr.hpp"
#include "stockflow/timeseries.hpp"

namespace stockflow {

// ---------------------------------------------------------------------------
// Element definitions fed into build_model (typically produced by the parser
// or by a programmatic builder).
// ---------------------------------------------------------------------------

struct StockDecl {
    std::string name;
    Expr initial;
    std::vector<std::string> inflows;
    std::vector<std::string> outflows;
};

struct FlowDecl {
    std::string name;
    Expr expr;
    std::string units;
};

using AuxDecl = FlowDecl;

struct ConstDecl {
    std::string name;
    double value = 0.0;
};

struct LookupDecl {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

struct DelayDecl {
    std::string name;
    Expr input;
    double lag_days = 0.0; // pipeline (transport) delay
};

struct ModelDefs {
    std::vector<StockDecl> stocks;
    std::vector<FlowDecl> flows;
    std::vector<AuxDecl> auxes;
    std::vector<ConstDecl> constants;
    std::vector<LookupDecl> lookups;
    std::vector<DelayDecl> delays;
};

/// One validation failure. `element` is empty for model-level problems.
struct BuildIssue {
    std::string element;
    std::string message;
};

// ---------------------------------------------------------------------------
// Model: immutable, validated stock/flow/auxiliary graph. Safe to share
// across concurrent runs; nothing mutates it after build_model.
// ---------------------------------------------------------------------------

struct BuildResult;

class Model {
public:
    struct Stock {
        std::string name;
        Expr initial;
        std::vector<int> inflows;  // flow indices
        std::vector<int> outflows;
    };
    struct Algebraic {
        std::string name;
        Expr expr;
        std::string units;
    };
    struct Constant {
        std::string name;
        double value = 0.0;
    };
    struct LookupTable {
        std::string name;
        std::vector<double> xs; // strictly increasing
        std::vector<double> ys;
        /// Piecewise-linear interpolation, clamped at both ends.
        [[nodiscard]] double sample(double x) const;
    };
    struct Delay {
        std::string name;
        Expr input;
        double lag_days = 0.0;
    };

    [[nodiscard]] const std::vector<Stock>& stocks() const { return stocks_; }
    [[nodiscard]] const std::vector<Algebraic>& flows() const { return flows_; }
    [[nodiscard]] const std::vector<Algebraic>& auxes() const { return auxes_; }
    [[nodiscard]] const std::vector<Constant>& constants() const { return constants_; }
    [[nodiscard]] const std::vector<LookupTable>& lookups() const { return lookups_; }
    [[nodiscard]] const std::vector<Delay>& delays() const { return delays_; }

    [[nodiscard]] std::optional<ElementRef> find(std::string_view name) const;
    [[nodiscard]] const std::string& name_of(ElementRef ref) const;
    [[nodiscard]] std::optional<int> stock_index(std::string_view name) const;

    /// Evaluation order of auxiliaries, flows and zero-lag delays
    /// (dependency-sorted; cycle-free by construction).
    [[nodiscard]] const std::vector<ElementRef>& algebraic_order() const { return alg_order_; }
    /// Evaluation order for t0 initialization (stock initials and delay
    /// buffer seeds included).
    [[nodiscard]] const std::vector<ElementRef>& init_order() const { return init_order_; }

private:
    friend struct ModelBuilder;
    friend BuildResult build_model(ModelDefs defs);
    std::vector<Stock> stocks_;
    std::vector<Algebraic> flows_;
    std::vector<Algebraic> auxes_;
    std::vector<Constant> constants_;
    std::vector<LookupTable> lookups_;
    std::vector<Delay> delays_;
    std::unordered_map<std::string, ElementRef> by_name_;
    std::vector<ElementRef> alg_order_;
    std::vector<ElementRef> init_order_;
};

struct BuildResult {
    std::optional<Model> model;
    std::vector<BuildIssue> issues;
    [[nodiscard]] bool ok() const { return model.has_value(); }
};

/// Validates and freezes a model. Returns either a Model or the complete
/// list of failures (duplicate names, unresolved references, algebraic
/// cycles, malformed lookup tables, initialization cycles); never a
/// partial model.
BuildResult build_model(ModelDefs defs);

// ---------------------------------------------------------------------------
// Run-time input overlay: scenario events compiled into a pure function of
// time. Constants can be replaced (set/switch) from an event time onward;
// constants, auxiliaries and flows can have step or pulse addends. Keeping
// the overlay a function of t makes evaluation at shifted stage times
// consistent and runs reproducible.
// ---------------------------------------------------------------------------

class InputOverlay {
public:
    struct SetPoint {
        double t = 0.0;
        double value = 0.0;
    };
    struct Addend {
        double start = 0.0;
        double value = 0.0;
        double ramp = 0.0;   // step: linear ramp-in length (0 = instant)
        double width = -1.0; // pulse: active on [start, start+width); <0 = step
    };
    struct Mods {
        std::vector<SetPoint> sets; // sorted by t; constants only
        std::vector<Addend> addends;
    };

    [[nodiscard]] bool empty() const { return const_mods_.empty() && alg_mods_.empty(); }

    [[nodiscard]] double constant_value(int const_index, double base, double t) const;
    [[nodiscard]] double adjust(ElementKind kind, int index, double value, double t) const;

    void add_set(int const_index, double t, double value);
    void add_addend(ElementKind kind, int index, Addend a);

private:
    [[nodiscard]] static double addend_sum(const Mods& mods, double t);
    std::unordered_map<int, Mods> const_mods_;
    std::unordered_map<long long, Mods> alg_mods_; // key: kind*2^32 + index
};

// ---------------------------------------------------------------------------
// SimState: per-run mutable state (exclusively owned by one run).
// ---------------------------------------------------------------------------

struct DelayBuffer {
    std::vector<double> ring; // oldest sample at `head`
    std::size_t head = 0;

    [[nodiscard]] double front() const { return ring[head]; }
    void push(double v) {
        ring[head] = v;
        head = (head + 1) % ring.size();
    }
};

struct SimState {
    double t = 0.0;
    double dt = 0.0625;             // step the delay buffers were sized for
    std::vector<double> stocks;     // aligned with Model::stocks()
    std::vector<DelayBuffer> delay_bufs; // aligned with Model::delays(); empty ring = zero lag

    [[nodiscard]] double stock(const Model& m, std::string_view name) const {
        auto idx = m.stock_index(name);
        if (!idx) throw std::invalid_argument("unknown stock: " + std::string(name));
        return stocks[static_cast<std::size_t>(*idx)];
    }
};

/// Thrown when an expression evaluation fails (division by zero or a
/// non-finite result), naming the offending element.
class EvalError : public std::runtime_error {
public:
    EvalError(std::string element, const std::string& detail)
        : std::runtime_error("evaluation error in '" + element + "': " + detail),
          element_(std::move(element)) {}
    [[nodiscard]] const std::string& element() const { return element_; }

private:
    std::string element_;
};

/// Scratch space reused between evaluation passes.
struct EvalScratch {
    std::vector<double> constants;
    std::vector<double> auxes;
    std::vector<double> flows;
    std::vector<double> delay_out;
};

/// Computes constants (with overlay applied at time t), then all
/// auxiliaries/flows/zero-lag delays in dependency order. Delay outputs for
/// positive lags are read from the state's buffers. Throws EvalError.
void eval_pass(const Model& model, double t, std::span<const double> stocks,
               const std::vector<DelayBuffer>* delay_bufs,
               const InputOverlay* overlay, EvalScratch& scratch);

/// Net rate per stock (sum of inflows minus outflows) from a completed pass.
void stock_rates(const Model& model, const EvalScratch& scratch,
                 std::span<double> rates_out);

/// Value of a delay's input expression at (t, stocks), given a completed
/// pass in `scratch`. Steppers use this to advance the buffers.
double eval_delay_input(const Model& model, int delay_index, double t,
                        std::span<const double> stocks,
                        const EvalScratch& scratch);

/// Public form of the right-hand-side evaluation: returns the net rate of
/// every stock at the state's (t, stocks). `overrides` may replace stock
/// values and, via the reserved key "t", the evaluation time — integrators
/// use this to evaluate at shifted stage points.
std::map<std::string, double>
eval_rhs(const Model& model, const SimState& state,
         const std::map<std::string, double>& overrides = {},
         const InputOverlay* overlay = nullptr);

/// Builds the initial state at grid.t0(): stock initials evaluated in
/// dependency order, delay buffers sized to lag/dt_internal samples and
/// seeded with each delay's input value at t0. Validates that every
/// positive lag is a whole number of internal steps.
SimState init_state(const Model& model, const TimeGrid& grid,
                    const InputOverlay* overlay = nullptr);

/// Current output of a pipeline delay: the input value `lag` ago (the t0
/// input before t0 + lag). A zero-lag delay returns the live input value.
double delay_read(const Model& model, std::string_view delay_name,
                  const SimState& state, const InputOverlay* overlay = nullptr);

} // namespace stockflow
