#include "stockflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace stockflow {

namespace {

const char* const kReservedNames[] = {"t", "min", "max", "clamp", "select"};

bool is_reserved(std::string_view name) {
    for (const char* r : kReservedNames) {
        if (name == r) return true;
    }
    return false;
}

} // namespace

// ---------------------------------------------------------------------------
// LookupTable
// ---------------------------------------------------------------------------

double Model::LookupTable::sample(double x) const {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + w * (ys[hi] - ys[lo]);
}

// ---------------------------------------------------------------------------
// Model accessors
// ---------------------------------------------------------------------------

std::optional<ElementRef> Model::find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

const std::string& Model::name_of(ElementRef ref) const {
    const auto i = static_cast<std::size_t>(ref.index);
    switch (ref.kind) {
    case ElementKind::Constant: return constants_[i].name;
    case ElementKind::Stock: return stocks_[i].name;
    case ElementKind::Aux: return auxes_[i].name;
    case ElementKind::Flow: return flows_[i].name;
    case ElementKind::Delay: return delays_[i].name;
    case ElementKind::Lookup: return lookups_[i].name;
    default: throw std::logic_error("name_of: empty element reference");
    }
}

std::optional<int> Model::stock_index(std::string_view name) const {
    auto ref = find(name);
    if (!ref || ref->kind != ElementKind::Stock) return std::nullopt;
    return ref->index;
}

// ---------------------------------------------------------------------------
// build_model
// ---------------------------------------------------------------------------

struct ModelBuilder {
    Model m;
    std::vector<BuildIssue> issues;

    void issue(std::string element, std::string message) {
        issues.push_back({std::move(element), std::move(message)});
    }

    bool declare(const std::string& name, ElementRef ref) {
        if (is_reserved(name)) {
            issue(name, "'" + name + "' is a reserved name");
            return false;
        }
        auto [it, inserted] = m.by_name_.emplace(name, ref);
        if (!inserted) {
            issue(name, "duplicate name '" + name + "'");
            return false;
        }
        return true;
    }

    // Resolves every Var/Apply node in-place; records unresolved names.
    void resolve_expr(Expr& e, const std::string& owner) {
        for (ExprNode& n : e.nodes) {
            if (n.op == ExprOp::Var) {
                auto ref = m.find(n.name);
                if (!ref) {
                    issue(owner, "unresolved reference '" + n.name + "' in '" + owner + "'");
                } else if (ref->kind == ElementKind::Lookup) {
                    issue(owner, "lookup '" + n.name + "' must be applied as " +
                                     n.name + "(...) in '" + owner + "'");
                } else {
                    n.ref = *ref;
                }
            } else if (n.op == ExprOp::Apply) {
                auto ref = m.find(n.name);
                if (!ref) {
                    issue(owner, "unresolved lookup '" + n.name + "' in '" + owner + "'");
                } else if (ref->kind != ElementKind::Lookup) {
                    issue(owner, "'" + n.name + "' is not a lookup table (applied in '" +
                                     owner + "')");
                } else {
                    n.ref = *ref;
                }
            }
        }
    }

    static void collect_refs(const Expr& e, std::vector<ElementRef>& out) {
        for (const ExprNode& n : e.nodes) {
            if (n.op == ExprOp::Var && n.ref.valid()) out.push_back(n.ref);
        }
    }
};

namespace {

// Deterministic Kahn topological sort. Returns false and fills `cycle` with
// the names of one dependency cycle when the graph is cyclic.
bool topo_sort(std::size_t node_count,
               const std::vector<std::vector<int>>& deps,
               std::vector<int>& order, std::vector<int>& cycle) {
    std::vector<std::vector<int>> dependents(node_count);
    std::vector<int> pending(node_count, 0);
    for (std::size_t i = 0; i < node_count; ++i) {
        pending[i] = static_cast<int>(deps[i].size());
        for (int d : deps[i]) dependents[static_cast<std::size_t>(d)].push_back(static_cast<int>(i));
    }
    std::set<int> ready;
    for (std::size_t i = 0; i < node_count; ++i) {
        if (pending[i] == 0) ready.insert(static_cast<int>(i));
    }
    order.clear();
    order.reserve(node_count);
    while (!ready.empty()) {
        const int n = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(n);
        for (int dep : dependents[static_cast<std::size_t>(n)]) {
            if (--pending[static_cast<std::size_t>(dep)] == 0) ready.insert(dep);
        }
    }
    if (order.size() == node_count) return true;

    // Extract one concrete cycle among the unresolved nodes.
    std::vector<char> leftover(node_count, 0);
    for (std::size_t i = 0; i < node_count; ++i) {
        leftover[i] = pending[i] > 0 ? 1 : 0;
    }
    int start = -1;
    for (std::size_t i = 0; i < node_count; ++i) {
        if (leftover[i]) { start = static_cast<int>(i); break; }
    }
    std::vector<int> path;
    std::vector<int> visited_at(node_count, -1);
    int cur = start;
    while (visited_at[static_cast<std::size_t>(cur)] < 0) {
        visited_at[static_cast<std::size_t>(cur)] = static_cast<int>(path.size());
        path.push_back(cur);
        int next = -1;
        for (int d : deps[static_cast<std::size_t>(cur)]) {
            if (leftover[static_cast<std::size_t>(d)]) { next = d; break; }
        }
        cur = next;
    }
    cycle.assign(path.begin() + visited_at[static_cast<std::size_t>(cur)], path.end());
    return false;
}

std::string join_names(const Model& m, const std::vector<ElementRef>& refs,
                       const std::vector<int>& cycle) {
    std::ostringstream os;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        if (i) os << " -> ";
        os << m.name_of(refs[static_cast<std::size_t>(cycle[i])]);
    }
    os << " -> " << m.name_of(refs[static_cast<std::size_t>(cycle.front())]);
    return os.str();
}

} // namespace

BuildResult build_model(ModelDefs defs) {
    ModelBuilder b;
    Model& m = b.m;

    auto by_name = [](const auto& a, const auto& c) { return a.name < c.name; };
    std::sort(defs.constants.begin(), defs.constants.end(), by_name);
    std::sort(defs.stocks.begin(), defs.stocks.end(), by_name);
    std::sort(defs.auxes.begin(), defs.auxes.end(), by_name);
    std::sort(defs.flows.begin(), defs.flows.end(), by_name);
    std::sort(defs.lookups.begin(), defs.lookups.end(), by_name);
    std::sort(defs.delays.begin(), defs.delays.end(), by_name);

    for (auto& d : defs.constants) {
        if (!std::isfinite(d.value)) b.issue(d.name, "constant '" + d.name + "' is not finite");
        if (b.declare(d.name, {ElementKind::Constant, static_cast<int>(m.constants_.size())}))
            m.constants_.push_back({d.name, d.value});
    }
    for (auto& d : defs.stocks) {
        if (b.declare(d.name, {ElementKind::Stock, static_cast<int>(m.stocks_.size())})) {
            Model::Stock s;
            s.name = d.name;
            s.initial = std::move(d.initial);
            m.stocks_.push_back(std::move(s));
        }
    }
    for (auto& d : defs.auxes) {
        if (b.declare(d.name, {ElementKind::Aux, static_cast<int>(m.auxes_.size())}))
            m.auxes_.push_back({d.name, std::move(d.expr), std::move(d.units)});
    }
    for (auto& d : defs.flows) {
        if (b.declare(d.name, {ElementKind::Flow, static_cast<int>(m.flows_.size())}))
            m.flows_.push_back({d.name, std::move(d.expr), std::move(d.units)});
    }
    for (auto& d : defs.lookups) {
        if (d.points.empty()) {
            b.issue(d.name, "lookup '" + d.name + "' has no points");
        }
        for (std::size_t i = 0; i + 1 < d.points.size(); ++i) {
            if (!(d.points[i].first < d.points[i + 1].first)) {
                b.issue(d.name, "lookup '" + d.name + "' x values must be strictly increasing");
                break;
            }
        }
        if (b.declare(d.name, {ElementKind::Lookup, static_cast<int>(m.lookups_.size())})) {
            Model::LookupTable t;
            t.name = d.name;
            for (auto [x, y] : d.points) {
                t.xs.push_back(x);
                t.ys.push_back(y);
            }
            m.lookups_.push_back(std::move(t));
        }
    }
    for (auto& d : defs.delays) {
        if (!(d.lag_days >= 0.0) || !std::isfinite(d.lag_days)) {
            b.issue(d.name, "delay '" + d.name + "' lag must be >= 0");
        }
        if (b.declare(d.name, {ElementKind::Delay, static_cast<int>(m.delays_.size())}))
            m.delays_.push_back({d.name, std::move(d.input), d.lag_days});
    }

    // Resolve references now that the full name table exists.
    const std::size_t pre_resolution_issues = b.issues.size();
    for (auto& s : m.stocks_) b.resolve_expr(s.initial, s.name);
    for (auto& a : m.auxes_) b.resolve_expr(a.expr, a.name);
    for (auto& f : m.flows_) b.resolve_expr(f.expr, f.name);
    for (auto& d : m.delays_) b.resolve_expr(d.input, d.name);

    // Flow lists on stocks resolve to flow indices, kept sorted by name so
    // rate summation order is deterministic.
    for (std::size_t si = 0; si < m.stocks_.size(); ++si) {
        auto& stock = m.stocks_[si];
        auto& decl = defs.stocks[si];
        auto resolve_flows = [&](std::vector<std::string>& names, std::vector<int>& out) {
            std::sort(names.begin(), names.end());
            for (const auto& fname : names) {
                auto ref = m.find(fname);
                if (!ref || ref->kind != ElementKind::Flow) {
                    b.issue(stock.name, "stock '" + stock.name + "' references '" + fname +
                                            "', which is not a flow");
                } else {
                    out.push_back(ref->index);
                }
            }
        };
        resolve_flows(decl.inflows, stock.inflows);
        resolve_flows(decl.outflows, stock.outflows);
    }

    if (b.issues.size() == pre_resolution_issues && b.issues.empty()) {
        // Dependency analysis (only meaningful once every reference resolves).
        // Algebraic nodes: auxiliaries, flows and zero-lag delays. Positive-lag
        // delays and stocks break cycles at run time.
        std::vector<ElementRef> alg_nodes;
        std::unordered_map<long long, int> alg_id;
        auto key = [](ElementRef r) {
            return (static_cast<long long>(r.kind) << 32) | static_cast<unsigned>(r.index);
        };
        auto add_alg = [&](ElementRef r) {
            alg_id.emplace(key(r), static_cast<int>(alg_nodes.size()));
            alg_nodes.push_back(r);
        };
        for (std::size_t i = 0; i < m.auxes_.size(); ++i) add_alg({ElementKind::Aux, static_cast<int>(i)});
        for (std::size_t i = 0; i < m.flows_.size(); ++i) add_alg({ElementKind::Flow, static_cast<int>(i)});
        for (std::size_t i = 0; i < m.delays_.size(); ++i) {
            if (m.delays_[i].lag_days == 0.0) add_alg({ElementKind::Delay, static_cast<int>(i)});
        }

        auto expr_of = [&](ElementRef r) -> const Expr& {
            switch (r.kind) {
            case ElementKind::Aux: return m.auxes_[static_cast<std::size_t>(r.index)].expr;
            case ElementKind::Flow: return m.flows_[static_cast<std::size_t>(r.index)].expr;
            default: return m.delays_[static_cast<std::size_t>(r.index)].input;
            }
        };

        std::vector<std::vector<int>> alg_deps(alg_nodes.size());
        for (std::size_t i = 0; i < alg_nodes.size(); ++i) {
            std::vector<ElementRef> refs;
            ModelBuilder::collect_refs(expr_of(alg_nodes[i]), refs);
            for (ElementRef r : refs) {
                auto it = alg_id.find(key(r));
                if (it != alg_id.end()) alg_deps[i].push_back(it->second);
            }
        }
        std::vector<int> order, cycle;
        if (!topo_sort(alg_nodes.size(), alg_deps, order, cycle)) {
            b.issue(m.name_of(alg_nodes[static_cast<std::size_t>(cycle.front())]),
                    "algebraic dependency cycle: " + join_names(m, alg_nodes, cycle) +
                        " (cycles must pass through a stock or a positive-lag delay)");
        } else {
            for (int i : order) m.alg_order_.push_back(alg_nodes[static_cast<std::size_t>(i)]);
        }

        // Initialization graph: at t0, stock initials and delay seeds are
        // plain expressions, so every element participates.
        std::vector<ElementRef> init_nodes;
        std::unordered_map<long long, int> init_id;
        auto add_init = [&](ElementRef r) {
            init_id.emplace(key(r), static_cast<int>(init_nodes.size()));
            init_nodes.push_back(r);
        };
        for (std::size_t i = 0; i < m.constants_.size(); ++i) add_init({ElementKind::Constant, static_cast<int>(i)});
        for (std::size_t i = 0; i < m.stocks_.size(); ++i) add_init({ElementKind::Stock, static_cast<int>(i)});
        for (std::size_t i = 0; i < m.auxes_.size(); ++i) add_init({ElementKind::Aux, static_cast<int>(i)});
        for (std::size_t i = 0; i < m.flows_.size(); ++i) add_init({ElementKind::Flow, static_cast<int>(i)});
        for (std::size_t i = 0; i < m.delays_.size(); ++i) add_init({ElementKind::Delay, static_cast<int>(i)});

        auto init_expr_of = [&](ElementRef r) -> const Expr* {
            switch (r.kind) {
            case ElementKind::Stock: return &m.stocks_[static_cast<std::size_t>(r.index)].initial;
            case ElementKind::Aux: return &m.auxes_[static_cast<std::size_t>(r.index)].expr;
            case ElementKind::Flow: return &m.flows_[static_cast<std::size_t>(r.index)].expr;
            case ElementKind::Delay: return &m.delays_[static_cast<std::size_t>(r.index)].input;
            default: return nullptr;
            }
        };
        std::vector<std::vector<int>> init_deps(init_nodes.size());
        for (std::size_t i = 0; i < init_nodes.size(); ++i) {
            const Expr* e = init_expr_of(init_nodes[i]);
            if (!e) continue;
            std::vector<ElementRef> refs;
            ModelBuilder::collect_refs(*e, refs);
            for (ElementRef r : refs) {
                auto it = init_id.find(key(r));
                if (it != init_id.end()) init_deps[i].push_back(it->second);
            }
        }
        std::vector<int> init_order, init_cycle;
        if (!topo_sort(init_nodes.size(), init_deps, init_order, init_cycle)) {
            b.issue(m.name_of(init_nodes[static_cast<std::size_t>(init_cycle.front())]),
                    "initialization cycle at t0: " +
                        join_names(m, init_nodes, init_cycle));
        } else {
            for (int i : init_order) m.init_order_.push_back(init_nodes[static_cast<std::size_t>(i)]);
        }
    }

    if (!b.issues.empty()) return {std::nullopt, std::move(b.issues)};
    return {std::move(m), {}};
}

// ---------------------------------------------------------------------------
// InputOverlay
// ---------------------------------------------------------------------------

namespace {
long long alg_key(ElementKind kind, int index) {
    return (static_cast<long long>(kind) << 32) | static_cast<unsigned>(index);
}
} // namespace

void InputOverlay::add_set(int const_index, double t, double value) {
    const_mods_[const_index].sets.push_back({t, value});
}

void InputOverlay::add_addend(ElementKind kind, int index, Addend a) {
    if (kind == ElementKind::Constant) {
        const_mods_[index].addends.push_back(a);
    } else {
        alg_mods_[alg_key(kind, index)].addends.push_back(a);
    }
}

double InputOverlay::addend_sum(const Mods& mods, double t) {
    double sum = 0.0;
    for (const Addend& a : mods.addends) {
        if (t < a.start) continue;
        if (a.width >= 0.0) {
            if (t < a.start + a.width) sum += a.value;
        } else if (a.ramp > 0.0) {
            sum += a.value * std::min(1.0, (t - a.start) / a.ramp);
        } else {
            sum += a.value;
        }
    }
    return sum;
}

double InputOverlay::constant_value(int const_index, double base, double t) const {
    auto it = const_mods_.find(const_index);
    if (it == const_mods_.end()) return base;
    double v = base;
    double best_t = -std::numeric_limits<double>::infinity();
    for (const SetPoint& sp : it->second.sets) {
        if (sp.t <= t && sp.t >= best_t) {
            best_t = sp.t;
            v = sp.value;
        }
    }
    return v + addend_sum(it->second, t);
}

double InputOverlay::adjust(ElementKind kind, int index, double value, double t) const {
    auto it = alg_mods_.find(alg_key(kind, index));
    if (it == alg_mods_.end()) return value;
    return value + addend_sum(it->second, t);
}

// ---------------------------------------------------------------------------
// Expression evaluation
// ---------------------------------------------------------------------------

namespace {

template <class Resolver>
double eval_node(const Model& m, const Expr& e, int idx, double t,
                 const Resolver& resolve, const std::string& owner) {
    const ExprNode& n = e.at(idx);
    switch (n.op) {
    case ExprOp::Number:
        return n.number;
    case ExprOp::Var:
        return resolve(n.ref);
    case ExprOp::Time:
        return t;
    case ExprOp::Add:
        return eval_node(m, e, n.arg0, t, resolve, owner) +
               eval_node(m, e, n.arg1, t, resolve, owner);
    case ExprOp::Sub:
        return eval_node(m, e, n.arg0, t, resolve, owner) -
               eval_node(m, e, n.arg1, t, resolve, owner);
    case ExprOp::Mul:
        return eval_node(m, e, n.arg0, t, resolve, owner) *
               eval_node(m, e, n.arg1, t, resolve, owner);
    case ExprOp::Div: {
        const double num = eval_node(m, e, n.arg0, t, resolve, owner);
        const double den = eval_node(m, e, n.arg1, t, resolve, owner);
        if (den == 0.0) throw EvalError(owner, "division by zero");
        return num / den;
    }
    case ExprOp::Neg:
        return -eval_node(m, e, n.arg0, t, resolve, owner);
    case ExprOp::Min:
        return std::min(eval_node(m, e, n.arg0, t, resolve, owner),
                        eval_node(m, e, n.arg1, t, resolve, owner));
    case ExprOp::Max:
        return std::max(eval_node(m, e, n.arg0, t, resolve, owner),
                        eval_node(m, e, n.arg1, t, resolve, owner));
    case ExprOp::Clamp: {
        const double x = eval_node(m, e, n.arg0, t, resolve, owner);
        const double lo = eval_node(m, e, n.arg1, t, resolve, owner);
        const double hi = eval_node(m, e, n.arg2, t, resolve, owner);
        return std::min(std::max(x, lo), hi);
    }
    case ExprOp::Select: {
        const double c = eval_node(m, e, n.arg0, t, resolve, owner);
        const double a = eval_node(m, e, n.arg1, t, resolve, owner);
        const double bb = eval_node(m, e, n.arg2, t, resolve, owner);
        return c > 0.0 ? a : bb;
    }
    case ExprOp::Apply: {
        const double x = eval_node(m, e, n.arg0, t, resolve, owner);
        return m.lookups()[static_cast<std::size_t>(n.ref.index)].sample(x);
    }
    }
    throw std::logic_error("eval_node: unhandled op");
}

double checked(double v, const std::string& owner) {
    if (!std::isfinite(v)) throw EvalError(owner, "non-finite result");
    return v;
}

} // namespace

void eval_pass(const Model& model, double t, std::span<const double> stocks,
               const std::vector<DelayBuffer>* delay_bufs,
               const InputOverlay* overlay, EvalScratch& scratch) {
    const auto& consts = model.constants();
    scratch.constants.resize(consts.size());
    for (std::size_t i = 0; i < consts.size(); ++i) {
        double v = consts[i].value;
        if (overlay) v = overlay->constant_value(static_cast<int>(i), v, t);
        scratch.constants[i] = v;
    }
    scratch.auxes.resize(model.auxes().size());
    scratch.flows.resize(model.flows().size());
    scratch.delay_out.resize(model.delays().size());

    for (std::size_t i = 0; i < model.delays().size(); ++i) {
        if (model.delays()[i].lag_days > 0.0) {
            if (!delay_bufs) {
                throw std::logic_error("eval_pass: delay buffers required for '" +
                                       model.delays()[i].name + "'");
            }
            scratch.delay_out[i] = (*delay_bufs)[i].front();
        }
    }

    auto resolve = [&](const ElementRef& r) -> double {
        const auto i = static_cast<std::size_t>(r.index);
        switch (r.kind) {
        case ElementKind::Constant: return scratch.constants[i];
        case ElementKind::Stock: return stocks[i];
        case ElementKind::Aux: return scratch.auxes[i];
        case ElementKind::Flow: return scratch.flows[i];
        case ElementKind::Delay: return scratch.delay_out[i];
        default: throw std::logic_error("eval: unresolved reference");
        }
    };

    for (ElementRef ref : model.algebraic_order()) {
        const auto i = static_cast<std::size_t>(ref.index);
        switch (ref.kind) {
        case ElementKind::Aux: {
            const auto& a = model.auxes()[i];
            double v = eval_node(model, a.expr, a.expr.root, t, resolve, a.name);
            if (overlay) v = overlay->adjust(ElementKind::Aux, ref.index, v, t);
            scratch.auxes[i] = checked(v, a.name);
            break;
        }
        case ElementKind::Flow: {
            const auto& f = model.flows()[i];
            double v = eval_node(model, f.expr, f.expr.root, t, resolve, f.name);
            if (overlay) v = overlay->adjust(ElementKind::Flow, ref.index, v, t);
            scratch.flows[i] = checked(v, f.name);
            break;
        }
        case ElementKind::Delay: { // zero-lag: output equals live input
            const auto& d = model.delays()[i];
            scratch.delay_out[i] =
                checked(eval_node(model, d.input, d.input.root, t, resolve, d.name), d.name);
            break;
        }
        default:
            break;
        }
    }
}

void stock_rates(const Model& model, const EvalScratch& scratch,
                 std::span<double> rates_out) {
    const auto& stocks = model.stocks();
    for (std::size_t i = 0; i < stocks.size(); ++i) {
        double rate = 0.0;
        for (int f : stocks[i].inflows) rate += scratch.flows[static_cast<std::size_t>(f)];
        for (int f : stocks[i].outflows) rate -= scratch.flows[static_cast<std::size_t>(f)];
        rates_out[i] = checked(rate, stocks[i].name);
    }
}

double eval_delay_input(const Model& model, int delay_index, double t,
                        std::span<const double> stocks,
                        const EvalScratch& scratch) {
    auto resolve = [&](const ElementRef& r) -> double {
        const auto i = static_cast<std::size_t>(r.index);
        switch (r.kind) {
        case ElementKind::Constant: return scratch.constants[i];
        case ElementKind::Stock: return stocks[i];
        case ElementKind::Aux: return scratch.auxes[i];
        case ElementKind::Flow: return scratch.flows[i];
        case ElementKind::Delay: return scratch.delay_out[i];
        default: throw std::logic_error("eval: unresolved reference");
        }
    };
    const auto& d = model.delays()[static_cast<std::size_t>(delay_index)];
    return checked(eval_node(model, d.input, d.input.root, t, resolve, d.name), d.name);
}

std::map<std::string, double>
eval_rhs(const Model& model, const SimState& state,
         const std::map<std::string, double>& overrides,
         const InputOverlay* overlay) {
    double t = state.t;
    std::vector<double> stocks = state.stocks;
    for (const auto& [name, value] : overrides) {
        if (name == "t") {
            t = value;
            continue;
        }
        auto idx = model.stock_index(name);
        if (!idx) {
            throw std::invalid_argument("eval_rhs: unknown override '" + name + "'");
        }
        stocks[static_cast<std::size_t>(*idx)] = value;
    }

    EvalScratch scratch;
    eval_pass(model, t, stocks, &state.delay_bufs, overlay, scratch);
    std::vector<double> rates(model.stocks().size());
    stock_rates(model, scratch, rates);

    std::map<std::string, double> out;
    for (std::size_t i = 0; i < model.stocks().size(); ++i) {
        out[model.stocks()[i].name] = rates[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Initialization and delay reads
// ---------------------------------------------------------------------------

SimState init_state(const Model& model, const TimeGrid& grid,
                    const InputOverlay* overlay) {
    SimState st;
    st.t = grid.t0();
    st.dt = grid.dt_internal();
    st.stocks.assign(model.stocks().size(), 0.0);

    // Memoized values per element, filled in initialization order.
    std::vector<double> consts(model.constants().size());
    std::vector<double> auxes(model.auxes().size());
    std::vector<double> flows(model.flows().size());
    std::vector<double> delays(model.delays().size());

    auto resolve = [&](const ElementRef& r) -> double {
        const auto i = static_cast<std::size_t>(r.index);
        switch (r.kind) {
        case ElementKind::Constant: return consts[i];
        case ElementKind::Stock: return st.stocks[i];
        case ElementKind::Aux: return auxes[i];
        case ElementKind::Flow: return flows[i];
        case ElementKind::Delay: return delays[i];
        default: throw std::logic_error("init: unresolved reference");
        }
    };

    const double t0 = grid.t0();
    for (ElementRef ref : model.init_order()) {
        const auto i = static_cast<std::size_t>(ref.index);
        switch (ref.kind) {
        case ElementKind::Constant: {
            double v = model.constants()[i].value;
            if (overlay) v = overlay->constant_value(ref.index, v, t0);
            consts[i] = v;
            break;
        }
        case ElementKind::Stock: {
            const auto& s = model.stocks()[i];
            st.stocks[i] =
                checked(eval_node(model, s.initial, s.initial.root, t0, resolve, s.name), s.name);
            break;
        }
        case ElementKind::Aux: {
            const auto& a = model.auxes()[i];
            double v = eval_node(model, a.expr, a.expr.root, t0, resolve, a.name);
            if (overlay) v = overlay->adjust(ElementKind::Aux, ref.index, v, t0);
            auxes[i] = checked(v, a.name);
            break;
        }
        case ElementKind::Flow: {
            const auto& f = model.flows()[i];
            double v = eval_node(model, f.expr, f.expr.root, t0, resolve, f.name);
            if (overlay) v = overlay->adjust(ElementKind::Flow, ref.index, v, t0);
            flows[i] = checked(v, f.name);
            break;
        }
        case ElementKind::Delay: {
            const auto& d = model.delays()[i];
            delays[i] =
                checked(eval_node(model, d.input, d.input.root, t0, resolve, d.name), d.name);
            break;
        }
        default:
            break;
        }
    }

    st.delay_bufs.resize(model.delays().size());
    for (std::size_t i = 0; i < model.delays().size(); ++i) {
        const auto& d = model.delays()[i];
        if (d.lag_days == 0.0) continue;
        auto n = grid_multiple(d.lag_days, grid.dt_internal());
        if (!n || *n < 1) {
            throw std::invalid_argument("delay '" + d.name +
                                        "' lag is not a whole number of internal steps");
        }
        st.delay_bufs[i].ring.assign(static_cast<std::size_t>(*n), delays[i]);
        st.delay_bufs[i].head = 0;
    }
    return st;
}

double delay_read(const Model& model, std::string_view delay_name,
                  const SimState& state, const InputOverlay* overlay) {
    auto ref = model.find(delay_name);
    if (!ref || ref->kind != ElementKind::Delay) {
        throw std::invalid_argument("unknown delay: " + std::string(delay_name));
    }
    const auto i = static_cast<std::size_t>(ref->index);
    if (model.delays()[i].lag_days > 0.0) {
        return state.delay_bufs[i].front();
    }
    EvalScratch scratch;
    eval_pass(model, state.t, state.stocks, &state.delay_bufs, overlay, scratch);
    return scratch.delay_out[i];
}

} // namespace stockflow
