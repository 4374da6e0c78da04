#pragma once

#include <string>
#include <utility>
#include <vector>

namespace stockflow {

enum class ElementKind { None, Constant, Stock, Aux, Flow, Delay, Lookup };

/// Resolved reference into a Model's element tables. Filled in by
/// build_model; parse-time expressions carry only names.
struct ElementRef {
    ElementKind kind = ElementKind::None;
    int index = -1;

    [[nodiscard]] bool valid() const { return kind != ElementKind::None; }
    friend bool operator==(const ElementRef&, const ElementRef&) = default;
};

enum class ExprOp {
    Number, // literal
    Var,    // reference to a named element
    Time,   // simulation time t
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Min,    // min(a, b)
    Max,    // max(a, b)
    Clamp,  // clamp(x, lo, hi)
    Select, // select(c, a, b): a if c > 0, else b
    Apply,  // lookup-table application: table(arg)
};

struct ExprNode {
    ExprOp op = ExprOp::Number;
    double number = 0.0;
    std::string name;          // Var / Apply target
    int arg0 = -1, arg1 = -1, arg2 = -1;
    ElementRef ref;            // resolved by build_model
};

/// Expression tree stored as a flat arena; `root` indexes the top node.
/// Value-semantic and immutable once a Model owns it.
struct Expr {
    std::vector<ExprNode> nodes;
    int root = -1;

    [[nodiscard]] bool empty() const { return root < 0; }
    [[nodiscard]] const ExprNode& at(int i) const { return nodes[static_cast<std::size_t>(i)]; }

    int add_node(ExprNode n) {
        nodes.push_back(std::move(n));
        return static_cast<int>(nodes.size()) - 1;
    }

    /// Appends another tree's nodes, returning the re-based root index.
    int absorb(const Expr& other) {
        const int offset = static_cast<int>(nodes.size());
        for (ExprNode n : other.nodes) {
            if (n.arg0 >= 0) n.arg0 += offset;
            if (n.arg1 >= 0) n.arg1 += offset;
            if (n.arg2 >= 0) n.arg2 += offset;
            nodes.push_back(std::move(n));
        }
        return other.root + offset;
    }
};

// Small combinators used by programmatic model builders.
Expr expr_number(double value);
Expr expr_var(std::string name);
Expr expr_time();
Expr expr_unary(ExprOp op, Expr a);
Expr expr_binary(ExprOp op, Expr a, Expr b);
Expr expr_ternary(ExprOp op, Expr a, Expr b, Expr c);
Expr expr_apply(std::string table, Expr arg);

inline Expr operator+(Expr a, Expr b) { return expr_binary(ExprOp::Add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return expr_binary(ExprOp::Sub, std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return expr_binary(ExprOp::Mul, std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return expr_binary(ExprOp::Div, std::move(a), std::move(b)); }

/// Structural equality (same shape, ops, names, and literals).
bool expr_equal(const Expr& a, const Expr& b);

} // namespace stockflow
