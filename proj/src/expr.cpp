#include "stockflow/expr.hpp"

namespace stockflow {

Expr expr_number(double value) {
    Expr e;
    ExprNode n;
    n.op = ExprOp::Number;
    n.number = value;
    e.root = e.add_node(std::move(n));
    return e;
}

Expr expr_var(std::string name) {
    Expr e;
    ExprNode n;
    n.op = ExprOp::Var;
    n.name = std::move(name);
    e.root = e.add_node(std::move(n));
    return e;
}

Expr expr_time() {
    Expr e;
    ExprNode n;
    n.op = ExprOp::Time;
    e.root = e.add_node(std::move(n));
    return e;
}

Expr expr_unary(ExprOp op, Expr a) {
    Expr e = std::move(a);
    ExprNode n;
    n.op = op;
    n.arg0 = e.root;
    e.root = e.add_node(std::move(n));
    return e;
}

Expr expr_binary(ExprOp op, Expr a, Expr b) {
    Expr e = std::move(a);
    const int rb = e.absorb(b);
    ExprNode n;
    n.op = op;
    n.arg0 = e.root;
    n.arg1 = rb;
    e.root = e.add_node(std::move(n));
    return e;
}

Expr expr_ternary(ExprOp op, Expr a, Expr b, Expr c) {
    Expr e = std::move(a);
    const int rb = e.absorb(b);
    const int rc = e.absorb(c);
    ExprNode n;
    n.op = op;
    n.arg0 = e.root;
    n.arg1 = rb;
    n.arg2 = rc;
    e.root = e.add_node(std::move(n));
    return e;
}

Expr expr_apply(std::string table, Expr arg) {
    Expr e = std::move(arg);
    ExprNode n;
    n.op = ExprOp::Apply;
    n.name = std::move(table);
    n.arg0 = e.root;
    e.root = e.add_node(std::move(n));
    return e;
}

namespace {

bool node_equal(const Expr& a, int ia, const Expr& b, int ib) {
    if (ia < 0 || ib < 0) return ia == ib;
    const ExprNode& na = a.at(ia);
    const ExprNode& nb = b.at(ib);
    if (na.op != nb.op) return false;
    switch (na.op) {
    case ExprOp::Number:
        return na.number == nb.number;
    case ExprOp::Var:
        return na.name == nb.name;
    case ExprOp::Time:
        return true;
    case ExprOp::Apply:
        if (na.name != nb.name) return false;
        break;
    default:
        break;
    }
    return node_equal(a, na.arg0, b, nb.arg0) &&
           node_equal(a, na.arg1, b, nb.arg1) &&
           node_equal(a, na.arg2, b, nb.arg2);
}

} // namespace

bool expr_equal(const Expr& a, const Expr& b) {
    if (a.empty() || b.empty()) return a.empty() == b.empty();
    return node_equal(a, a.root, b, b.root);
}

} // namespace stockflow
