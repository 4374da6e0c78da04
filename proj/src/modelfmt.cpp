#include "stockflow/modelfmt.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

namespace stockflow {

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string Diagnostic::to_string() const {
    std::ostringstream os;
    os << span.file << ':' << span.line << ':' << span.column << ": "
       << (severity == Severity::Error ? "error: " : "warning: ") << message;
    return os.str();
}

// ---------------------------------------------------------------------------
// Lexer (shared by model and scenario files)
// ---------------------------------------------------------------------------

namespace {

enum class Tok {
    Ident, Number, String,
    LBrace, RBrace, LParen, RParen, LBracket, RBracket,
    Comma, Colon, Equals, Plus, Minus, Star, Slash,
    PlusEq, MinusEq,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    SourceSpan span;
};

class Lexer {
public:
    Lexer(std::string_view text, std::string_view filename,
          std::vector<Diagnostic>& diags)
        : text_(text), file_(filename), diags_(diags) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space_and_comments();
            if (pos_ >= text_.size()) break;
            const char c = text_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                out.push_back(ident());
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                out.push_back(number());
            } else if (c == '"') {
                out.push_back(string_lit());
            } else if (auto tok = punct()) {
                out.push_back(*tok);
            }
        }
        Token end;
        end.kind = Tok::End;
        end.span = here(0);
        out.push_back(end);
        return out;
    }

private:
    SourceSpan here(int len) const {
        return SourceSpan{std::string(file_), line_, col_, len};
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    Token ident() {
        Token t;
        t.kind = Tok::Ident;
        t.span = here(0);
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            advance();
        }
        t.text = std::string(text_.substr(start, pos_ - start));
        t.span.length = static_cast<int>(t.text.size());
        return t;
    }

    Token number() {
        Token t;
        t.kind = Tok::Number;
        t.span = here(0);
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            advance();
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                t.span.length = static_cast<int>(pos_ - start);
                error(t.span, "malformed number: digit expected after '.'");
                t.number = 0.0;
                t.text = std::string(text_.substr(start, pos_ - start));
                return t;
            }
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            advance();
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) advance();
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                t.span.length = static_cast<int>(pos_ - start);
                error(t.span, "malformed number: digit expected in exponent");
                t.number = 0.0;
                t.text = std::string(text_.substr(start, pos_ - start));
                return t;
            }
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        }
        t.text = std::string(text_.substr(start, pos_ - start));
        t.span.length = static_cast<int>(t.text.size());
        const char* b = t.text.data();
        auto [ptr, ec] = std::from_chars(b, b + t.text.size(), t.number);
        if (ec != std::errc{} || ptr != b + t.text.size()) {
            error(t.span, "malformed number '" + t.text + "'");
            t.number = 0.0;
        }
        return t;
    }

    Token string_lit() {
        Token t;
        t.kind = Tok::String;
        t.span = here(1);
        advance(); // opening quote
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') advance();
        t.text = std::string(text_.substr(start, pos_ - start));
        if (pos_ >= text_.size() || text_[pos_] != '"') {
            error(t.span, "unterminated string");
        } else {
            advance(); // closing quote
        }
        t.span.length = static_cast<int>(t.text.size()) + 2;
        return t;
    }

    std::optional<Token> punct() {
        Token t;
        t.span = here(1);
        const char c = text_[pos_];
        advance();
        t.text = std::string(1, c);
        switch (c) {
        case '{': t.kind = Tok::LBrace; break;
        case '}': t.kind = Tok::RBrace; break;
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case '[': t.kind = Tok::LBracket; break;
        case ']': t.kind = Tok::RBracket; break;
        case ',': t.kind = Tok::Comma; break;
        case ':': t.kind = Tok::Colon; break;
        case '=': t.kind = Tok::Equals; break;
        case '*': t.kind = Tok::Star; break;
        case '/': t.kind = Tok::Slash; break;
        case '+':
            if (pos_ < text_.size() && text_[pos_] == '=') {
                advance();
                t.kind = Tok::PlusEq;
                t.text = "+=";
                t.span.length = 2;
            } else {
                t.kind = Tok::Plus;
            }
            break;
        case '-':
            if (pos_ < text_.size() && text_[pos_] == '=') {
                advance();
                t.kind = Tok::MinusEq;
                t.text = "-=";
                t.span.length = 2;
            } else {
                t.kind = Tok::Minus;
            }
            break;
        default:
            error(t.span, std::string("unexpected character '") + c + "'");
            return std::nullopt;
        }
        return t;
    }

    void error(const SourceSpan& span, const std::string& msg) {
        diags_.push_back({Severity::Error, msg, span});
    }

    std::string_view text_;
    std::string_view file_;
    std::vector<Diagnostic>& diags_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

bool is_decl_keyword(const std::string& s) {
    return s == "stock" || s == "flow" || s == "aux" || s == "const" ||
           s == "lookup" || s == "delay";
}

bool is_reserved_word(const std::string& s) {
    return is_decl_keyword(s) || s == "by" || s == "in" || s == "out" ||
           s == "t" || s == "min" || s == "max" || s == "clamp" || s == "select";
}

constexpr int kMaxExprDepth = 256;

// ---------------------------------------------------------------------------
// Model parser
// ---------------------------------------------------------------------------

class ModelParser {
public:
    ModelParser(std::vector<Token> tokens, std::vector<Diagnostic>& diags)
        : toks_(std::move(tokens)), diags_(diags) {}

    void run(ModelDefs& defs,
             std::vector<std::pair<std::string, SourceSpan>>& spans) {
        while (!at(Tok::End)) {
            const std::size_t before = pos_;
            parse_decl(defs, spans);
            if (pos_ == before) skip(); // always make progress
        }
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    bool at(Tok k) const { return cur().kind == k; }
    void skip() { if (!at(Tok::End)) ++pos_; }

    bool accept(Tok k) {
        if (!at(k)) return false;
        ++pos_;
        return true;
    }

    void error_here(const std::string& msg) {
        diags_.push_back({Severity::Error, msg, cur().span});
    }

    // Panic-mode recovery: skip to the next declaration keyword.
    void recover() {
        skip();
        while (!at(Tok::End) && !(at(Tok::Ident) && is_decl_keyword(cur().text))) skip();
    }

    bool expect(Tok k, const std::string& what) {
        if (accept(k)) return true;
        error_here("expected " + what);
        return false;
    }

    std::optional<std::string> decl_name() {
        if (!at(Tok::Ident)) {
            error_here("expected a name");
            return std::nullopt;
        }
        if (is_reserved_word(cur().text)) {
            error_here("'" + cur().text + "' is a reserved word and cannot name an element");
            return std::nullopt;
        }
        std::string name = cur().text;
        ++pos_;
        return name;
    }

    std::optional<double> signed_number() {
        bool neg = accept(Tok::Minus);
        if (!at(Tok::Number)) {
            error_here("expected a number");
            return std::nullopt;
        }
        double v = cur().number;
        ++pos_;
        return neg ? -v : v;
    }

    void parse_decl(ModelDefs& defs,
                    std::vector<std::pair<std::string, SourceSpan>>& spans) {
        if (!at(Tok::Ident) || !is_decl_keyword(cur().text)) {
            error_here("expected a declaration (stock, flow, aux, const, lookup or delay)");
            recover();
            return;
        }
        const std::string kw = cur().text;
        const SourceSpan decl_span = cur().span;
        ++pos_;

        auto name = decl_name();
        if (!name || !expect(Tok::Equals, "'='")) {
            recover();
            return;
        }
        spans.emplace_back(*name, decl_span);

        if (kw == "const") {
            auto v = signed_number();
            if (!v) { recover(); return; }
            defs.constants.push_back({*name, *v});
        } else if (kw == "lookup") {
            LookupDecl d{*name, {}};
            if (!expect(Tok::LBracket, "'['")) { recover(); return; }
            while (true) {
                if (!expect(Tok::LParen, "'('")) { recover(); return; }
                auto x = signed_number();
                if (!x || !expect(Tok::Comma, "','")) { recover(); return; }
                auto y = signed_number();
                if (!y || !expect(Tok::RParen, "')'")) { recover(); return; }
                d.points.emplace_back(*x, *y);
                if (!accept(Tok::Comma)) break;
            }
            if (!expect(Tok::RBracket, "']'")) { recover(); return; }
            defs.lookups.push_back(std::move(d));
        } else if (kw == "delay") {
            Expr input;
            if (!parse_expr(input)) { recover(); return; }
            if (!at(Tok::Ident) || cur().text != "by") {
                error_here("expected 'by'");
                recover();
                return;
            }
            ++pos_;
            auto lag = signed_number();
            if (!lag) { recover(); return; }
            defs.delays.push_back({*name, std::move(input), *lag});
        } else if (kw == "stock") {
            StockDecl d;
            d.name = *name;
            if (!parse_expr(d.initial)) { recover(); return; }
            if (!expect(Tok::LBrace, "'{'")) { recover(); return; }
            if (at(Tok::Ident) && cur().text == "in") {
                ++pos_;
                if (!expect(Tok::Colon, "':' after 'in'")) { recover(); return; }
                if (!ident_list(d.inflows)) { recover(); return; }
            }
            if (at(Tok::Ident) && cur().text == "out") {
                ++pos_;
                if (!expect(Tok::Colon, "':' after 'out'")) { recover(); return; }
                if (!ident_list(d.outflows)) { recover(); return; }
            }
            if (!expect(Tok::RBrace, "'}'")) { recover(); return; }
            defs.stocks.push_back(std::move(d));
        } else { // flow | aux
            Expr e;
            if (!parse_expr(e)) { recover(); return; }
            if (kw == "flow") {
                defs.flows.push_back({*name, std::move(e), ""});
            } else {
                defs.auxes.push_back({*name, std::move(e), ""});
            }
        }
    }

    bool ident_list(std::vector<std::string>& out) {
        while (true) {
            auto n = decl_name();
            if (!n) return false;
            out.push_back(std::move(*n));
            if (!accept(Tok::Comma)) return true;
        }
    }

    // expr := term { (+|-) term } ; term := factor { (*|/) factor }
    // factor := - factor | primary
    bool parse_expr(Expr& out, int depth = 0) {
        if (depth > kMaxExprDepth) {
            error_here("expression nested too deeply");
            return false;
        }
        if (!parse_term(out, depth + 1)) return false;
        while (at(Tok::Plus) || at(Tok::Minus)) {
            const ExprOp op = at(Tok::Plus) ? ExprOp::Add : ExprOp::Sub;
            ++pos_;
            Expr rhs;
            if (!parse_term(rhs, depth + 1)) return false;
            out = expr_binary(op, std::move(out), std::move(rhs));
        }
        return true;
    }

    bool parse_term(Expr& out, int depth) {
        if (!parse_factor(out, depth + 1)) return false;
        while (at(Tok::Star) || at(Tok::Slash)) {
            const ExprOp op = at(Tok::Star) ? ExprOp::Mul : ExprOp::Div;
            ++pos_;
            Expr rhs;
            if (!parse_factor(rhs, depth + 1)) return false;
            out = expr_binary(op, std::move(out), std::move(rhs));
        }
        return true;
    }

    bool parse_factor(Expr& out, int depth) {
        if (depth > kMaxExprDepth) {
            error_here("expression nested too deeply");
            return false;
        }
        if (accept(Tok::Minus)) {
            Expr inner;
            if (!parse_factor(inner, depth + 1)) return false;
            out = expr_unary(ExprOp::Neg, std::move(inner));
            return true;
        }
        return parse_primary(out, depth);
    }

    bool parse_primary(Expr& out, int depth) {
        if (at(Tok::Number)) {
            out = expr_number(cur().number);
            ++pos_;
            return true;
        }
        if (accept(Tok::LParen)) {
            if (!parse_expr(out, depth + 1)) return false;
            return expect(Tok::RParen, "')'");
        }
        if (at(Tok::Ident)) {
            const std::string name = cur().text;
            if (name == "t") {
                ++pos_;
                out = expr_time();
                return true;
            }
            if (name == "min" || name == "max" || name == "clamp" || name == "select") {
                ++pos_;
                std::vector<Expr> args;
                if (!call_args(args, depth)) return false;
                const std::size_t want = (name == "min" || name == "max") ? 2 : 3;
                if (args.size() != want) {
                    error_here(name + "() takes " + std::to_string(want) + " arguments, got " +
                               std::to_string(args.size()));
                    return false;
                }
                const ExprOp op = name == "min"     ? ExprOp::Min
                                  : name == "max"   ? ExprOp::Max
                                  : name == "clamp" ? ExprOp::Clamp
                                                    : ExprOp::Select;
                if (want == 2) {
                    out = expr_binary(op, std::move(args[0]), std::move(args[1]));
                } else {
                    out = expr_ternary(op, std::move(args[0]), std::move(args[1]),
                                       std::move(args[2]));
                }
                return true;
            }
            if (is_reserved_word(name)) {
                error_here("'" + name + "' is a reserved word");
                return false;
            }
            ++pos_;
            if (accept(Tok::LParen)) { // lookup application
                Expr arg;
                if (!parse_expr(arg, depth + 1)) return false;
                if (!expect(Tok::RParen, "')'")) return false;
                out = expr_apply(name, std::move(arg));
                return true;
            }
            out = expr_var(name);
            return true;
        }
        error_here("expected an expression");
        return false;
    }

    bool call_args(std::vector<Expr>& args, int depth) {
        if (!expect(Tok::LParen, "'('")) return false;
        while (true) {
            Expr e;
            if (!parse_expr(e, depth + 1)) return false;
            args.push_back(std::move(e));
            if (!accept(Tok::Comma)) break;
        }
        return expect(Tok::RParen, "')'");
    }

    std::vector<Token> toks_;
    std::vector<Diagnostic>& diags_;
    std::size_t pos_ = 0;
};

} // namespace

ModelParse parse_model(std::string_view text, std::string_view filename) {
    ModelParse result;
    Lexer lexer(text, filename, result.diagnostics);
    auto tokens = lexer.run();

    ModelDefs defs;
    std::vector<std::pair<std::string, SourceSpan>> spans;
    ModelParser parser(std::move(tokens), result.diagnostics);
    parser.run(defs, spans);

    if (has_errors(result.diagnostics)) return result;

    BuildResult built = build_model(std::move(defs));
    if (!built.ok()) {
        for (const auto& issue : built.issues) {
            SourceSpan span{std::string(filename), 1, 1, 0};
            for (const auto& [name, s] : spans) {
                if (name == issue.element) {
                    span = s;
                    break;
                }
            }
            result.diagnostics.push_back({Severity::Error, issue.message, span});
        }
        return result;
    }
    result.model = std::move(built.model);
    return result;
}

// ---------------------------------------------------------------------------
// Serializer
// ---------------------------------------------------------------------------

namespace {

int op_prec(ExprOp op) {
    switch (op) {
    case ExprOp::Add:
    case ExprOp::Sub: return 1;
    case ExprOp::Mul:
    case ExprOp::Div: return 2;
    case ExprOp::Neg: return 3;
    default: return 4;
    }
}

void emit_expr(const Expr& e, int idx, int min_prec, std::string& out) {
    const ExprNode& n = e.at(idx);
    const int p = op_prec(n.op);
    const bool parens = p < min_prec;
    if (parens) out += '(';
    switch (n.op) {
    case ExprOp::Number:
        out += format_number(n.number);
        break;
    case ExprOp::Var:
        out += n.name;
        break;
    case ExprOp::Time:
        out += 't';
        break;
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div: {
        emit_expr(e, n.arg0, p, out);
        out += n.op == ExprOp::Add   ? " + "
               : n.op == ExprOp::Sub ? " - "
               : n.op == ExprOp::Mul ? " * "
                                     : " / ";
        emit_expr(e, n.arg1, p + 1, out);
        break;
    }
    case ExprOp::Neg:
        out += '-';
        emit_expr(e, n.arg0, p, out);
        break;
    case ExprOp::Min:
    case ExprOp::Max: {
        out += n.op == ExprOp::Min ? "min(" : "max(";
        emit_expr(e, n.arg0, 1, out);
        out += ", ";
        emit_expr(e, n.arg1, 1, out);
        out += ')';
        break;
    }
    case ExprOp::Clamp:
    case ExprOp::Select: {
        out += n.op == ExprOp::Clamp ? "clamp(" : "select(";
        emit_expr(e, n.arg0, 1, out);
        out += ", ";
        emit_expr(e, n.arg1, 1, out);
        out += ", ";
        emit_expr(e, n.arg2, 1, out);
        out += ')';
        break;
    }
    case ExprOp::Apply:
        out += n.name;
        out += '(';
        emit_expr(e, n.arg0, 1, out);
        out += ')';
        break;
    }
    if (parens) out += ')';
}

std::string expr_text(const Expr& e) {
    std::string out;
    emit_expr(e, e.root, 1, out);
    return out;
}

} // namespace

std::string serialize_model(const Model& model) {
    std::string out;
    for (const auto& a : model.auxes()) {
        out += "aux " + a.name + " = " + expr_text(a.expr) + "\n";
    }
    for (const auto& c : model.constants()) {
        out += "const " + c.name + " = " + format_number(c.value) + "\n";
    }
    for (const auto& d : model.delays()) {
        out += "delay " + d.name + " = " + expr_text(d.input) + " by " +
               format_number(d.lag_days) + "\n";
    }
    for (const auto& f : model.flows()) {
        out += "flow " + f.name + " = " + expr_text(f.expr) + "\n";
    }
    for (const auto& l : model.lookups()) {
        out += "lookup " + l.name + " = [";
        for (std::size_t i = 0; i < l.xs.size(); ++i) {
            if (i) out += ", ";
            out += "(" + format_number(l.xs[i]) + ", " + format_number(l.ys[i]) + ")";
        }
        out += "]\n";
    }
    for (const auto& s : model.stocks()) {
        out += "stock " + s.name + " = " + expr_text(s.initial) + " {";
        if (!s.inflows.empty()) {
            out += "in: ";
            for (std::size_t i = 0; i < s.inflows.size(); ++i) {
                if (i) out += ", ";
                out += model.flows()[static_cast<std::size_t>(s.inflows[i])].name;
            }
            if (!s.outflows.empty()) out += ' ';
        }
        if (!s.outflows.empty()) {
            out += "out: ";
            for (std::size_t i = 0; i < s.outflows.size(); ++i) {
                if (i) out += ", ";
                out += model.flows()[static_cast<std::size_t>(s.outflows[i])].name;
            }
        }
        out += "}\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario parser
// ---------------------------------------------------------------------------

namespace {

class ScenarioParser {
public:
    ScenarioParser(std::vector<Token> tokens, std::vector<Diagnostic>& diags)
        : toks_(std::move(tokens)), diags_(diags) {}

    void run(ScenarioDoc& doc) {
        while (!at(Tok::End)) {
            const std::size_t before = pos_;
            parse_item(doc);
            if (pos_ == before) skip();
        }
        std::stable_sort(doc.events.begin(), doc.events.end(),
                         [](const ScenarioEvent& a, const ScenarioEvent& b) {
                             return a.at < b.at;
                         });
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    bool at(Tok k) const { return cur().kind == k; }
    void skip() { if (!at(Tok::End)) ++pos_; }

    bool accept(Tok k) {
        if (!at(k)) return false;
        ++pos_;
        return true;
    }

    void error_here(const std::string& msg) {
        diags_.push_back({Severity::Error, msg, cur().span});
    }

    bool at_keyword() const {
        return at(Tok::Ident) &&
               (cur().text == "model" || cur().text == "grid" || cur().text == "at");
    }

    void recover() {
        skip();
        while (!at(Tok::End) && !at_keyword()) skip();
    }

    std::optional<double> signed_number() {
        bool neg = accept(Tok::Minus);
        if (!at(Tok::Number)) {
            error_here("expected a number");
            return std::nullopt;
        }
        double v = cur().number;
        ++pos_;
        return neg ? -v : v;
    }

    void parse_item(ScenarioDoc& doc) {
        if (!at(Tok::Ident)) {
            error_here("expected 'model', 'grid' or 'at'");
            recover();
            return;
        }
        const std::string kw = cur().text;
        if (kw == "model") {
            ++pos_;
            if (!at(Tok::String)) {
                error_here("expected a quoted model path");
                recover();
                return;
            }
            if (doc.model_ref) error_here("duplicate 'model' line");
            doc.model_ref = cur().text;
            ++pos_;
        } else if (kw == "grid") {
            ++pos_;
            bool any = false;
            while (at(Tok::Ident) &&
                   (cur().text == "t0" || cur().text == "horizon" || cur().text == "dt" ||
                    cur().text == "resolution")) {
                const std::string field = cur().text;
                ++pos_;
                auto v = signed_number();
                if (!v) { recover(); return; }
                any = true;
                if (field == "t0") doc.grid.t0 = *v;
                else if (field == "horizon") doc.grid.horizon = *v;
                else if (field == "dt") doc.grid.dt_internal = *v;
                else doc.grid.dt_data = *v;
            }
            if (!any) {
                error_here("expected grid fields (t0, horizon, dt, resolution)");
                recover();
            }
        } else if (kw == "at") {
            const SourceSpan at_span = cur().span;
            ++pos_;
            auto when = signed_number();
            if (!when) { recover(); return; }
            parse_action(doc, *when, at_span);
        } else {
            error_here("expected 'model', 'grid' or 'at'");
            recover();
        }
    }

    void parse_action(ScenarioDoc& doc, double when, const SourceSpan& span) {
        if (!at(Tok::Ident)) {
            error_here("expected an action (set, switch, step or pulse)");
            recover();
            return;
        }
        const std::string verb = cur().text;
        ++pos_;

        ScenarioEvent ev;
        ev.at = when;
        ev.span = span;

        if (!at(Tok::Ident)) {
            error_here("expected a target name");
            recover();
            return;
        }
        ev.target = cur().text;
        ++pos_;

        if (verb == "set" || verb == "switch") {
            ev.kind = verb == "set" ? EventKind::SetConstant : EventKind::SwitchDecision;
            if (!accept(Tok::Equals)) {
                error_here("expected '='");
                recover();
                return;
            }
            auto v = signed_number();
            if (!v) { recover(); return; }
            ev.value = *v;
            if (ev.kind == EventKind::SwitchDecision && *v != 0.0 && *v != 1.0) {
                error_here("switch value must be 0 or 1");
                return;
            }
        } else if (verb == "step" || verb == "pulse") {
            ev.kind = verb == "step" ? EventKind::StepInput : EventKind::PulseInput;
            double sign = 1.0;
            if (accept(Tok::MinusEq)) {
                sign = -1.0;
            } else if (!accept(Tok::PlusEq)) {
                error_here("expected '+=' or '-='");
                recover();
                return;
            }
            auto v = signed_number();
            if (!v) { recover(); return; }
            ev.value = sign * *v;
            if (ev.kind == EventKind::PulseInput) {
                if (!at(Tok::Ident) || cur().text != "for") {
                    error_here("expected 'for <duration>' after a pulse");
                    recover();
                    return;
                }
                ++pos_;
                auto d = signed_number();
                if (!d) { recover(); return; }
                if (!(*d > 0.0)) {
                    error_here("pulse duration must be > 0");
                    return;
                }
                ev.duration = *d;
            } else if (at(Tok::Ident) && cur().text == "over") {
                ++pos_;
                auto d = signed_number();
                if (!d) { recover(); return; }
                if (*d < 0.0) {
                    error_here("ramp length must be >= 0");
                    return;
                }
                ev.duration = *d;
            }
        } else {
            error_here("unknown action '" + verb + "' (expected set, switch, step or pulse)");
            recover();
            return;
        }
        doc.events.push_back(std::move(ev));
    }

    std::vector<Token> toks_;
    std::vector<Diagnostic>& diags_;
    std::size_t pos_ = 0;
};

} // namespace

ScenarioParse parse_scenario(std::string_view text, std::string_view filename) {
    ScenarioParse result;
    Lexer lexer(text, filename, result.diagnostics);
    auto tokens = lexer.run();

    ScenarioDoc doc;
    ScenarioParser parser(std::move(tokens), result.diagnostics);
    parser.run(doc);

    if (has_errors(result.diagnostics)) return result;
    result.doc = std::move(doc);
    return result;
}

OverlayResult compile_overlay(const Model& model, const ScenarioDoc& doc,
                              const TimeGrid& grid) {
    OverlayResult result;
    InputOverlay overlay;
    auto& errors = result.errors;

    for (const ScenarioEvent& ev : doc.events) {
        const std::string where = "event at t=" + format_number(ev.at);
        if (ev.at < grid.t0() || ev.at > grid.t_end()) {
            errors.push_back(where + ": outside the run window [" +
                             format_number(grid.t0()) + ", " + format_number(grid.t_end()) + "]");
            continue;
        }
        if (!grid_multiple(ev.at - grid.t0(), grid.dt_internal())) {
            errors.push_back(where + ": not aligned to the dt=" +
                             format_number(grid.dt_internal()) + " grid");
            continue;
        }
        auto ref = model.find(ev.target);
        if (!ref) {
            errors.push_back(where + ": unknown target '" + ev.target + "'");
            continue;
        }
        switch (ev.kind) {
        case EventKind::SetConstant:
        case EventKind::SwitchDecision:
            if (ref->kind != ElementKind::Constant) {
                errors.push_back(where + ": '" + ev.target + "' is not a constant");
                continue;
            }
            overlay.add_set(ref->index, ev.at, ev.value);
            break;
        case EventKind::StepInput:
        case EventKind::PulseInput: {
            if (ref->kind != ElementKind::Constant && ref->kind != ElementKind::Aux &&
                ref->kind != ElementKind::Flow) {
                errors.push_back(where + ": '" + ev.target +
                                 "' cannot take step/pulse input (not a constant, aux or flow)");
                continue;
            }
            InputOverlay::Addend a;
            a.start = ev.at;
            a.value = ev.value;
            if (ev.kind == EventKind::PulseInput) {
                a.width = ev.duration.value_or(0.0);
            } else {
                a.ramp = ev.duration.value_or(0.0);
                a.width = -1.0;
            }
            overlay.add_addend(ref->kind, ref->index, a);
            break;
        }
        }
    }

    if (!errors.empty()) return result;
    result.overlay = std::move(overlay);
    return result;
}

} // namespace stockflow
