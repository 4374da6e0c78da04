#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stockflow/model.hpp"
#include "stockflow/numfmt.hpp"

namespace stockflow {

struct SourceSpan {
    std::string file;
    int line = 1;
    int column = 1;
    int length = 0;
};

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string message;
    SourceSpan span;

    [[nodiscard]] std::string to_string() const;
};

[[nodiscard]] inline bool has_errors(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags) {
        if (d.severity == Severity::Error) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Model files (.sfm)
//
//   model      := { decl }
//   decl       := stockDecl | flowDecl | auxDecl | constDecl
//               | lookupDecl | delayDecl
//   stockDecl  := "stock" IDENT "=" expr "{" ["in:" identList]
//                 ["out:" identList] "}"
//   flowDecl   := "flow" IDENT "=" expr
//   auxDecl    := "aux" IDENT "=" expr
//   constDecl  := "const" IDENT "=" NUMBER
//   delayDecl  := "delay" IDENT "=" expr "by" NUMBER
//   lookupDecl := "lookup" IDENT "=" "[" pair { "," pair } "]"
//   pair       := "(" NUMBER "," NUMBER ")"
//
// Expressions: + - * / with the usual precedence, unary minus, parentheses,
// min(a,b), max(a,b), clamp(x,lo,hi), select(c,a,b) (a if c > 0, else b),
// lookup application `name(arg)`, and the reserved time variable `t`.
// Comments run from '#' to end of line. Identifiers are
// [A-Za-z_][A-Za-z0-9_]*; numbers are decimal with an optional exponent.
// ---------------------------------------------------------------------------

struct ModelParse {
    std::optional<Model> model;
    std::vector<Diagnostic> diagnostics;
    [[nodiscard]] bool ok() const { return model.has_value(); }
};

/// Parses model text. Never throws: every malformed input yields at least
/// one diagnostic with a span. Semantic problems found by build_model are
/// reported with the span of the offending declaration.
ModelParse parse_model(std::string_view text,
                       std::string_view filename = "<input>");

/// Canonical text form: declarations sorted by (category, name), one per
/// line, numbers in shortest round-trip decimal form. Two structurally
/// equal models serialize identically, and parse(serialize(parse(s)))
/// equals parse(s).
std::string serialize_model(const Model& model);

// ---------------------------------------------------------------------------
// Scenario files (.sfs)
//
//   scenario  := { item }
//   item      := "model" STRING
//              | "grid" { ("t0"|"horizon"|"dt"|"resolution") NUMBER }
//              | "at" NUMBER action
//   action    := "set" IDENT "=" NUM            (replace a constant)
//              | "switch" IDENT "=" NUM         (decision constant, 0 or 1)
//              | "step" IDENT ("+="|"-=") NUM ["over" NUM]
//              | "pulse" IDENT ("+="|"-=") NUM "for" NUM
//
// `step` adds to the target from the event time onward ("over" ramps the
// addition in linearly); `pulse` adds only during [at, at+for). Step and
// pulse may target constants, auxiliaries or flows; set/switch only
// constants. Event times must land on the simulation grid — checked when
// the scenario is applied to a run, as is target-name resolution.
// ---------------------------------------------------------------------------

enum class EventKind { SetConstant, StepInput, PulseInput, SwitchDecision };

struct ScenarioEvent {
    double at = 0.0;
    EventKind kind = EventKind::SetConstant;
    std::string target;
    double value = 0.0;
    std::optional<double> duration; // step: ramp length; pulse: width
    SourceSpan span;
};

struct GridOverrides {
    std::optional<double> t0;
    std::optional<double> horizon;
    std::optional<double> dt_internal;
    std::optional<double> dt_data;
};

struct ScenarioDoc {
    std::optional<std::string> model_ref;
    GridOverrides grid;
    std::vector<ScenarioEvent> events; // sorted by time after parse
};

struct ScenarioParse {
    std::optional<ScenarioDoc> doc;
    std::vector<Diagnostic> diagnostics;
    [[nodiscard]] bool ok() const { return doc.has_value(); }
};

ScenarioParse parse_scenario(std::string_view text,
                             std::string_view filename = "<input>");

/// Compiles scenario events against a model and grid into an evaluation
/// overlay. Reports unknown targets, misaligned or out-of-window event
/// times, and kind/target category mismatches.
struct OverlayResult {
    std::optional<InputOverlay> overlay;
    std::vector<std::string> errors;
    [[nodiscard]] bool ok() const { return overlay.has_value(); }
};

OverlayResult compile_overlay(const Model& model, const ScenarioDoc& doc,
                              const TimeGrid& grid);

} // namespace stockflow
