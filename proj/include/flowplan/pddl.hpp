#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "flowplan/error.hpp"
#include "flowplan/model.hpp"

namespace flowplan::pddl {

/// The emitted text uses a feature outside the compiled fragment.
class UnsupportedFeature : public ParseError {
public:
    UnsupportedFeature(const std::string& what, std::size_t line, std::size_t column)
        : ParseError(what + " at " + std::to_string(line) + ":" + std::to_string(column)),
          line_(line),
          column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Which goal set a compiled problem asserts.
struct CompilationMode {
    enum class Kind { Optimality, Soundness, Validity };
    Kind kind = Kind::Optimality;
    std::set<std::string> plan_actions;  // empty iff Optimality

    static CompilationMode optimality() { return {Kind::Optimality, {}}; }
    static CompilationMode soundness(std::set<std::string> actions) {
        return {Kind::Soundness, std::move(actions)};
    }
    static CompilationMode validity(std::set<std::string> actions) {
        return {Kind::Validity, std::move(actions)};
    }
};

const char* mode_suffix(CompilationMode::Kind kind);  // "_optimal", "_sound", "_valid"

// ---- Structured documents (what the fragment parser produces and the
// ---- canonical printer consumes) ----

struct Atom {
    std::string name;
    std::vector<std::string> args;  // constants or ?parameters
    friend bool operator==(const Atom&, const Atom&) = default;
};

struct Literal {
    bool negated = false;
    Atom atom;
    friend bool operator==(const Literal&, const Literal&) = default;
};

/// (increase <fluent> <amount>) where amount is an integer or a fluent.
struct Increase {
    Atom fluent;
    std::variant<std::int64_t, Atom> amount;
    friend bool operator==(const Increase&, const Increase&) = default;
};

using EffectPart = std::variant<Literal, Increase>;

struct TypedNames {
    std::vector<std::string> names;
    std::string type;
    friend bool operator==(const TypedNames&, const TypedNames&) = default;
};

struct Action {
    std::string name;
    std::vector<TypedNames> parameters;
    std::vector<Literal> precondition;  // conjunction
    std::vector<EffectPart> effect;     // conjunction, order preserved
    friend bool operator==(const Action&, const Action&) = default;
};

struct Domain {
    std::string name;
    std::vector<std::string> requirements;
    std::vector<TypedNames> types;
    std::vector<TypedNames> constants;
    std::vector<Atom> predicates;  // declaration atoms: name + "?x - type" arg runs
    std::vector<Atom> functions;
    std::vector<Action> actions;
    friend bool operator==(const Domain&, const Domain&) = default;
};

/// (= (fluent args) value) in an :init block.
struct FluentAssign {
    Atom fluent;
    std::int64_t value = 0;
    friend bool operator==(const FluentAssign&, const FluentAssign&) = default;
};

using InitEntry = std::variant<Literal, FluentAssign>;

struct Problem {
    std::string name;
    std::string domain;
    std::vector<InitEntry> init;
    std::vector<Literal> goal;  // conjunction, possibly empty
    bool minimize_total_cost = false;
    friend bool operator==(const Problem&, const Problem&) = default;
};

using Fragment = std::variant<Domain, Problem, Action>;

// ---- Compilation ----

/// Domain document for `problem`: one action per agent plus the generic ask
/// action; constants cover every variable and agent.
Domain build_domain(const WorkflowProblem& problem);
std::string compile_domain(const WorkflowProblem& problem);

/// Problem document: slot_goodness 1000000/150000 init, not_slotfillable for
/// non-slot-fillable variables, self-mappings, new_item marks, known facts
/// for available data, zero total-cost, and the mode's goal conjunction.
/// Throws CompileError when a plan action id names no agent.
Problem build_problem(const WorkflowProblem& problem, const CompilationMode& mode);
std::string compile_problem(const WorkflowProblem& problem, const CompilationMode& mode);

// ---- Canonical printer and fragment parser ----

std::string print_domain(const Domain& domain);
std::string print_problem(const Problem& problem);
std::string print_action(const Action& action);
std::string print_fragment(const Fragment& fragment);

/// Parses a domain, problem, or single action. Re-emitting the result with
/// the canonical printer reproduces canonical input byte for byte. Tokens
/// outside the compiled fragment raise UnsupportedFeature with a location.
Fragment parse_fragment(std::string_view text);

/// Token sequences of two texts are equal (whitespace-insensitive compare).
bool same_tokens(std::string_view a, std::string_view b);

}  // namespace flowplan::pddl
