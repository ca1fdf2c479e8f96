#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flowplan {

/// One typed parameter slot of an agent signature. `data_type` and `mappable`
/// exist in the interchange format but are fixed to null/false here; the
/// serializer emits them and the parser rejects anything else.
struct VariableSpec {
    std::string name;  // v__<k>
    bool slot_fillable = false;

    friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

struct AgentSignature {
    std::vector<VariableSpec> inputs;   // nonempty, no duplicate names
    std::vector<VariableSpec> outputs;  // nonempty, no duplicate names

    friend bool operator==(const AgentSignature&, const AgentSignature&) = default;
};

struct Agent {
    std::string id;  // a__<k>
    AgentSignature signature;

    friend bool operator==(const Agent&, const Agent&) = default;
};

/// The intermediate representation of one workflow problem. `mappings` is
/// always empty and `available_data` values are always null, so neither is
/// stored; both appear in the serialized form.
struct WorkflowProblem {
    std::vector<Agent> available_agents;
    std::vector<std::string> goal_agent_ids;     // 1 or 2 distinct ids
    std::vector<std::string> available_data;     // names used by no signature

    const Agent* find_agent(const std::string& id) const;

    friend bool operator==(const WorkflowProblem&, const WorkflowProblem&) = default;
};

/// One cell of the generator grid.
struct GridPoint {
    int num_actions = 2;
    int arity = 1;
    double coupling = 0.0;
    double slot_fillable_proportion = 1.0;
    int num_mappings = 0;
    int num_goals = 1;

    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Value lists spanned by one generation batch, plus the sampling knobs.
/// Defaults reproduce the standard 288-point grid.
struct GeneratorConfig {
    std::vector<int> num_actions{2, 3, 4, 5};
    std::vector<int> arity{1, 2, 3};
    std::vector<double> coupling{0.0, 0.375, 0.626, 1.0};
    std::vector<double> slot_fillable_proportion{0.375, 0.626, 1.0};
    std::vector<int> num_mappings{0};
    std::vector<int> num_goals{1, 2};
    int num_variables = 30;
    std::uint64_t master_seed = 20250429;
    int samples_per_point = 10;
};

/// Planner-derived ground truth for one problem.
struct Feasibility {
    enum class State { Unknown, Feasible, Infeasible };
    State state = State::Unknown;
    std::int64_t optimal_cost = 0;  // meaningful only when Feasible
    int optimal_length = 0;         // meaningful only when Feasible

    static Feasibility unknown() { return {}; }
    static Feasibility feasible(std::int64_t cost, int length) {
        return {State::Feasible, cost, length};
    }
    static Feasibility infeasible() { return {State::Infeasible, 0, 0}; }

    friend bool operator==(const Feasibility&, const Feasibility&) = default;
};

struct ProblemRecord {
    std::string hash;  // content_hash(problem)
    GridPoint point;
    WorkflowProblem problem;
    Feasibility feasibility;
};

/// Checks every structural invariant; returns the name of the first violated
/// one, or nullopt when the problem is well formed.
std::optional<std::string> violated_invariant(const WorkflowProblem& problem);

/// Throws ValidationError when the problem violates an invariant.
void validate(const WorkflowProblem& problem);

/// Canonical byte form: the interchange JSON with lexicographic key order,
/// no insignificant whitespace, UTF-8. Identical problems yield identical
/// bytes. Throws ValidationError naming the violated invariant.
std::string canonical_serialize(const WorkflowProblem& problem);

/// Inverse of canonical_serialize; accepts any JSON layout of the same
/// schema. Unknown keys are rejected. Throws ParseError (with byte offset on
/// malformed JSON) or ValidationError.
WorkflowProblem parse_problem(std::string_view bytes);

/// SHA-256 of canonical_serialize(problem), 64 lowercase hex chars.
std::string content_hash(const WorkflowProblem& problem);

/// True when `name` matches the given prefix followed by digits, e.g.
/// id_matches("v__12", "v") and id_matches("a__0", "a").
bool id_matches(const std::string& name, const std::string& prefix);

/// Numeric suffix of a v__<k>/a__<k> identifier; throws ValidationError on
/// any other shape.
int id_index(const std::string& name);

}  // namespace flowplan
