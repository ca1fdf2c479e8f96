#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowplan/model.hpp"

namespace flowplan {

inline constexpr std::int64_t kAskCost = 1000000;
inline constexpr std::int64_t kInvokeCost = 10;
inline constexpr std::uint64_t kDefaultNodeCap = 10000000;

/// Predicate part of a search/simulation state. Everything not listed is
/// false (closed world); the accumulated cost lives on the search node.
struct WorldState {
    std::set<std::string> known;  // variable names with known values
    std::set<std::string> done;   // executed agent ids

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

/// One ground plan step: ask for a variable or invoke an agent.
struct PlanStep {
    enum class Kind { Ask, Invoke };
    Kind kind = Kind::Ask;
    std::string name;  // variable name for Ask, agent id for Invoke

    static PlanStep ask(std::string variable) { return {Kind::Ask, std::move(variable)}; }
    static PlanStep invoke(std::string agent) { return {Kind::Invoke, std::move(agent)}; }

    friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

struct PlanResult {
    enum class Status { Solved, Unsolvable };
    Status status = Status::Unsolvable;
    std::vector<PlanStep> steps;  // empty when Unsolvable
    std::int64_t cost = 0;
    int length = 0;

    bool solved() const { return status == Status::Solved; }
};

/// Why a step could not be applied.
enum class StepFailure {
    UnknownInput,    // invoked agent has an input outside `known`
    RepeatedAction,  // agent already done, or variable already known
    IllegalAsk,      // asked variable is not slot-fillable
    UnknownName,     // step names no variable/agent of the problem
};

const char* step_failure_name(StepFailure failure);

struct SimulationResult {
    bool ok = false;
    WorldState final_state;
    std::vector<std::int64_t> step_costs;  // one entry per executed step
    // Populated when !ok:
    std::size_t failure_index = 0;
    StepFailure failure = StepFailure::UnknownInput;
    std::string failure_detail;  // the violated precondition, human-readable
};

/// known = available_data, done = {}; everything else false.
WorldState initial_state(const WorkflowProblem& problem);

/// Ask(v): v unknown and slot-fillable. Invoke(a): a not done and every input
/// known. Steps naming unknown entities are never applicable.
bool applicable(const WorldState& state, const PlanStep& step, const WorkflowProblem& problem);

/// Applies one step, returning the successor state and the step cost
/// (ask 1,000,000; invoke 10). Throws ValidationError when not applicable,
/// naming the failed precondition.
std::pair<WorldState, std::int64_t> apply(const WorldState& state, const PlanStep& step,
                                          const WorkflowProblem& problem);

/// Runs `steps` in order from the initial state. Failure is a return value:
/// the first inapplicable step's index and reason.
SimulationResult simulate(const WorkflowProblem& problem, const std::vector<PlanStep>& steps);

/// Cost-optimal plan by uniform-cost search with lexicographic
/// (cost, length) objective and totalized tie-breaking (asks before invokes,
/// each by numeric index). `goal_override`, when set, replaces the problem's
/// goal agent set (used for plan-as-goals recompilation checks). Throws
/// ResourceError when `node_cap` expansions are exceeded.
PlanResult solve_optimal(const WorkflowProblem& problem,
                         const std::optional<std::set<std::string>>& goal_override = {},
                         std::uint64_t node_cap = kDefaultNodeCap);

/// Fills the record's feasibility label from solve_optimal.
ProblemRecord label_feasibility(ProblemRecord record, std::uint64_t node_cap = kDefaultNodeCap);

/// Plan text in the response PLAN-section grammar, one step per line:
///   [0] ask(v__3)
///   [1] v__9 = a__2(v__7)
/// Invocations list declared outputs and inputs in signature order, so
/// reference plans and model plans are interchangeable.
std::string plan_to_text(const WorkflowProblem& problem, const std::vector<PlanStep>& steps);

}  // namespace flowplan
