#include "flowplan/planner.hpp"

#include <algorithm>
#include <cstdint>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "flowplan/error.hpp"

namespace flowplan {

const char* step_failure_name(StepFailure failure) {
    switch (failure) {
        case StepFailure::UnknownInput: return "unknown-input";
        case StepFailure::RepeatedAction: return "repeated-action";
        case StepFailure::IllegalAsk: return "illegal-ask";
        case StepFailure::UnknownName: return "unknown-name";
    }
    return "unknown";
}

namespace {

/// Indexed view of a problem for mask-based search. Variables and agents are
/// ordered by numeric suffix; the universe covers signature variables and
/// available_data.
struct ProblemIndex {
    std::vector<std::string> variables;          // sorted by index
    std::vector<bool> fillable;                  // per variable
    std::vector<bool> initially_known;           // available_data membership
    std::vector<std::string> agents;             // sorted by index
    std::vector<std::uint64_t> agent_inputs;     // variable mask per agent
    std::vector<std::uint64_t> agent_outputs;    // variable mask per agent
    std::unordered_map<std::string, std::size_t> var_slot;
    std::unordered_map<std::string, std::size_t> agent_slot;
    std::uint64_t consumed_mask = 0;  // variables appearing in any input

    explicit ProblemIndex(const WorkflowProblem& problem) {
        std::unordered_map<std::string, bool> flags;
        std::unordered_set<std::string> names;
        for (const auto& agent : problem.available_agents) {
            for (const auto* side : {&agent.signature.inputs, &agent.signature.outputs}) {
                for (const auto& var : *side) {
                    names.insert(var.name);
                    flags[var.name] = var.slot_fillable;
                }
            }
        }
        for (const auto& name : problem.available_data) names.insert(name);

        variables.assign(names.begin(), names.end());
        std::sort(variables.begin(), variables.end(), [](const auto& a, const auto& b) {
            return id_index(a) < id_index(b);
        });
        if (variables.size() > 64 || problem.available_agents.size() > 64) {
            throw ResourceError("planner supports at most 64 variables and 64 agents");
        }
        fillable.resize(variables.size());
        initially_known.resize(variables.size());
        for (std::size_t i = 0; i < variables.size(); ++i) {
            var_slot[variables[i]] = i;
            auto it = flags.find(variables[i]);
            // available_data variables carry no flag in the representation;
            // they are treated as slot-fillable (asking them is blocked by
            // their initially-known status regardless).
            fillable[i] = it == flags.end() ? true : it->second;
        }
        for (const auto& name : problem.available_data) {
            initially_known[var_slot.at(name)] = true;
        }

        for (const auto& agent : problem.available_agents) agents.push_back(agent.id);
        std::sort(agents.begin(), agents.end(), [](const auto& a, const auto& b) {
            return id_index(a) < id_index(b);
        });
        agent_inputs.resize(agents.size());
        agent_outputs.resize(agents.size());
        for (std::size_t i = 0; i < agents.size(); ++i) agent_slot[agents[i]] = i;
        for (const auto& agent : problem.available_agents) {
            std::size_t slot = agent_slot.at(agent.id);
            for (const auto& var : agent.signature.inputs) {
                agent_inputs[slot] |= std::uint64_t{1} << var_slot.at(var.name);
            }
            for (const auto& var : agent.signature.outputs) {
                agent_outputs[slot] |= std::uint64_t{1} << var_slot.at(var.name);
            }
            consumed_mask |= agent_inputs[slot];
        }
    }

    std::uint64_t initial_known_mask() const {
        std::uint64_t mask = 0;
        for (std::size_t i = 0; i < variables.size(); ++i) {
            if (initially_known[i]) mask |= std::uint64_t{1} << i;
        }
        return mask;
    }
};

struct MaskState {
    std::uint64_t known = 0;
    std::uint64_t done = 0;
    friend bool operator==(const MaskState&, const MaskState&) = default;
};

struct MaskStateHash {
    std::size_t operator()(const MaskState& s) const {
        std::uint64_t h = s.known * 0x9e3779b97f4a7c15ull;
        h ^= s.done + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

WorldState initial_state(const WorkflowProblem& problem) {
    WorldState state;
    state.known.insert(problem.available_data.begin(), problem.available_data.end());
    return state;
}

namespace {

/// Slot-fillability of a named variable as seen by the ask action:
/// available_data variables count as fillable, signature variables carry
/// their flag, unknown names are not askable.
enum class AskClass { Fillable, NotFillable, NoSuchVariable };

AskClass classify_ask(const std::string& name, const WorkflowProblem& problem) {
    for (const auto& data : problem.available_data) {
        if (data == name) return AskClass::Fillable;
    }
    bool found = false;
    bool fillable = false;
    for (const auto& agent : problem.available_agents) {
        for (const auto* side : {&agent.signature.inputs, &agent.signature.outputs}) {
            for (const auto& var : *side) {
                if (var.name == name) {
                    found = true;
                    fillable = var.slot_fillable;
                }
            }
        }
    }
    if (!found) return AskClass::NoSuchVariable;
    return fillable ? AskClass::Fillable : AskClass::NotFillable;
}

std::optional<std::pair<StepFailure, std::string>> step_violation(
    const WorldState& state, const PlanStep& step, const WorkflowProblem& problem) {
    if (step.kind == PlanStep::Kind::Ask) {
        switch (classify_ask(step.name, problem)) {
            case AskClass::NoSuchVariable:
                return {{StepFailure::UnknownName,
                         "variable " + step.name + " does not exist"}};
            case AskClass::NotFillable:
                return {{StepFailure::IllegalAsk,
                         "variable " + step.name + " is not slot-fillable"}};
            case AskClass::Fillable: break;
        }
        if (state.known.count(step.name) != 0) {
            return {{StepFailure::RepeatedAction,
                     "variable " + step.name + " is already known"}};
        }
        return std::nullopt;
    }
    const Agent* agent = problem.find_agent(step.name);
    if (agent == nullptr) {
        return {{StepFailure::UnknownName, "agent " + step.name + " does not exist"}};
    }
    if (state.done.count(step.name) != 0) {
        return {{StepFailure::RepeatedAction, "agent " + step.name + " was already executed"}};
    }
    for (const auto& var : agent->signature.inputs) {
        if (state.known.count(var.name) == 0) {
            return {{StepFailure::UnknownInput,
                     "input " + var.name + " of " + step.name + " is unknown"}};
        }
    }
    return std::nullopt;
}

}  // namespace

bool applicable(const WorldState& state, const PlanStep& step, const WorkflowProblem& problem) {
    return !step_violation(state, step, problem).has_value();
}

std::pair<WorldState, std::int64_t> apply(const WorldState& state, const PlanStep& step,
                                          const WorkflowProblem& problem) {
    if (auto violation = step_violation(state, step, problem)) {
        throw ValidationError(step_failure_name(violation->first), violation->second);
    }
    WorldState next = state;
    if (step.kind == PlanStep::Kind::Ask) {
        next.known.insert(step.name);
        return {std::move(next), kAskCost};
    }
    next.done.insert(step.name);
    for (const auto& var : problem.find_agent(step.name)->signature.outputs) {
        next.known.insert(var.name);
    }
    return {std::move(next), kInvokeCost};
}

SimulationResult simulate(const WorkflowProblem& problem, const std::vector<PlanStep>& steps) {
    SimulationResult result;
    WorldState state = initial_state(problem);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (auto violation = step_violation(state, steps[i], problem)) {
            result.ok = false;
            result.failure_index = i;
            result.failure = violation->first;
            result.failure_detail = violation->second;
            result.final_state = std::move(state);
            return result;
        }
        auto [next, cost] = apply(state, steps[i], problem);
        state = std::move(next);
        result.step_costs.push_back(cost);
    }
    result.ok = true;
    result.final_state = std::move(state);
    return result;
}

PlanResult solve_optimal(const WorkflowProblem& problem,
                         const std::optional<std::set<std::string>>& goal_override,
                         std::uint64_t node_cap) {
    const ProblemIndex index(problem);

    std::uint64_t goal_mask = 0;
    const std::set<std::string> defaults(problem.goal_agent_ids.begin(),
                                         problem.goal_agent_ids.end());
    for (const auto& goal : goal_override ? *goal_override : defaults) {
        auto it = index.agent_slot.find(goal);
        if (it == index.agent_slot.end()) {
            throw ValidationError(goal, "goal agent id names no available agent");
        }
        goal_mask |= std::uint64_t{1} << it->second;
    }

    struct Node {
        MaskState state;
        std::int64_t cost = 0;
        int length = 0;
        std::int32_t parent = -1;
        PlanStep step;  // step taken to reach this node
    };
    struct QueueEntry {
        std::int64_t cost;
        int length;
        std::uint64_t order;  // discovery order totalizes the tie-break
        std::int32_t node;
        bool operator>(const QueueEntry& other) const {
            if (cost != other.cost) return cost > other.cost;
            if (length != other.length) return length > other.length;
            return order > other.order;
        }
    };

    std::vector<Node> nodes;
    std::unordered_map<MaskState, std::int32_t, MaskStateHash> best;
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;

    const MaskState start{index.initial_known_mask(), 0};
    nodes.push_back({start, 0, 0, -1, {}});
    best.emplace(start, 0);
    std::uint64_t order = 0;
    open.push({0, 0, order++, 0});

    // Ask moves are restricted to variables some agent consumes: asking any
    // other variable enables nothing and only adds cost, so the optimum is
    // unchanged. applicable()/simulate() keep the unrestricted semantics.
    std::uint64_t expansions = 0;
    while (!open.empty()) {
        const QueueEntry entry = open.top();
        open.pop();
        const Node node = nodes[static_cast<std::size_t>(entry.node)];
        auto settled = best.find(node.state);
        if (settled != best.end() && settled->second != entry.node) continue;
        if ((node.state.done & goal_mask) == goal_mask) {
            PlanResult result;
            result.status = PlanResult::Status::Solved;
            result.cost = node.cost;
            result.length = node.length;
            for (std::int32_t at = entry.node; nodes[static_cast<std::size_t>(at)].parent >= 0;
                 at = nodes[static_cast<std::size_t>(at)].parent) {
                result.steps.push_back(nodes[static_cast<std::size_t>(at)].step);
            }
            std::reverse(result.steps.begin(), result.steps.end());
            return result;
        }
        if (++expansions > node_cap) {
            throw ResourceError("node cap exceeded (" + std::to_string(node_cap) + ")");
        }

        auto relax = [&](const MaskState& next, std::int64_t cost, const PlanStep& step) {
            const std::int64_t next_cost = node.cost + cost;
            const int next_length = node.length + 1;
            auto it = best.find(next);
            if (it != best.end()) {
                const Node& seen = nodes[static_cast<std::size_t>(it->second)];
                if (seen.cost < next_cost ||
                    (seen.cost == next_cost && seen.length <= next_length)) {
                    return;
                }
            }
            nodes.push_back({next, next_cost, next_length, entry.node, step});
            const auto id = static_cast<std::int32_t>(nodes.size() - 1);
            if (it != best.end()) {
                it->second = id;
            } else {
                best.emplace(next, id);
            }
            open.push({next_cost, next_length, order++, id});
        };

        for (std::size_t v = 0; v < index.variables.size(); ++v) {
            const std::uint64_t bit = std::uint64_t{1} << v;
            if ((node.state.known & bit) != 0 || !index.fillable[v]) continue;
            if ((index.consumed_mask & bit) == 0) continue;
            relax({node.state.known | bit, node.state.done}, kAskCost,
                  PlanStep::ask(index.variables[v]));
        }
        for (std::size_t a = 0; a < index.agents.size(); ++a) {
            const std::uint64_t bit = std::uint64_t{1} << a;
            if ((node.state.done & bit) != 0) continue;
            if ((index.agent_inputs[a] & node.state.known) != index.agent_inputs[a]) continue;
            relax({node.state.known | index.agent_outputs[a], node.state.done | bit},
                  kInvokeCost, PlanStep::invoke(index.agents[a]));
        }
    }
    return {};  // Unsolvable: steps empty, cost 0
}

ProblemRecord label_feasibility(ProblemRecord record, std::uint64_t node_cap) {
    PlanResult result = solve_optimal(record.problem, {}, node_cap);
    record.feasibility = result.solved()
                             ? Feasibility::feasible(result.cost, result.length)
                             : Feasibility::infeasible();
    return record;
}

std::string plan_to_text(const WorkflowProblem& problem, const std::vector<PlanStep>& steps) {
    std::ostringstream out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out << "[" << i << "] ";
        if (steps[i].kind == PlanStep::Kind::Ask) {
            out << "ask(" << steps[i].name << ")";
        } else {
            const Agent* agent = problem.find_agent(steps[i].name);
            if (agent == nullptr) {
                throw ValidationError(steps[i].name, "agent id names no available agent");
            }
            std::string sep;
            for (const auto& var : agent->signature.outputs) {
                out << sep << var.name;
                sep = ", ";
            }
            out << " = " << agent->id << "(";
            sep = "";
            for (const auto& var : agent->signature.inputs) {
                out << sep << var.name;
                sep = ", ";
            }
            out << ")";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace flowplan
