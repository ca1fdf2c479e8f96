// Shared hand-built problems for the unit suites.
#pragma once

#include <string>
#include <vector>

#include "flowplan/model.hpp"

namespace flowplan::testing {

inline VariableSpec var(const std::string& name, bool fillable) { return {name, fillable}; }

inline Agent agent(const std::string& id, std::vector<VariableSpec> inputs,
                   std::vector<VariableSpec> outputs) {
    return {id, {std::move(inputs), std::move(outputs)}};
}

/// The fragment shown in the interchange example: a__2 turns v__7 into v__9,
/// both slot-fillable.
inline WorkflowProblem listing_fragment_problem() {
    WorkflowProblem problem;
    problem.available_agents.push_back(
        agent("a__2", {var("v__7", true)}, {var("v__9", true)}));
    problem.available_agents.push_back(
        agent("a__1", {var("v__1", true)}, {var("v__2", true)}));
    problem.available_agents.push_back(
        agent("a__0", {var("v__3", true)}, {var("v__4", false)}));
    problem.goal_agent_ids = {"a__1", "a__0"};
    problem.available_data = {"v__10"};
    return problem;
}

/// One goal whose single slot-fillable input forces [ask, invoke].
inline WorkflowProblem ask_then_invoke_problem() {
    WorkflowProblem problem;
    problem.available_agents.push_back(
        agent("a__0", {var("v__0", true)}, {var("v__1", false)}));
    problem.available_agents.push_back(
        agent("a__1", {var("v__2", true)}, {var("v__3", true)}));
    problem.goal_agent_ids = {"a__0"};
    problem.available_data = {"v__5"};
    return problem;
}

/// Goal input is non-slot-fillable and produced by no agent.
inline WorkflowProblem unsolvable_problem() {
    WorkflowProblem problem;
    problem.available_agents.push_back(
        agent("a__0", {var("v__0", false)}, {var("v__1", true)}));
    problem.available_agents.push_back(
        agent("a__1", {var("v__1", true)}, {var("v__2", true)}));
    problem.goal_agent_ids = {"a__0"};
    problem.available_data = {"v__4"};
    return problem;
}

/// a__0 feeds a__1 through the non-fillable v__1; goal a__1.
inline WorkflowProblem chain_problem() {
    WorkflowProblem problem;
    problem.available_agents.push_back(
        agent("a__0", {var("v__0", true)}, {var("v__1", false)}));
    problem.available_agents.push_back(
        agent("a__1", {var("v__1", false)}, {var("v__2", true)}));
    problem.goal_agent_ids = {"a__1"};
    problem.available_data = {"v__3"};
    return problem;
}

}  // namespace flowplan::testing
