#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "flowplan/error.hpp"
#include "flowplan/evaluator.hpp"
#include "flowplan/generator.hpp"
#include "flowplan/nl.hpp"
#include "flowplan/planner.hpp"

using namespace flowplan;
using namespace flowplan::testing;

namespace {

ParsedPlanResponse plan_response(std::vector<PlanStep> steps) {
    ParsedPlanResponse response;
    response.outcome = ParsedPlanResponse::Outcome::Plan;
    response.steps = std::move(steps);
    response.diagnostics.resize(response.steps.size());
    return response;
}

ParsedPlanResponse no_plan_response() {
    ParsedPlanResponse response;
    response.outcome = ParsedPlanResponse::Outcome::NoPlan;
    return response;
}

Feasibility label_of(const WorkflowProblem& problem) {
    const PlanResult result = solve_optimal(problem);
    return result.solved() ? Feasibility::feasible(result.cost, result.length)
                           : Feasibility::infeasible();
}

void check_ladder(const PlanVerdict& verdict) {
    if (verdict.optimal) CHECK(verdict.valid);
    if (verdict.valid) CHECK(verdict.sound);
    if (verdict.sound) CHECK(verdict.parsed);
}

}  // namespace

TEST_CASE("judging requires a feasibility label") {
    const WorkflowProblem problem = ask_then_invoke_problem();
    CHECK_THROWS_AS(judge_plan(problem, Feasibility::unknown(), no_plan_response()), Error);
}

TEST_CASE("the reference plan judges optimal") {
    const WorkflowProblem problem = chain_problem();
    const Feasibility label = label_of(problem);
    const PlanResult result = solve_optimal(problem);
    const PlanVerdict verdict = judge_plan(problem, label, plan_response(result.steps));
    CHECK(verdict.parsed);
    CHECK(verdict.sound);
    CHECK(verdict.valid);
    CHECK(verdict.optimal);
    CHECK_FALSE(verdict.failure_reason.has_value());
    CHECK(verdict.reference_length == result.length);
    CHECK(verdict.crosscheck_valid == true);
    CHECK(verdict.crosscheck_agrees == true);
    check_ladder(verdict);
}

TEST_CASE("a longer valid plan is valid but not optimal") {
    const WorkflowProblem problem = chain_problem();  // optimal: ask v0, a0, a1
    const Feasibility label = label_of(problem);
    const std::vector<PlanStep> padded{PlanStep::ask("v__2"), PlanStep::ask("v__0"),
                                       PlanStep::invoke("a__0"), PlanStep::invoke("a__1")};
    const PlanVerdict verdict = judge_plan(problem, label, plan_response(padded));
    CHECK(verdict.valid);
    CHECK_FALSE(verdict.optimal);
    CHECK(verdict.failure_reason == FailureReason::TooLong);
    CHECK(verdict.plan_length == 4);
    CHECK(verdict.crosscheck_valid == true);
    check_ladder(verdict);
}

TEST_CASE("failure reasons mirror the violated precondition") {
    const WorkflowProblem problem = chain_problem();
    const Feasibility label = label_of(problem);

    SUBCASE("unknown input") {
        const PlanVerdict verdict =
            judge_plan(problem, label, plan_response({PlanStep::invoke("a__0")}));
        CHECK_FALSE(verdict.sound);
        CHECK(verdict.failure_reason == FailureReason::UnknownInput);
        check_ladder(verdict);
    }
    SUBCASE("illegal ask") {
        const PlanVerdict verdict =
            judge_plan(problem, label, plan_response({PlanStep::ask("v__1")}));
        CHECK_FALSE(verdict.sound);
        CHECK(verdict.failure_reason == FailureReason::IllegalAsk);
    }
    SUBCASE("repeated action") {
        const PlanVerdict verdict = judge_plan(
            problem, label,
            plan_response({PlanStep::ask("v__0"), PlanStep::invoke("a__0"),
                           PlanStep::invoke("a__0")}));
        CHECK_FALSE(verdict.sound);
        CHECK(verdict.failure_reason == FailureReason::RepeatedAction);
    }
    SUBCASE("sound but goals unmet") {
        const PlanVerdict verdict = judge_plan(
            problem, label, plan_response({PlanStep::ask("v__0"), PlanStep::invoke("a__0")}));
        CHECK(verdict.sound);
        CHECK_FALSE(verdict.valid);
        CHECK(verdict.failure_reason == FailureReason::GoalsUnmet);
        check_ladder(verdict);
    }
    SUBCASE("nonexistent names") {
        PlanVerdict verdict =
            judge_plan(problem, label, plan_response({PlanStep::invoke("a__9")}));
        CHECK_FALSE(verdict.sound);
        CHECK(verdict.failure_reason == FailureReason::UnknownInput);
        verdict = judge_plan(problem, label, plan_response({PlanStep::ask("v__77")}));
        CHECK(verdict.failure_reason == FailureReason::IllegalAsk);
    }
}

TEST_CASE("parse failures and no-plan claims are labeled") {
    const WorkflowProblem feasible = chain_problem();
    const WorkflowProblem infeasible = unsolvable_problem();
    const Feasibility feasible_label = label_of(feasible);
    const Feasibility infeasible_label = label_of(infeasible);
    REQUIRE(infeasible_label.state == Feasibility::State::Infeasible);

    ParsedPlanResponse failure;
    failure.outcome = ParsedPlanResponse::Outcome::ParseFailure;
    failure.failure_reason = "junk";

    PlanVerdict verdict = judge_plan(feasible, feasible_label, failure);
    CHECK_FALSE(verdict.parsed);
    CHECK(verdict.failure_reason == FailureReason::Parse);
    CHECK(verdict.no_plan_correct == NoPlanMark::NotApplicable);

    verdict = judge_plan(infeasible, infeasible_label, failure);
    CHECK(verdict.no_plan_correct == NoPlanMark::Incorrect);

    verdict = judge_plan(infeasible, infeasible_label, no_plan_response());
    CHECK(verdict.parsed);
    CHECK(verdict.claimed_no_plan);
    CHECK(verdict.no_plan_correct == NoPlanMark::Correct);
    CHECK_FALSE(verdict.sound);

    verdict = judge_plan(feasible, feasible_label, no_plan_response());
    CHECK(verdict.no_plan_correct == NoPlanMark::Incorrect);
}

TEST_CASE("executable plans on infeasible problems are sound but never valid") {
    const WorkflowProblem problem = unsolvable_problem();  // goal a__0 unreachable
    const Feasibility label = label_of(problem);
    // a__1's input v__1 is fillable, so [ask(v__1), a__1] executes fine
    const PlanVerdict verdict = judge_plan(
        problem, label, plan_response({PlanStep::ask("v__1"), PlanStep::invoke("a__1")}));
    CHECK(verdict.sound);
    CHECK_FALSE(verdict.valid);
    CHECK(verdict.failure_reason == FailureReason::GoalsUnmet);
    CHECK(verdict.no_plan_correct == NoPlanMark::Incorrect);
    CHECK_FALSE(verdict.reference_length.has_value());
    check_ladder(verdict);
}

TEST_CASE("perturbations: redundant step stays valid, swap breaks soundness") {
    GeneratorConfig config;
    config.samples_per_point = 2;
    config.num_actions = {3, 4};
    int exercised = 0;
    for (const auto& record : generate_batch(config, 1)) {
        const PlanResult result = solve_optimal(record.problem);
        if (!result.solved()) continue;
        const Feasibility label = Feasibility::feasible(result.cost, result.length);

        // swap the first invoke with the step providing one of its inputs
        const auto first_invoke = std::find_if(
            result.steps.begin(), result.steps.end(),
            [](const PlanStep& s) { return s.kind == PlanStep::Kind::Invoke; });
        REQUIRE(first_invoke != result.steps.end());
        std::vector<PlanStep> swapped = result.steps;
        const std::size_t invoke_at =
            static_cast<std::size_t>(first_invoke - result.steps.begin());
        REQUIRE(invoke_at > 0);
        std::swap(swapped[invoke_at - 1], swapped[invoke_at]);
        // the step directly before the first invoke always feeds it; verify
        const PlanVerdict swapped_verdict =
            judge_plan(record.problem, label, plan_response(swapped));
        if (!swapped_verdict.sound) {
            CHECK(swapped_verdict.crosscheck_valid == false);
            CHECK(swapped_verdict.crosscheck_agrees == true);
            ++exercised;
        }
        check_ladder(swapped_verdict);
    }
    CHECK(exercised > 10);
}

TEST_CASE("translation scoring: identity is perfect") {
    const WorkflowProblem problem = listing_fragment_problem();
    const TranslationScore score =
        judge_translation(problem, reference_translation(problem));
    CHECK(score.json_valid);
    CHECK(score.proportion_correct == 1.0);
    CHECK(score.hallucinated_elements == 0);
    CHECK(score.correct_elements == score.truth_elements);
}

TEST_CASE("translation scoring with a hand-counted universe") {
    // 2 actions, 1 input + 1 output each, 1 avail, askable v0 v1 v2 v3 v5(avail),
    // unaskable none... build explicitly:
    WorkflowProblem problem;
    problem.available_agents.push_back(agent("a__0", {var("v__0", true)}, {var("v__1", false)}));
    problem.available_agents.push_back(agent("a__1", {var("v__2", true)}, {var("v__3", true)}));
    problem.goal_agent_ids = {"a__1"};
    problem.available_data = {"v__5"};
    // universe: action ids a__0 a__1 (2), in/out pairs (4), avail v__5 (1),
    // askable v__0 v__2 v__3 v__5 (4), unaskable v__1 (1), goal a__1 (1) -> 13
    const TranslationDoc truth = reference_translation(problem);
    TranslationScore score = judge_translation(problem, truth);
    CHECK(score.truth_elements == 13);
    CHECK(score.proportion_correct == 1.0);

    // omitting one input variable loses exactly one element
    TranslationDoc missing = truth;
    missing.actions[0].inputs.clear();
    score = judge_translation(problem, missing);
    CHECK(score.correct_elements == 12);
    CHECK(score.proportion_correct == doctest::Approx(12.0 / 13.0));
    CHECK(score.hallucinated_elements == 0);

    // adding a nonexistent askable variable is a hallucination
    TranslationDoc extra = truth;
    extra.askable_parameters.push_back("v__9");
    score = judge_translation(problem, extra);
    CHECK(score.hallucinated_elements == 1);
    CHECK(score.correct_elements == 13);

    // duplicates collapse; misplaced entries count as hallucinations
    TranslationDoc duplicated = truth;
    duplicated.askable_parameters.push_back(duplicated.askable_parameters.front());
    score = judge_translation(problem, duplicated);
    CHECK(score.proportion_correct == 1.0);
    CHECK(score.hallucinated_elements == 0);

    // invalid JSON scores zero
    score = judge_translation(problem, std::nullopt);
    CHECK_FALSE(score.json_valid);
    CHECK(score.correct_elements == 0);
    CHECK(score.proportion_correct == 0.0);
}

TEST_CASE("aggregation matches hand counts and keeps empty rates absent") {
    std::vector<JudgedResponse> responses;
    auto add_plan = [&](const std::string& model, bool feasible, bool sound, bool valid,
                        bool optimal, NoPlanMark mark) {
        JudgedResponse response;
        response.hash = "h" + std::to_string(responses.size());
        response.model = model;
        response.style = "verbose";
        response.point = {2, 1, 0.0, 1.0, 0, 1};
        response.feasibility = feasible ? Feasibility::feasible(1000010, 2)
                                        : Feasibility::infeasible();
        PlanVerdict verdict;
        verdict.parsed = true;
        verdict.sound = sound;
        verdict.valid = valid;
        verdict.optimal = optimal;
        verdict.no_plan_correct = mark;
        response.verdict = verdict;
        responses.push_back(std::move(response));
    };
    // 3-of-4 valid for model m over feasible problems
    add_plan("m", true, true, true, true, NoPlanMark::NotApplicable);
    add_plan("m", true, true, true, false, NoPlanMark::NotApplicable);
    add_plan("m", true, true, true, true, NoPlanMark::NotApplicable);
    add_plan("m", true, false, false, false, NoPlanMark::NotApplicable);
    // 1-of-2 no-plan accuracy on infeasible
    add_plan("m", false, false, false, false, NoPlanMark::Correct);
    add_plan("m", false, false, false, false, NoPlanMark::Incorrect);

    const MetricsReport report = aggregate_metrics(responses);
    REQUIRE(report.rows.size() == 1);
    const MetricsRow& row = report.rows[0];
    CHECK(row.n == 6);
    CHECK(row.n_feasible == 4);
    CHECK(row.n_infeasible == 2);
    CHECK(row.valid_rate == doctest::Approx(3.0 / 6.0));
    CHECK(row.valid_rate_feasible == doctest::Approx(0.75));
    CHECK(row.optimal_rate_feasible == doctest::Approx(0.5));
    CHECK(row.no_plan_accuracy == doctest::Approx(0.5));
    CHECK_FALSE(row.json_valid_rate.has_value());  // no translation rows

    // ordering independence
    std::vector<JudgedResponse> shuffled(responses.rbegin(), responses.rend());
    const MetricsReport again = aggregate_metrics(shuffled);
    CHECK(again.rows[0].valid_rate == row.valid_rate);
    CHECK(metrics_to_csv(again) == metrics_to_csv(report));
}

TEST_CASE("regression export normalizes the grid features") {
    std::vector<JudgedResponse> responses;
    for (int actions : {2, 3, 4, 5}) {
        for (int goals : {1, 2}) {
            JudgedResponse response;
            response.hash = "h" + std::to_string(actions) + std::to_string(goals);
            response.model = "m";
            response.style = "verbose";
            response.point = {actions, 1, 0.0, 1.0, 0, goals};
            response.feasibility =
                actions == 5 ? Feasibility::infeasible() : Feasibility::feasible(1000010, 2);
            PlanVerdict verdict;
            verdict.parsed = true;
            response.verdict = verdict;
            responses.push_back(std::move(response));
        }
    }
    const RegressionTable table = export_regression(responses);
    REQUIRE(table.rows.size() == 8);
    std::set<double> images;
    for (const auto& row : table.rows) {
        images.insert(row.custom_actions);
        CHECK((row.goals == 0.0 || row.goals == 1.0));
        if (row.hash.substr(1, 1) == "5") {
            CHECK_FALSE(row.optimal_plan_length.has_value());
        } else {
            CHECK(row.optimal_plan_length.has_value());
        }
    }
    CHECK(images == std::set<double>{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});

    // constant features normalize to 0 and are named in the warning column
    CHECK(std::find(table.constant_features.begin(), table.constant_features.end(),
                    "coupling") != table.constant_features.end());
    for (const auto& row : table.rows) CHECK(row.coupling == 0.0);

    const std::string csv = regression_to_csv(table);
    CHECK(csv.rfind("hash,model,prompt style,custom actions,arity,coupling,"
                    "slot-fillable variables,goals,optimal plan length,sound,valid,optimal,"
                    "no plan correct,translation proportion,constant features\n",
                    0) == 0);
}
