#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowplan/model.hpp"
#include "flowplan/nl.hpp"
#include "flowplan/planner.hpp"

namespace flowplan {

enum class FailureReason { Parse, UnknownInput, IllegalAsk, RepeatedAction, GoalsUnmet, TooLong };

const char* failure_reason_name(FailureReason reason);

enum class NoPlanMark { NotApplicable, Correct, Incorrect };

/// Per-response judgement. The ladder optimal => valid => sound => parsed
/// holds for every verdict.
struct PlanVerdict {
    bool parsed = false;
    bool claimed_no_plan = false;
    bool sound = false;
    bool valid = false;
    bool optimal = false;
    NoPlanMark no_plan_correct = NoPlanMark::NotApplicable;
    int plan_length = 0;
    std::optional<int> reference_length;  // optimal length when feasible
    std::optional<FailureReason> failure_reason;
    // Secondary route: the recompilation-based validity check (plan actions
    // as extra goals, replan, compare lengths, plus the two in-order
    // invalidation rules). Recorded next to the simulation verdict; a
    // mismatch is a diagnostic, not an error.
    std::optional<bool> crosscheck_sound;
    std::optional<bool> crosscheck_valid;
    std::optional<bool> crosscheck_agrees;
};

/// Judges one parsed plan response against the labeled problem. Soundness is
/// exact-order executability; validity adds goal achievement; optimality
/// compares length against the reference optimum. Throws Error when the
/// feasibility label is missing.
PlanVerdict judge_plan(const WorkflowProblem& problem, const Feasibility& feasibility,
                       const ParsedPlanResponse& response,
                       std::uint64_t node_cap = kDefaultNodeCap);

struct TranslationScore {
    bool json_valid = false;
    int truth_elements = 0;
    int correct_elements = 0;
    int hallucinated_elements = 0;
    double proportion_correct = 0.0;
};

/// Scores a translation document (nullopt = the response yielded no valid
/// JSON) against reference_translation(problem). Elements are action ids,
/// per-action input/output memberships, and the four name lists.
TranslationScore judge_translation(const WorkflowProblem& problem,
                                   const std::optional<TranslationDoc>& doc);

/// One judged response, the unit aggregated into reports.
struct JudgedResponse {
    std::string hash;
    std::string model;
    std::string style;
    GridPoint point;
    Feasibility feasibility;
    std::optional<PlanVerdict> verdict;      // planning styles
    std::optional<TranslationScore> score;   // translation style
};

struct MetricsRow {
    std::string model;
    std::string style;
    int n = 0;
    int n_feasible = 0;
    int n_infeasible = 0;
    std::optional<double> sound_rate;
    std::optional<double> valid_rate;
    std::optional<double> optimal_rate;
    std::optional<double> sound_rate_feasible;
    std::optional<double> valid_rate_feasible;
    std::optional<double> optimal_rate_feasible;
    std::optional<double> no_plan_accuracy;  // over infeasible problems
    std::optional<double> json_valid_rate;
    std::optional<double> mean_translation_proportion;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;  // sorted by (model, style)
};

/// Deterministic fold over judged responses, grouped by (model, style).
/// Rates are absent (not zero) for empty denominators.
MetricsReport aggregate_metrics(const std::vector<JudgedResponse>& responses);

std::string metrics_to_text(const MetricsReport& report);
std::string metrics_to_csv(const MetricsReport& report);

/// One exported regression row; features are min-max normalized over the
/// exported corpus.
struct RegressionRow {
    std::string hash;
    std::string model;
    std::string style;
    double custom_actions = 0.0;
    double arity = 0.0;
    double coupling = 0.0;
    double slot_fillable = 0.0;
    double goals = 0.0;
    std::optional<double> optimal_plan_length;  // absent for infeasible problems
    std::optional<int> sound, valid, optimal;
    std::optional<int> no_plan_correct;
    std::optional<double> translation_proportion;
};

struct RegressionTable {
    std::vector<RegressionRow> rows;
    std::vector<std::string> constant_features;  // normalized to 0 with a warning
};

RegressionTable export_regression(const std::vector<JudgedResponse>& responses);

/// CSV with the fixed header (custom actions, arity, coupling, slot-fillable
/// variables, goals, optimal plan length, ...).
std::string regression_to_csv(const RegressionTable& table);

}  // namespace flowplan
