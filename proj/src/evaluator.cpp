#include "flowplan/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "flowplan/error.hpp"

namespace flowplan {

const char* failure_reason_name(FailureReason reason) {
    switch (reason) {
        case FailureReason::Parse: return "parse";
        case FailureReason::UnknownInput: return "unknown-input";
        case FailureReason::IllegalAsk: return "illegal-ask";
        case FailureReason::RepeatedAction: return "repeated-action";
        case FailureReason::GoalsUnmet: return "goals-unmet";
        case FailureReason::TooLong: return "too-long";
    }
    return "unknown";
}

namespace {

FailureReason map_step_failure(StepFailure failure, PlanStep::Kind kind) {
    switch (failure) {
        case StepFailure::UnknownInput: return FailureReason::UnknownInput;
        case StepFailure::RepeatedAction: return FailureReason::RepeatedAction;
        case StepFailure::IllegalAsk: return FailureReason::IllegalAsk;
        case StepFailure::UnknownName:
            // A nonexistent variable is certainly not askable; a nonexistent
            // agent certainly has no known inputs.
            return kind == PlanStep::Kind::Ask ? FailureReason::IllegalAsk
                                               : FailureReason::UnknownInput;
    }
    return FailureReason::UnknownInput;
}

/// The in-order invalidation rules applied by the recompilation route:
/// asking a non-slot-fillable variable or invoking an action whose inputs
/// are not yet known. Repetition is not among them.
bool ordered_scan_clean(const WorkflowProblem& problem, const std::vector<PlanStep>& steps) {
    std::set<std::string> known(problem.available_data.begin(), problem.available_data.end());
    std::map<std::string, bool> fillable;
    std::map<std::string, const Agent*> agents;
    for (const auto& agent : problem.available_agents) {
        agents[agent.id] = &agent;
        for (const auto* side : {&agent.signature.inputs, &agent.signature.outputs}) {
            for (const auto& var : *side) fillable[var.name] = var.slot_fillable;
        }
    }
    for (const auto& name : problem.available_data) fillable[name] = true;

    for (const auto& step : steps) {
        if (step.kind == PlanStep::Kind::Ask) {
            auto it = fillable.find(step.name);
            if (it == fillable.end() || !it->second) return false;
            known.insert(step.name);
        } else {
            auto it = agents.find(step.name);
            if (it == agents.end()) return false;
            for (const auto& var : it->second->signature.inputs) {
                if (known.count(var.name) == 0) return false;
            }
            for (const auto& var : it->second->signature.outputs) known.insert(var.name);
        }
    }
    return true;
}

}  // namespace

PlanVerdict judge_plan(const WorkflowProblem& problem, const Feasibility& feasibility,
                       const ParsedPlanResponse& response, std::uint64_t node_cap) {
    if (feasibility.state == Feasibility::State::Unknown) {
        throw Error("judge_plan requires a feasibility label; run labeling first");
    }
    const bool infeasible = feasibility.state == Feasibility::State::Infeasible;

    PlanVerdict verdict;
    if (feasibility.state == Feasibility::State::Feasible) {
        verdict.reference_length = feasibility.optimal_length;
    }

    if (response.outcome == ParsedPlanResponse::Outcome::ParseFailure) {
        verdict.failure_reason = FailureReason::Parse;
        verdict.no_plan_correct = infeasible ? NoPlanMark::Incorrect : NoPlanMark::NotApplicable;
        return verdict;
    }
    verdict.parsed = true;

    if (response.outcome == ParsedPlanResponse::Outcome::NoPlan) {
        verdict.claimed_no_plan = true;
        verdict.no_plan_correct = infeasible ? NoPlanMark::Correct : NoPlanMark::Incorrect;
        return verdict;
    }

    verdict.plan_length = static_cast<int>(response.steps.size());
    verdict.no_plan_correct = infeasible ? NoPlanMark::Incorrect : NoPlanMark::NotApplicable;

    const SimulationResult sim = simulate(problem, response.steps);
    verdict.sound = sim.ok;
    if (sim.ok) {
        verdict.valid = std::all_of(
            problem.goal_agent_ids.begin(), problem.goal_agent_ids.end(),
            [&](const std::string& goal) { return sim.final_state.done.count(goal) != 0; });
    } else {
        verdict.failure_reason =
            map_step_failure(sim.failure, response.steps[sim.failure_index].kind);
    }
    if (verdict.valid) {
        verdict.optimal =
            verdict.reference_length && verdict.plan_length <= *verdict.reference_length;
        verdict.failure_reason =
            verdict.optimal ? std::nullopt : std::make_optional(FailureReason::TooLong);
    } else if (verdict.sound) {
        verdict.failure_reason = FailureReason::GoalsUnmet;
    }

    // Secondary route: plan actions as goals, replan, compare lengths.
    std::set<std::string> claimed;
    bool claims_known_agents = true;
    for (const auto& step : response.steps) {
        if (step.kind != PlanStep::Kind::Invoke) continue;
        if (problem.find_agent(step.name) == nullptr) {
            claims_known_agents = false;
            break;
        }
        claimed.insert(step.name);
    }
    if (!claims_known_agents) {
        verdict.crosscheck_sound = false;
        verdict.crosscheck_valid = false;
    } else {
        const PlanResult sound_replan = solve_optimal(problem, claimed, node_cap);
        verdict.crosscheck_sound = sound_replan.solved();
        std::set<std::string> combined(problem.goal_agent_ids.begin(),
                                       problem.goal_agent_ids.end());
        combined.insert(claimed.begin(), claimed.end());
        const PlanResult valid_replan = solve_optimal(problem, combined, node_cap);
        verdict.crosscheck_valid = valid_replan.solved() &&
                                   valid_replan.length <= verdict.plan_length &&
                                   ordered_scan_clean(problem, response.steps);
    }
    verdict.crosscheck_agrees = *verdict.crosscheck_valid == verdict.valid;
    return verdict;
}

TranslationScore judge_translation(const WorkflowProblem& problem,
                                   const std::optional<TranslationDoc>& doc) {
    const TranslationDoc truth = reference_translation(problem);

    auto elements = [](const TranslationDoc& d) {
        std::unordered_set<std::string> set;
        for (const auto& action : d.actions) {
            set.insert("action:" + action.id);
            for (const auto& var : action.inputs) set.insert("in:" + action.id + ":" + var);
            for (const auto& var : action.outputs) set.insert("out:" + action.id + ":" + var);
        }
        for (const auto& var : d.available_data) set.insert("avail:" + var);
        for (const auto& var : d.askable_parameters) set.insert("ask:" + var);
        for (const auto& var : d.unaskable_parameters) set.insert("unask:" + var);
        for (const auto& id : d.goal_action_ids) set.insert("goal:" + id);
        return set;
    };

    const auto truth_set = elements(truth);
    TranslationScore score;
    score.truth_elements = static_cast<int>(truth_set.size());
    if (!doc) {
        return score;  // json_valid false, zero correct
    }
    score.json_valid = true;
    const auto out_set = elements(*doc);
    for (const auto& element : out_set) {
        if (truth_set.count(element) != 0) {
            ++score.correct_elements;
        } else {
            ++score.hallucinated_elements;
        }
    }
    if (score.truth_elements > 0) {
        score.proportion_correct =
            static_cast<double>(score.correct_elements) / score.truth_elements;
    }
    return score;
}

MetricsReport aggregate_metrics(const std::vector<JudgedResponse>& responses) {
    struct Tally {
        int n = 0, feasible = 0, infeasible = 0;
        int plan_n = 0, sound = 0, valid = 0, optimal = 0;
        int plan_feasible = 0, sound_f = 0, valid_f = 0, optimal_f = 0;
        int noplan_denu = 0, noplan_hits = 0;
        int translation_n = 0, json_valid = 0;
        double proportion_sum = 0.0;
    };
    std::map<std::pair<std::string, std::string>, Tally> groups;
    for (const auto& response : responses) {
        Tally& tally = groups[{response.model, response.style}];
        ++tally.n;
        const bool feasible = response.feasibility.state == Feasibility::State::Feasible;
        (feasible ? tally.feasible : tally.infeasible) += 1;
        if (response.verdict) {
            const PlanVerdict& verdict = *response.verdict;
            ++tally.plan_n;
            tally.sound += verdict.sound;
            tally.valid += verdict.valid;
            tally.optimal += verdict.optimal;
            if (feasible) {
                ++tally.plan_feasible;
                tally.sound_f += verdict.sound;
                tally.valid_f += verdict.valid;
                tally.optimal_f += verdict.optimal;
            } else {
                ++tally.noplan_denu;
                tally.noplan_hits += verdict.no_plan_correct == NoPlanMark::Correct;
            }
        }
        if (response.score) {
            ++tally.translation_n;
            tally.json_valid += response.score->json_valid;
            tally.proportion_sum += response.score->proportion_correct;
        }
    }

    auto rate = [](int hits, int denominator) -> std::optional<double> {
        if (denominator == 0) return std::nullopt;
        return static_cast<double>(hits) / denominator;
    };

    MetricsReport report;
    for (const auto& [key, tally] : groups) {
        MetricsRow row;
        row.model = key.first;
        row.style = key.second;
        row.n = tally.n;
        row.n_feasible = tally.feasible;
        row.n_infeasible = tally.infeasible;
        row.sound_rate = rate(tally.sound, tally.plan_n);
        row.valid_rate = rate(tally.valid, tally.plan_n);
        row.optimal_rate = rate(tally.optimal, tally.plan_n);
        row.sound_rate_feasible = rate(tally.sound_f, tally.plan_feasible);
        row.valid_rate_feasible = rate(tally.valid_f, tally.plan_feasible);
        row.optimal_rate_feasible = rate(tally.optimal_f, tally.plan_feasible);
        row.no_plan_accuracy = rate(tally.noplan_hits, tally.noplan_denu);
        row.json_valid_rate = rate(tally.json_valid, tally.translation_n);
        if (tally.translation_n > 0) {
            row.mean_translation_proportion = tally.proportion_sum / tally.translation_n;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace {

std::string fmt_rate(const std::optional<double>& value) {
    if (!value) return "-";
    std::ostringstream out;
    out << std::fixed << std::setprecision(4) << *value;
    return out.str();
}

}  // namespace

std::string metrics_to_text(const MetricsReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(24) << "model" << std::setw(12) << "style" << std::right
        << std::setw(6) << "n" << std::setw(8) << "feas" << std::setw(8) << "sound"
        << std::setw(8) << "valid" << std::setw(8) << "optim" << std::setw(9) << "sound_f"
        << std::setw(9) << "valid_f" << std::setw(9) << "optim_f" << std::setw(9) << "noplan"
        << std::setw(9) << "json" << std::setw(9) << "transl" << "\n";
    for (const auto& row : report.rows) {
        out << std::left << std::setw(24) << row.model << std::setw(12) << row.style
            << std::right << std::setw(6) << row.n << std::setw(8) << row.n_feasible
            << std::setw(8) << fmt_rate(row.sound_rate) << std::setw(8)
            << fmt_rate(row.valid_rate) << std::setw(8) << fmt_rate(row.optimal_rate)
            << std::setw(9) << fmt_rate(row.sound_rate_feasible) << std::setw(9)
            << fmt_rate(row.valid_rate_feasible) << std::setw(9)
            << fmt_rate(row.optimal_rate_feasible) << std::setw(9)
            << fmt_rate(row.no_plan_accuracy) << std::setw(9) << fmt_rate(row.json_valid_rate)
            << std::setw(9) << fmt_rate(row.mean_translation_proportion) << "\n";
    }
    return out.str();
}

std::string metrics_to_csv(const MetricsReport& report) {
    std::ostringstream out;
    out << "model,style,n,n feasible,n infeasible,sound,valid,optimal,sound feasible,"
           "valid feasible,optimal feasible,no plan accuracy,json valid,"
           "translation proportion\n";
    for (const auto& row : report.rows) {
        out << row.model << "," << row.style << "," << row.n << "," << row.n_feasible << ","
            << row.n_infeasible << "," << fmt_rate(row.sound_rate) << ","
            << fmt_rate(row.valid_rate) << "," << fmt_rate(row.optimal_rate) << ","
            << fmt_rate(row.sound_rate_feasible) << "," << fmt_rate(row.valid_rate_feasible)
            << "," << fmt_rate(row.optimal_rate_feasible) << ","
            << fmt_rate(row.no_plan_accuracy) << "," << fmt_rate(row.json_valid_rate) << ","
            << fmt_rate(row.mean_translation_proportion) << "\n";
    }
    return out.str();
}

RegressionTable export_regression(const std::vector<JudgedResponse>& responses) {
    if (responses.empty()) throw Error("regression export needs a nonempty corpus");

    struct Range {
        double lo = 0.0, hi = 0.0;
        bool any = false;
        void feed(double v) {
            lo = any ? std::min(lo, v) : v;
            hi = any ? std::max(hi, v) : v;
            any = true;
        }
        bool constant() const { return !any || lo == hi; }
        double normalize(double v) const { return constant() ? 0.0 : (v - lo) / (hi - lo); }
    };
    Range actions, arity, coupling, slot, goals, length;
    for (const auto& response : responses) {
        actions.feed(response.point.num_actions);
        arity.feed(response.point.arity);
        coupling.feed(response.point.coupling);
        slot.feed(response.point.slot_fillable_proportion);
        goals.feed(response.point.num_goals);
        if (response.feasibility.state == Feasibility::State::Feasible) {
            length.feed(response.feasibility.optimal_length);
        }
    }

    RegressionTable table;
    const std::pair<const char*, const Range*> features[] = {
        {"custom actions", &actions}, {"arity", &arity},
        {"coupling", &coupling},      {"slot-fillable variables", &slot},
        {"goals", &goals},            {"optimal plan length", &length},
    };
    for (const auto& [name, range] : features) {
        if (range->constant()) table.constant_features.emplace_back(name);
    }

    std::vector<JudgedResponse> ordered = responses;
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        return std::tie(a.hash, a.model, a.style) < std::tie(b.hash, b.model, b.style);
    });
    for (const auto& response : ordered) {
        RegressionRow row;
        row.hash = response.hash;
        row.model = response.model;
        row.style = response.style;
        row.custom_actions = actions.normalize(response.point.num_actions);
        row.arity = arity.normalize(response.point.arity);
        row.coupling = coupling.normalize(response.point.coupling);
        row.slot_fillable = slot.normalize(response.point.slot_fillable_proportion);
        row.goals = goals.normalize(response.point.num_goals);
        if (response.feasibility.state == Feasibility::State::Feasible) {
            row.optimal_plan_length = length.normalize(response.feasibility.optimal_length);
        }
        if (response.verdict) {
            row.sound = response.verdict->sound ? 1 : 0;
            row.valid = response.verdict->valid ? 1 : 0;
            row.optimal = response.verdict->optimal ? 1 : 0;
            if (response.verdict->no_plan_correct != NoPlanMark::NotApplicable) {
                row.no_plan_correct =
                    response.verdict->no_plan_correct == NoPlanMark::Correct ? 1 : 0;
            }
        }
        if (response.score) {
            row.translation_proportion = response.score->proportion_correct;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

std::string fmt_feature(double value) {
    std::ostringstream out;
    out << std::setprecision(12) << value;
    return out.str();
}

template <typename T>
std::string fmt_opt(const std::optional<T>& value) {
    if (!value) return "";
    if constexpr (std::is_same_v<T, double>) return fmt_feature(*value);
    else return std::to_string(*value);
}

}  // namespace

std::string regression_to_csv(const RegressionTable& table) {
    std::ostringstream out;
    out << "hash,model,prompt style,custom actions,arity,coupling,slot-fillable variables,"
           "goals,optimal plan length,sound,valid,optimal,no plan correct,"
           "translation proportion,constant features\n";
    std::string constants;
    for (std::size_t i = 0; i < table.constant_features.size(); ++i) {
        if (i > 0) constants += ";";
        constants += table.constant_features[i];
    }
    for (const auto& row : table.rows) {
        out << row.hash << "," << row.model << "," << row.style << ","
            << fmt_feature(row.custom_actions) << "," << fmt_feature(row.arity) << ","
            << fmt_feature(row.coupling) << "," << fmt_feature(row.slot_fillable) << ","
            << fmt_feature(row.goals) << "," << fmt_opt(row.optimal_plan_length) << ","
            << fmt_opt(row.sound) << "," << fmt_opt(row.valid) << "," << fmt_opt(row.optimal)
            << "," << fmt_opt(row.no_plan_correct) << ","
            << fmt_opt(row.translation_proportion) << "," << constants << "\n";
    }
    return out.str();
}

}  // namespace flowplan
