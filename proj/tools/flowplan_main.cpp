#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flowplan/batch.hpp"
#include "flowplan/digest.hpp"
#include "flowplan/error.hpp"
#include "flowplan/evaluator.hpp"
#include "flowplan/generator.hpp"
#include "flowplan/nl.hpp"
#include "flowplan/pddl.hpp"
#include "flowplan/planner.hpp"
#include "json.hpp"

namespace {

using namespace flowplan;

std::vector<PromptStyle> parse_styles(const std::vector<std::string>& names) {
    std::vector<PromptStyle> styles;
    for (const auto& name : names) {
        auto style = style_from_name(name);
        if (!style) {
            throw ConfigError("unknown style '" + name +
                              "'; allowed: verbose concise translation");
        }
        styles.push_back(*style);
    }
    return styles;
}

WorkflowProblem load_problem(const BatchPaths& paths, const std::string& hash) {
    return parse_problem(read_text_file(paths.ir_file(hash)));
}

/// Looks up the manifest row for a hash (empty optional when unlabeled).
Feasibility manifest_feasibility(const BatchPaths& paths, const std::string& hash) {
    for (const auto& row : read_manifest(paths.manifest())) {
        if (row.hash == hash) return row.feasibility;
    }
    throw ConfigError("hash " + hash + " is not in the batch manifest");
}

nlohmann::json verdict_json(const PlanVerdict& v) {
    nlohmann::json out;
    out["parsed"] = v.parsed;
    out["claimed_no_plan"] = v.claimed_no_plan;
    out["sound"] = v.sound;
    out["valid"] = v.valid;
    out["optimal"] = v.optimal;
    out["plan_length"] = v.plan_length;
    if (v.reference_length) out["reference_length"] = *v.reference_length;
    if (v.failure_reason) out["failure_reason"] = failure_reason_name(*v.failure_reason);
    switch (v.no_plan_correct) {
        case NoPlanMark::NotApplicable: out["no_plan_correct"] = "n/a"; break;
        case NoPlanMark::Correct: out["no_plan_correct"] = "correct"; break;
        case NoPlanMark::Incorrect: out["no_plan_correct"] = "incorrect"; break;
    }
    if (v.crosscheck_sound) out["crosscheck_sound"] = *v.crosscheck_sound;
    if (v.crosscheck_valid) out["crosscheck_valid"] = *v.crosscheck_valid;
    if (v.crosscheck_agrees) out["crosscheck_agrees"] = *v.crosscheck_agrees;
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Workflow planning benchmark pipeline"};
    app.require_subcommand(1);

    std::string batch_dir;
    std::string config_path;
    std::vector<std::string> style_names{"verbose", "concise"};
    std::vector<std::string> models;
    std::string endpoint_url;
    std::string templates_dir;
    std::string bank_path;
    std::string hash;
    std::string response_path;
    std::string response_style = "verbose";
    double temperature = 0.0;
    int workers = 0;
    std::uint64_t node_cap = kDefaultNodeCap;
    bool emit_pddl = false;

    auto add_batch = [&](CLI::App* cmd, bool required = true) {
        auto* opt = cmd->add_option("--batch-dir", batch_dir, "batch directory");
        if (required) opt->required();
    };

    auto* generate = app.add_subcommand("generate", "generate IR files and the batch manifest");
    add_batch(generate);
    generate->add_option("--config", config_path, "generation config JSON");
    generate->add_option("--workers", workers, "worker threads (0 = all cores)");

    auto* label = app.add_subcommand("label", "label feasibility and optimal cost/length");
    add_batch(label);
    label->add_option("--workers", workers, "worker threads (0 = all cores)");
    label->add_option("--node-cap", node_cap, "search node cap per problem");

    auto* render = app.add_subcommand("render", "render prompts per problem and style");
    add_batch(render);
    render->add_option("--styles", style_names, "prompt styles")->delimiter(',');
    render->add_option("--templates", templates_dir, "directory with custom template files");
    render->add_option("--example-bank", bank_path, "custom example bank JSON");
    render->add_option("--workers", workers, "worker threads (0 = all cores)");

    auto* respond = app.add_subcommand("respond", "query a chat-completion endpoint");
    add_batch(respond);
    respond->add_option("--endpoint", endpoint_url, "base URL, e.g. http://host:8000/v1")
        ->required();
    respond->add_option("--models", models, "model names")->required()->delimiter(',');
    respond->add_option("--styles", style_names, "prompt styles")->delimiter(',');
    respond->add_option("--temperature", temperature, "sampling temperature");
    respond->add_option("--workers", workers, "concurrent requests (0 = all cores)");

    auto* judge = app.add_subcommand("judge", "judge response files into verdicts");
    add_batch(judge);
    judge->add_option("--workers", workers, "worker threads (0 = all cores)");
    judge->add_option("--node-cap", node_cap, "search node cap per crosscheck");

    auto* report = app.add_subcommand("report", "aggregate verdicts into metrics and CSV");
    add_batch(report);

    auto* pddl_cmd = app.add_subcommand("pddl", "export optimality-mode PDDL per problem");
    add_batch(pddl_cmd);
    pddl_cmd->add_option("--workers", workers, "worker threads (0 = all cores)");

    auto* solve = app.add_subcommand("solve", "print the reference plan for one problem");
    add_batch(solve);
    solve->add_option("--hash", hash, "problem hash")->required();
    solve->add_option("--node-cap", node_cap, "search node cap");

    auto* validate_cmd = app.add_subcommand("validate", "judge one response file");
    add_batch(validate_cmd);
    validate_cmd->add_option("--hash", hash, "problem hash")->required();
    validate_cmd->add_option("--response", response_path, "response text file")->required();
    validate_cmd->add_option("--style", response_style, "verbose | concise | translation");
    validate_cmd->add_option("--node-cap", node_cap, "search node cap");
    validate_cmd->add_flag("--emit-pddl", emit_pddl,
                           "write soundness/validity PDDL next to the response");

    CLI11_PARSE(app, argc, argv);

    try {
        const BatchPaths paths{batch_dir};
        if (generate->parsed()) {
            const GeneratorConfig config =
                config_path.empty() ? GeneratorConfig{} : load_config_file(config_path);
            stage_generate(paths, config, workers);
            std::cout << "generated " << read_manifest(paths.manifest()).size()
                      << " problems into " << batch_dir << "\n";
        } else if (label->parsed()) {
            const LabelSummary summary = stage_label(paths, workers, node_cap);
            std::cout << "labeled " << summary.labeled << " problems (" << summary.feasible
                      << " feasible, " << summary.infeasible << " infeasible)\n";
            for (const auto& h : summary.resource_errors) {
                std::cerr << "resource error (node cap): " << h << "\n";
            }
        } else if (render->parsed()) {
            const PromptTemplates templates = templates_dir.empty()
                                                  ? default_templates()
                                                  : load_templates_from_dir(templates_dir);
            const ExampleBank bank = bank_path.empty()
                                         ? default_example_bank()
                                         : parse_example_bank(read_text_file(bank_path));
            stage_render(paths, parse_styles(style_names), bank, templates, workers);
            std::cout << "rendered " << style_names.size() << " style(s) per problem\n";
        } else if (respond->parsed()) {
            EndpointConfig endpoint;
            endpoint.base_url = endpoint_url;
            endpoint.temperature = temperature;
            const RespondSummary summary =
                stage_respond(paths, endpoint, models, parse_styles(style_names), workers);
            std::cout << "requested " << summary.requested << ", skipped " << summary.skipped
                      << " existing, " << summary.failed << " failed\n";
        } else if (judge->parsed()) {
            const JudgeSummary summary = stage_judge(paths, workers, node_cap);
            std::cout << "judged " << summary.judged << " responses";
            if (summary.ignored > 0) std::cout << " (ignored " << summary.ignored << ")";
            std::cout << "\n";
        } else if (report->parsed()) {
            const MetricsReport metrics = stage_report(paths);
            std::cout << metrics_to_text(metrics);
        } else if (pddl_cmd->parsed()) {
            export_pddl(paths, workers);
            std::cout << "wrote PDDL files to " << paths.pddl_dir() << "\n";
        } else if (solve->parsed()) {
            const WorkflowProblem problem = load_problem(paths, hash);
            const PlanResult result = solve_optimal(problem, {}, node_cap);
            if (!result.solved()) {
                std::cout << "no plan\n";
            } else {
                std::cout << plan_to_text(problem, result.steps);
                std::cerr << "cost " << result.cost << ", length " << result.length << "\n";
            }
        } else if (validate_cmd->parsed()) {
            const WorkflowProblem problem = load_problem(paths, hash);
            Feasibility feasibility = manifest_feasibility(paths, hash);
            if (feasibility.state == Feasibility::State::Unknown) {
                const PlanResult result = solve_optimal(problem, {}, node_cap);
                feasibility = result.solved()
                                  ? Feasibility::feasible(result.cost, result.length)
                                  : Feasibility::infeasible();
            }
            const std::string text = read_text_file(response_path);
            nlohmann::json out;
            out["hash"] = hash;
            const auto style = style_from_name(response_style);
            if (!style) throw ConfigError("unknown style '" + response_style + "'");
            if (*style == PromptStyle::Translation) {
                std::optional<TranslationDoc> doc;
                try {
                    doc = parse_translation_response(text);
                } catch (const std::exception& e) {
                    out["translation_error"] = e.what();
                }
                const TranslationScore score = judge_translation(problem, doc);
                out["json_valid"] = score.json_valid;
                out["truth_elements"] = score.truth_elements;
                out["correct_elements"] = score.correct_elements;
                out["hallucinated_elements"] = score.hallucinated_elements;
                out["proportion_correct"] = score.proportion_correct;
            } else {
                const ParsedPlanResponse parsed = parse_plan_response(text);
                out["verdict"] = verdict_json(judge_plan(problem, feasibility, parsed, node_cap));
                if (parsed.outcome == ParsedPlanResponse::Outcome::ParseFailure) {
                    out["parse_failure"] = parsed.failure_reason;
                }
                if (emit_pddl) {
                    std::set<std::string> actions;
                    for (const auto& step : parsed.steps) {
                        if (step.kind == PlanStep::Kind::Invoke &&
                            problem.find_agent(step.name) != nullptr) {
                            actions.insert(step.name);
                        }
                    }
                    const std::string base = response_path;
                    write_text_file(base + ".domain_sound.pddl", pddl::compile_domain(problem));
                    write_text_file(base + ".problem_sound.pddl",
                                    pddl::compile_problem(
                                        problem, pddl::CompilationMode::soundness(actions)));
                    write_text_file(base + ".domain_valid.pddl", pddl::compile_domain(problem));
                    write_text_file(base + ".problem_valid.pddl",
                                    pddl::compile_problem(
                                        problem, pddl::CompilationMode::validity(actions)));
                }
            }
            std::cout << out.dump(2) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
