#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowplan/model.hpp"
#include "flowplan/planner.hpp"

namespace flowplan {

enum class PromptStyle { Verbose, Concise, Translation };

const char* style_name(PromptStyle style);                    // "verbose", ...
std::optional<PromptStyle> style_from_name(std::string_view name);

/// The three prompt templates. Each carries {context} and {examples}
/// placeholder markers; everything else is emitted verbatim.
struct PromptTemplates {
    std::string verbose;
    std::string concise;
    std::string translation;
};

/// Few-shot demonstration: a small problem, a written-out explanation, and
/// the plan text ("no plan" for unsolvable demonstrations). Translation
/// prompts derive the JSON answer from the same problem.
struct ExampleRecord {
    WorkflowProblem problem;
    std::string explanation;
    std::string plan_text;
};

using ExampleBank = std::vector<ExampleRecord>;

/// Templates and the example bank shipped with the library (embedded copies
/// of the data/ files).
const PromptTemplates& default_templates();
const ExampleBank& default_example_bank();

PromptTemplates load_templates_from_dir(const std::string& dir);
ExampleBank parse_example_bank(std::string_view json_text);

struct RenderedPrompt {
    std::string text;
    PromptStyle style = PromptStyle::Verbose;
    std::string problem_hash;
    std::size_t char_length = 0;
};

/// Natural-language context for one problem in the given style (the CONTEXT
/// section body).
std::string render_context(const WorkflowProblem& problem, PromptStyle style);

/// Full prompt: context, instruction, examples, final cue. Deterministic.
/// Throws ConfigError when the bank is empty or a template lacks its markers.
RenderedPrompt render_prompt(const WorkflowProblem& problem, PromptStyle style,
                             const ExampleBank& bank, const PromptTemplates& templates);
RenderedPrompt render_prompt(const WorkflowProblem& problem, PromptStyle style);

/// Per-step diagnostics kept from the response text; not used for judging.
struct StepDiagnostics {
    std::vector<std::string> declared_outputs;
    std::vector<std::string> args;
};

struct ParsedPlanResponse {
    enum class Outcome { Plan, NoPlan, ParseFailure };
    Outcome outcome = Outcome::ParseFailure;
    std::vector<PlanStep> steps;             // Plan only
    std::vector<StepDiagnostics> diagnostics;  // parallel to steps
    std::string failure_reason;              // ParseFailure only
    bool explanation_present = false;
};

/// Total parser for plan responses: every input maps to Plan, NoPlan, or
/// ParseFailure; never throws. Reads the section after the last PLAN header;
/// a headerless response consisting solely of "no plan" also counts.
ParsedPlanResponse parse_plan_response(std::string_view text);

struct TranslationAction {
    std::string id;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    friend bool operator==(const TranslationAction&, const TranslationAction&) = default;
};

/// The flat translation schema: exactly the fields actions, mappings,
/// available_data, askable_parameters, unaskable_parameters, goal_action_ids.
/// mappings is always empty in scope and is not stored.
struct TranslationDoc {
    std::vector<TranslationAction> actions;
    std::vector<std::string> available_data;
    std::vector<std::string> askable_parameters;
    std::vector<std::string> unaskable_parameters;
    std::vector<std::string> goal_action_ids;
    friend bool operator==(const TranslationDoc&, const TranslationDoc&) = default;
};

/// Extracts the longest balanced top-level JSON object from `text` and
/// validates it against the schema. Throws ParseError when no JSON object is
/// found or it does not parse; ValidationError (naming the field) on any
/// schema mismatch. Duplicates within lists are preserved.
TranslationDoc parse_translation_response(std::string_view text);

/// Lossless projection of the problem into the translation schema: askable
/// parameters are the slot-fillable signature variables plus available data;
/// unaskable parameters are the remaining signature variables.
TranslationDoc reference_translation(const WorkflowProblem& problem);

/// Canonical JSON text of a translation document (pretty, schema key order).
std::string translation_to_json(const TranslationDoc& doc);

/// Response text an ideal planner-backed model would produce: explanation
/// section plus the reference plan, or a bare no-plan claim.
std::string oracle_plan_response(const WorkflowProblem& problem, const PlanResult& result);

}  // namespace flowplan
