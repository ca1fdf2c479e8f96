#include "flowplan/nl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "flowplan/error.hpp"
#include "flowplan_default_data.hpp"
#include "json.hpp"

namespace flowplan {

using nlohmann::json;
using nlohmann::ordered_json;

const char* style_name(PromptStyle style) {
    switch (style) {
        case PromptStyle::Verbose: return "verbose";
        case PromptStyle::Concise: return "concise";
        case PromptStyle::Translation: return "translation";
    }
    return "unknown";
}

std::optional<PromptStyle> style_from_name(std::string_view name) {
    if (name == "verbose") return PromptStyle::Verbose;
    if (name == "concise") return PromptStyle::Concise;
    if (name == "translation") return PromptStyle::Translation;
    return std::nullopt;
}

namespace {

std::string trim(std::string_view text) {
    std::size_t begin = 0, end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return std::string(text.substr(begin, end - begin));
}

std::string lower(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

/// "a", "a and b", "a, b, and c".
std::string join_english(const std::vector<std::string>& items) {
    if (items.empty()) return "none";
    if (items.size() == 1) return items[0];
    if (items.size() == 2) return items[0] + " and " + items[1];
    std::string out;
    for (std::size_t i = 0; i + 1 < items.size(); ++i) out += items[i] + ", ";
    return out + "and " + items.back();
}

std::string join_comma(const std::vector<std::string>& items) {
    if (items.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ", ";
        out += items[i];
    }
    return out;
}

std::vector<std::string> side_names(const std::vector<VariableSpec>& side) {
    std::vector<std::string> names;
    names.reserve(side.size());
    for (const auto& var : side) names.push_back(var.name);
    return names;
}

std::string replace_marker(std::string text, const std::string& marker,
                           const std::string& value) {
    auto at = text.find(marker);
    if (at == std::string::npos) {
        throw ConfigError("prompt template lacks the " + marker + " marker");
    }
    return text.replace(at, marker.size(), value);
}

}  // namespace

const PromptTemplates& default_templates() {
    static const PromptTemplates templates{
        std::string(detail::kVerbosePlanningTemplate),
        std::string(detail::kConcisePlanningTemplate),
        std::string(detail::kTranslationTemplate),
    };
    return templates;
}

const ExampleBank& default_example_bank() {
    static const ExampleBank bank = parse_example_bank(detail::kExampleBankJson);
    return bank;
}

PromptTemplates load_templates_from_dir(const std::string& dir) {
    auto read = [&](const std::string& file) {
        std::ifstream in(dir + "/" + file, std::ios::binary);
        if (!in) throw ConfigError("cannot read prompt template " + dir + "/" + file);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };
    return {read("verbose_planning_prompt.txt"), read("concise_planning_prompt.txt"),
            read("translation_prompt.txt")};
}

ExampleBank parse_example_bank(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("example bank: ") + e.what(), e.byte);
    }
    if (!root.is_object() || !root.contains("examples") || !root["examples"].is_array()) {
        throw ValidationError("examples", "example bank must hold an examples array");
    }
    ExampleBank bank;
    for (const auto& entry : root["examples"]) {
        if (!entry.is_object() || !entry.contains("problem") || !entry.contains("explanation") ||
            !entry.contains("plan")) {
            throw ValidationError("examples", "each example needs problem/explanation/plan");
        }
        ExampleRecord record;
        record.problem = parse_problem(entry["problem"].dump());
        record.explanation = entry["explanation"].get<std::string>();
        record.plan_text = entry["plan"].get<std::string>();
        bank.push_back(std::move(record));
    }
    return bank;
}

namespace {

std::string verbose_context(const WorkflowProblem& problem, const TranslationDoc& ref) {
    std::ostringstream out;
    std::vector<std::string> ids;
    for (const auto& agent : problem.available_agents) ids.push_back(agent.id);
    out << "The system has actions " << join_english(ids) << ".\n";
    for (const auto& agent : problem.available_agents) {
        const std::string inputs = join_english(side_names(agent.signature.inputs));
        const std::string outputs = join_english(side_names(agent.signature.outputs));
        out << "Action " << agent.id << " has input parameters " << inputs
            << " and it outputs variables " << outputs << ". To execute action " << agent.id
            << ", variables " << inputs << " must be known. After executing action "
            << agent.id << ", variables " << outputs << " are known.\n";
    }
    out << "Values are already known for the following variables: "
        << join_english(ref.available_data) << ".\n";
    out << "The following variables can be acquired by asking the user: "
        << join_english(ref.askable_parameters) << ".\n";
    out << "The following variables cannot be asked: "
        << join_english(ref.unaskable_parameters) << ".\n";
    if (problem.goal_agent_ids.size() == 1) {
        out << "The goal is to execute action " << problem.goal_agent_ids[0] << ".";
    } else {
        out << "The goals are to execute actions " << join_english(problem.goal_agent_ids)
            << ".";
    }
    return out.str();
}

std::string concise_context(const WorkflowProblem& problem, const TranslationDoc& ref) {
    std::ostringstream out;
    std::vector<std::string> ids;
    for (const auto& agent : problem.available_agents) ids.push_back(agent.id);
    out << "The system has actions " << join_english(ids)
        << ". To execute an action the values of their inputs must be known.\n\nactions:\n";
    for (const auto& agent : problem.available_agents) {
        out << "\nname: " << agent.id << "\n";
        out << "inputs: " << join_comma(side_names(agent.signature.inputs)) << "\n";
        out << "outputs: " << join_comma(side_names(agent.signature.outputs)) << "\n";
    }
    out << "\navailable data: " << join_comma(ref.available_data) << "\n";
    out << "askable parameters: " << join_comma(ref.askable_parameters) << "\n";
    out << "unaskable parameters: " << join_comma(ref.unaskable_parameters) << "\n";
    out << "goals: " << join_comma(problem.goal_agent_ids);
    return out.str();
}

}  // namespace

std::string render_context(const WorkflowProblem& problem, PromptStyle style) {
    const TranslationDoc ref = reference_translation(problem);
    switch (style) {
        case PromptStyle::Concise: return concise_context(problem, ref);
        case PromptStyle::Verbose:
        case PromptStyle::Translation: return verbose_context(problem, ref);
    }
    return {};
}

RenderedPrompt render_prompt(const WorkflowProblem& problem, PromptStyle style,
                             const ExampleBank& bank, const PromptTemplates& templates) {
    if (bank.empty()) throw ConfigError("example bank is empty");
    validate(problem);

    std::ostringstream examples;
    for (std::size_t i = 0; i < bank.size(); ++i) {
        if (i > 0) examples << "\n\n";
        examples << "Example #" << (i + 1) << "\n";
        examples << "CONTEXT\n" << render_context(bank[i].problem, style) << "\n\n";
        if (style == PromptStyle::Translation) {
            examples << translation_to_json(reference_translation(bank[i].problem));
        } else {
            examples << "PLAN EXPLANATION\n" << bank[i].explanation << "\nPLAN\n"
                     << bank[i].plan_text;
        }
    }

    const std::string* base = &templates.verbose;
    if (style == PromptStyle::Concise) base = &templates.concise;
    if (style == PromptStyle::Translation) base = &templates.translation;

    RenderedPrompt prompt;
    prompt.style = style;
    prompt.problem_hash = content_hash(problem);
    prompt.text = replace_marker(
        replace_marker(*base, "{context}", render_context(problem, style)), "{examples}",
        examples.str());
    prompt.char_length = prompt.text.size();
    return prompt;
}

RenderedPrompt render_prompt(const WorkflowProblem& problem, PromptStyle style) {
    return render_prompt(problem, style, default_example_bank(), default_templates());
}

namespace {

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    lines.push_back(current);
    return lines;
}

/// Splits a comma-separated run into trimmed tokens; empty run -> {}.
std::optional<std::vector<std::string>> split_name_list(const std::string& run) {
    std::vector<std::string> tokens;
    if (trim(run).empty()) return tokens;
    std::stringstream stream(run);
    std::string piece;
    while (std::getline(stream, piece, ',')) {
        std::string token = trim(piece);
        if (token.empty()) return std::nullopt;
        tokens.push_back(std::move(token));
    }
    return tokens;
}

ParsedPlanResponse parse_failure(const std::string& reason) {
    ParsedPlanResponse response;
    response.outcome = ParsedPlanResponse::Outcome::ParseFailure;
    response.failure_reason = reason;
    return response;
}

}  // namespace

ParsedPlanResponse parse_plan_response(std::string_view text) {
    static const std::regex kStepLine(
        R"(^\s*\[\s*(\d+)\s*\]\s*(?:([^=()]*)=)?\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(([^()]*)\)\s*$)");

    const std::vector<std::string> lines = split_lines(text);
    std::ptrdiff_t plan_at = -1;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]) == "PLAN") plan_at = static_cast<std::ptrdiff_t>(i);
    }
    bool explanation = false;
    for (std::ptrdiff_t i = 0; i < plan_at; ++i) {
        if (trim(lines[static_cast<std::size_t>(i)]) == "PLAN EXPLANATION") explanation = true;
    }

    if (plan_at < 0) {
        if (lower(trim(text)) == "no plan") {
            ParsedPlanResponse response;
            response.outcome = ParsedPlanResponse::Outcome::NoPlan;
            return response;
        }
        return parse_failure("missing PLAN section");
    }

    std::string section;
    for (std::size_t i = static_cast<std::size_t>(plan_at) + 1; i < lines.size(); ++i) {
        section += lines[i];
        section += "\n";
    }
    const std::string flat = trim(section);
    if (flat.empty() || lower(flat) == "no plan") {
        ParsedPlanResponse response;
        response.outcome = ParsedPlanResponse::Outcome::NoPlan;
        response.explanation_present = explanation;
        return response;
    }

    ParsedPlanResponse response;
    response.outcome = ParsedPlanResponse::Outcome::Plan;
    response.explanation_present = explanation;
    int expected_index = 0;
    for (std::size_t i = static_cast<std::size_t>(plan_at) + 1; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (trim(line).empty()) continue;
        std::smatch match;
        if (!std::regex_match(line, match, kStepLine)) {
            return parse_failure("unparseable plan line: " + trim(line));
        }
        if (std::stoll(match[1].str()) != expected_index) {
            return parse_failure("non-contiguous step index in: " + trim(line));
        }
        ++expected_index;

        auto outputs = split_name_list(match[2].str());
        auto args = split_name_list(match[4].str());
        if (!outputs || !args) {
            return parse_failure("malformed name list in: " + trim(line));
        }
        for (const auto* list : {&*outputs, &*args}) {
            for (const auto& name : *list) {
                if (!id_matches(name, "v")) {
                    return parse_failure("'" + name + "' is not a variable name in: " +
                                         trim(line));
                }
            }
        }

        const std::string name = match[3].str();
        if (name == "ask") {
            if (args->size() != 1) {
                return parse_failure("ask takes exactly one variable in: " + trim(line));
            }
            response.steps.push_back(PlanStep::ask((*args)[0]));
        } else if (id_matches(name, "a")) {
            response.steps.push_back(PlanStep::invoke(name));
        } else {
            return parse_failure("unknown action name '" + name + "' in: " + trim(line));
        }
        response.diagnostics.push_back({std::move(*outputs), std::move(*args)});
    }
    return response;
}

namespace {

/// Longest balanced top-level {...} region, string-aware.
std::optional<std::string> extract_json_object(std::string_view text) {
    std::optional<std::string> best;
    std::size_t start = 0;
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"' && depth > 0) {
            in_string = true;
        } else if (c == '{') {
            if (depth == 0) start = i;
            ++depth;
        } else if (c == '}') {
            if (depth > 0 && --depth == 0) {
                const std::size_t length = i - start + 1;
                if (!best || length > best->size()) {
                    best = std::string(text.substr(start, length));
                }
            }
        }
    }
    return best;
}

std::vector<std::string> string_list(const json& j, const std::string& field) {
    if (!j.is_array()) throw ValidationError(field, "must be an array");
    std::vector<std::string> out;
    for (const auto& entry : j) {
        if (!entry.is_string()) throw ValidationError(field, "entries must be strings");
        out.push_back(entry.get<std::string>());
    }
    return out;
}

}  // namespace

TranslationDoc parse_translation_response(std::string_view text) {
    const auto object_text = extract_json_object(text);
    if (!object_text) throw ParseError("no JSON object found");
    json root;
    try {
        root = json::parse(*object_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte);
    }
    if (!root.is_object()) throw ParseError("no JSON object found");

    static const std::set<std::string> kFields = {
        "actions",           "mappings",           "available_data",
        "askable_parameters", "unaskable_parameters", "goal_action_ids"};
    for (const auto& [key, value] : root.items()) {
        (void)value;
        if (kFields.count(key) == 0) throw ValidationError(key, "unknown field");
    }
    for (const auto& field : kFields) {
        if (!root.contains(field)) throw ValidationError(field, "missing field");
    }

    TranslationDoc doc;
    if (!root["actions"].is_array()) throw ValidationError("actions", "must be an array");
    for (const auto& entry : root["actions"]) {
        if (!entry.is_object()) throw ValidationError("actions", "entries must be objects");
        for (const auto& [key, value] : entry.items()) {
            (void)value;
            if (key != "id" && key != "input" && key != "output") {
                throw ValidationError("actions." + key, "unknown field");
            }
        }
        for (const char* key : {"id", "input", "output"}) {
            if (!entry.contains(key)) {
                throw ValidationError(std::string("actions.") + key, "missing field");
            }
        }
        if (!entry["id"].is_string()) throw ValidationError("actions.id", "must be a string");
        TranslationAction action;
        action.id = entry["id"].get<std::string>();
        action.inputs = string_list(entry["input"], "actions.input");
        action.outputs = string_list(entry["output"], "actions.output");
        doc.actions.push_back(std::move(action));
    }
    if (!root["mappings"].is_array()) throw ValidationError("mappings", "must be an array");
    doc.available_data = string_list(root["available_data"], "available_data");
    doc.askable_parameters = string_list(root["askable_parameters"], "askable_parameters");
    doc.unaskable_parameters = string_list(root["unaskable_parameters"], "unaskable_parameters");
    doc.goal_action_ids = string_list(root["goal_action_ids"], "goal_action_ids");
    return doc;
}

TranslationDoc reference_translation(const WorkflowProblem& problem) {
    validate(problem);
    TranslationDoc doc;
    for (const auto& agent : problem.available_agents) {
        doc.actions.push_back({agent.id, side_names(agent.signature.inputs),
                               side_names(agent.signature.outputs)});
    }
    doc.available_data = problem.available_data;

    std::map<int, std::pair<std::string, bool>> signature_vars;  // index -> (name, fillable)
    for (const auto& agent : problem.available_agents) {
        for (const auto* side : {&agent.signature.inputs, &agent.signature.outputs}) {
            for (const auto& var : *side) {
                signature_vars.emplace(id_index(var.name),
                                       std::pair{var.name, var.slot_fillable});
            }
        }
    }
    std::map<int, std::string> askable;
    for (const auto& [index, entry] : signature_vars) {
        if (entry.second) {
            askable.emplace(index, entry.first);
        } else {
            doc.unaskable_parameters.push_back(entry.first);
        }
    }
    for (const auto& name : problem.available_data) askable.emplace(id_index(name), name);
    for (const auto& [index, name] : askable) doc.askable_parameters.push_back(name);

    doc.goal_action_ids = problem.goal_agent_ids;
    return doc;
}

std::string translation_to_json(const TranslationDoc& doc) {
    ordered_json root;
    root["actions"] = ordered_json::array();
    for (const auto& action : doc.actions) {
        ordered_json a;
        a["id"] = action.id;
        a["input"] = action.inputs;
        a["output"] = action.outputs;
        root["actions"].push_back(std::move(a));
    }
    root["mappings"] = ordered_json::array();
    root["available_data"] = doc.available_data;
    root["askable_parameters"] = doc.askable_parameters;
    root["unaskable_parameters"] = doc.unaskable_parameters;
    root["goal_action_ids"] = doc.goal_action_ids;
    return root.dump(4);
}

std::string oracle_plan_response(const WorkflowProblem& problem, const PlanResult& result) {
    std::ostringstream out;
    out << "PLAN EXPLANATION\n";
    if (!result.solved()) {
        out << "The goals cannot be achieved with the available actions and askable "
               "variables.\nPLAN\nno plan\n";
        return out.str();
    }
    const std::set<std::string> goals(problem.goal_agent_ids.begin(),
                                      problem.goal_agent_ids.end());
    for (std::size_t i = 0; i < result.steps.size(); ++i) {
        const PlanStep& step = result.steps[i];
        out << i << ". ";
        if (step.kind == PlanStep::Kind::Ask) {
            out << "Ask the user for the value of " << step.name << ".";
        } else {
            const Agent* agent = problem.find_agent(step.name);
            const std::string inputs = join_english(side_names(agent->signature.inputs));
            out << "Execute action " << step.name << " with " << inputs << " as input."
                << " This will result in acquiring "
                << join_english(side_names(agent->signature.outputs)) << ".";
            if (goals.count(step.name) != 0) {
                out << " Since executing " << step.name
                    << " was a goal of this plan, return the results of " << step.name << "("
                    << inputs << ") to the user.";
            }
        }
        out << "\n";
    }
    out << "PLAN\n" << plan_to_text(problem, result.steps);
    return out.str();
}

}  // namespace flowplan
