#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowplan/evaluator.hpp"
#include "flowplan/model.hpp"
#include "flowplan/nl.hpp"
#include "flowplan/planner.hpp"

namespace flowplan {

/// File layout of one batch directory.
struct BatchPaths {
    std::string root;

    std::string manifest() const { return root + "/manifest.tsv"; }
    std::string run_manifest() const { return root + "/run.json"; }
    std::string ir_dir() const { return root + "/ir"; }
    std::string pddl_dir() const { return root + "/pddl"; }
    std::string prompts_dir() const { return root + "/prompts"; }
    std::string prompt_index() const { return root + "/prompts/index.tsv"; }
    std::string responses_dir() const { return root + "/responses"; }
    std::string respond_errors() const { return root + "/respond_errors.tsv"; }
    std::string verdicts_dir() const { return root + "/verdicts"; }
    std::string report_dir() const { return root + "/report"; }

    std::string ir_file(const std::string& hash) const { return ir_dir() + "/" + hash + ".json"; }
    std::string prompt_file(const std::string& hash, const std::string& style) const {
        return prompts_dir() + "/" + hash + "." + style + ".txt";
    }
    std::string response_file(const std::string& hash, const std::string& model,
                              const std::string& style) const {
        return responses_dir() + "/" + hash + "." + model + "." + style + ".txt";
    }
    std::string verdict_file(const std::string& hash, const std::string& model,
                             const std::string& style) const {
        return verdicts_dir() + "/" + hash + "." + model + "." + style + ".json";
    }
};

/// Stage completion markers plus the run matrix. Stages form a DAG:
/// generate -> label -> render -> respond -> judge -> report; a stage runs
/// only when its predecessors are marked complete.
struct RunManifest {
    std::string config_digest;
    bool generated = false;
    bool labeled = false;
    bool rendered = false;
    bool judged = false;
    bool reported = false;
    std::vector<std::string> styles;
    std::vector<std::string> models;
    int workers = 0;
    double temperature = 0.0;
};

RunManifest load_run_manifest(const std::string& path);
void save_run_manifest(const std::string& path, const RunManifest& manifest);

/// One manifest.tsv row.
struct ManifestRow {
    std::string hash;
    GridPoint point;
    Feasibility feasibility;
    std::string ir_path;  // relative to the batch root
};

std::vector<ManifestRow> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows);

/// Parses a generation config JSON document. Every grid value must come from
/// the allowed sets; violations raise ConfigError citing the allowed set.
GeneratorConfig parse_config_json(std::string_view text);
GeneratorConfig load_config_file(const std::string& path);
std::string config_to_canonical_json(const GeneratorConfig& config);
std::string config_digest(const GeneratorConfig& config);

// ---- Stages ----

/// generate: IR files + manifest + run manifest. Idempotent for a fixed
/// config; refuses a batch directory holding a different config.
void stage_generate(const BatchPaths& paths, const GeneratorConfig& config, int workers = 0);

/// label: feasibility and optimal (cost, length) per problem. A planner
/// resource error is recorded as an unlabeled row and reported; the batch
/// continues.
struct LabelSummary {
    int labeled = 0;
    int feasible = 0;
    int infeasible = 0;
    std::vector<std::string> resource_errors;  // hashes the planner gave up on
};
LabelSummary stage_label(const BatchPaths& paths, int workers = 0,
                         std::uint64_t node_cap = kDefaultNodeCap);

/// render: one prompt file per (problem, style) plus a character-length index.
void stage_render(const BatchPaths& paths, const std::vector<PromptStyle>& styles,
                  const ExampleBank& bank, const PromptTemplates& templates, int workers = 0);

/// Optional PDDL export used alongside labeling: domain/problem files per
/// problem in optimality mode (suffix _optimal).
void export_pddl(const BatchPaths& paths, int workers = 0);

struct EndpointConfig {
    std::string base_url;          // e.g. http://127.0.0.1:8080/v1
    double temperature = 0.0;
    std::string api_key_env = "FLOWPLAN_API_KEY";
    int max_retries = 3;
    int timeout_seconds = 120;
};

struct RespondSummary {
    int requested = 0;
    int skipped = 0;  // response file already present
    int failed = 0;
};

/// respond: sends each missing (prompt, model) pair to a chat-completion
/// endpoint and writes raw response texts. Resumable; failures are recorded
/// in respond_errors.tsv and do not abort the run.
RespondSummary stage_respond(const BatchPaths& paths, const EndpointConfig& endpoint,
                             const std::vector<std::string>& models,
                             const std::vector<PromptStyle>& styles, int workers = 0);

/// judge: one verdict JSON per response file.
struct JudgeSummary {
    int judged = 0;
    int ignored = 0;  // response files for unknown hashes
};
JudgeSummary stage_judge(const BatchPaths& paths, int workers = 0,
                         std::uint64_t node_cap = kDefaultNodeCap);

/// report: metrics table (text + CSV) and the regression export.
MetricsReport stage_report(const BatchPaths& paths);

/// Loads every verdict back into memory (used by report and by tests).
std::vector<JudgedResponse> load_judged_responses(const BatchPaths& paths);

// Small file helpers shared by the CLI and tests.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace flowplan
