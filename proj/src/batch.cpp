#include "flowplan/batch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "flowplan/digest.hpp"
#include "flowplan/error.hpp"
#include "flowplan/generator.hpp"
#include "flowplan/parallel.hpp"
#include "flowplan/pddl.hpp"
#include "httplib.h"
#include "json.hpp"

namespace flowplan {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, std::string_view content) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

// ---- Run manifest ----

RunManifest load_run_manifest(const std::string& path) {
    json root = json::parse(read_text_file(path));
    RunManifest manifest;
    manifest.config_digest = root.value("config_digest", "");
    manifest.generated = root.value("generated", false);
    manifest.labeled = root.value("labeled", false);
    manifest.rendered = root.value("rendered", false);
    manifest.judged = root.value("judged", false);
    manifest.reported = root.value("reported", false);
    manifest.styles = root.value("styles", std::vector<std::string>{});
    manifest.models = root.value("models", std::vector<std::string>{});
    manifest.workers = root.value("workers", 0);
    manifest.temperature = root.value("temperature", 0.0);
    return manifest;
}

void save_run_manifest(const std::string& path, const RunManifest& manifest) {
    json root;
    root["config_digest"] = manifest.config_digest;
    root["generated"] = manifest.generated;
    root["labeled"] = manifest.labeled;
    root["rendered"] = manifest.rendered;
    root["judged"] = manifest.judged;
    root["reported"] = manifest.reported;
    root["styles"] = manifest.styles;
    root["models"] = manifest.models;
    root["workers"] = manifest.workers;
    root["temperature"] = manifest.temperature;
    write_text_file(path, root.dump(2) + "\n");
}

namespace {

RunManifest require_run_manifest(const BatchPaths& paths, const char* stage) {
    if (!fs::exists(paths.run_manifest())) {
        throw ConfigError(std::string("batch has no run manifest; run generate before ") +
                          stage);
    }
    return load_run_manifest(paths.run_manifest());
}

std::string fmt_grid_value(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", value);
    return buf;
}

}  // namespace

// ---- Batch manifest ----

void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows) {
    std::ostringstream out;
    out << "hash\tnum_actions\tarity\tcoupling\tslot_fillable_proportion\tnum_mappings\t"
           "num_goals\tfeasibility\toptimal_cost\toptimal_length\tir_path\n";
    for (const auto& row : rows) {
        out << row.hash << "\t" << row.point.num_actions << "\t" << row.point.arity << "\t"
            << fmt_grid_value(row.point.coupling) << "\t"
            << fmt_grid_value(row.point.slot_fillable_proportion) << "\t"
            << row.point.num_mappings << "\t" << row.point.num_goals << "\t";
        switch (row.feasibility.state) {
            case Feasibility::State::Unknown: out << "unknown\t-\t-"; break;
            case Feasibility::State::Infeasible: out << "infeasible\t-\t-"; break;
            case Feasibility::State::Feasible:
                out << "feasible\t" << row.feasibility.optimal_cost << "\t"
                    << row.feasibility.optimal_length;
                break;
        }
        out << "\t" << row.ir_path << "\n";
    }
    write_text_file(path, out.str());
}

std::vector<ManifestRow> read_manifest(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw ParseError("manifest is empty: " + path);
    std::vector<ManifestRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, '\t')) fields.push_back(field);
        if (fields.size() != 11) {
            throw ParseError("manifest row has " + std::to_string(fields.size()) +
                             " fields: " + line);
        }
        ManifestRow row;
        row.hash = fields[0];
        row.point.num_actions = std::stoi(fields[1]);
        row.point.arity = std::stoi(fields[2]);
        row.point.coupling = std::stod(fields[3]);
        row.point.slot_fillable_proportion = std::stod(fields[4]);
        row.point.num_mappings = std::stoi(fields[5]);
        row.point.num_goals = std::stoi(fields[6]);
        if (fields[7] == "unknown") {
            row.feasibility = Feasibility::unknown();
        } else if (fields[7] == "infeasible") {
            row.feasibility = Feasibility::infeasible();
        } else if (fields[7] == "feasible") {
            row.feasibility = Feasibility::feasible(std::stoll(fields[8]), std::stoi(fields[9]));
        } else {
            throw ParseError("unknown feasibility '" + fields[7] + "' in: " + line);
        }
        row.ir_path = fields[10];
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---- Config ----

namespace {

template <typename T>
void check_allowed(const std::vector<T>& values, const std::vector<T>& allowed,
                   const std::string& field) {
    std::set<T> seen;
    for (const T& value : values) {
        if (std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
            std::ostringstream out;
            out << field << " value ";
            if constexpr (std::is_same_v<T, double>) out << fmt_grid_value(value);
            else out << value;
            out << " is not allowed; allowed:";
            for (const T& a : allowed) {
                if constexpr (std::is_same_v<T, double>) out << " " << fmt_grid_value(a);
                else out << " " << a;
            }
            throw ConfigError(out.str());
        }
        if (!seen.insert(value).second) {
            throw ConfigError(field + " has a duplicate value");
        }
    }
    if (values.empty()) throw ConfigError(field + " list is empty");
}

}  // namespace

GeneratorConfig parse_config_json(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> kKeys = {
        "num_actions", "arity",        "coupling",         "slot_fillable_proportion",
        "num_mappings", "num_goals",   "num_variables",    "master_seed",
        "samples_per_point"};
    for (const auto& [key, value] : root.items()) {
        (void)value;
        if (kKeys.count(key) == 0) throw ConfigError("config: unknown key '" + key + "'");
    }

    GeneratorConfig config;
    auto fill = [&](const char* key, auto& out) {
        if (root.contains(key)) out = root[key].get<std::decay_t<decltype(out)>>();
    };
    fill("num_actions", config.num_actions);
    fill("arity", config.arity);
    fill("coupling", config.coupling);
    fill("slot_fillable_proportion", config.slot_fillable_proportion);
    fill("num_mappings", config.num_mappings);
    fill("num_goals", config.num_goals);
    fill("num_variables", config.num_variables);
    fill("master_seed", config.master_seed);
    fill("samples_per_point", config.samples_per_point);

    const GeneratorConfig allowed;  // default lists are the allowed sets
    check_allowed(config.num_actions, allowed.num_actions, "num_actions");
    check_allowed(config.arity, allowed.arity, "arity");
    check_allowed(config.coupling, allowed.coupling, "coupling");
    check_allowed(config.slot_fillable_proportion, allowed.slot_fillable_proportion,
                  "slot_fillable_proportion");
    check_allowed(config.num_mappings, allowed.num_mappings, "num_mappings");
    check_allowed(config.num_goals, allowed.num_goals, "num_goals");
    if (config.num_variables < 1) throw ConfigError("num_variables must be positive");
    if (config.samples_per_point < 0) throw ConfigError("samples_per_point must be >= 0");
    return config;
}

GeneratorConfig load_config_file(const std::string& path) {
    return parse_config_json(read_text_file(path));
}

std::string config_to_canonical_json(const GeneratorConfig& config) {
    json root;
    root["num_actions"] = config.num_actions;
    root["arity"] = config.arity;
    root["coupling"] = config.coupling;
    root["slot_fillable_proportion"] = config.slot_fillable_proportion;
    root["num_mappings"] = config.num_mappings;
    root["num_goals"] = config.num_goals;
    root["num_variables"] = config.num_variables;
    root["master_seed"] = config.master_seed;
    root["samples_per_point"] = config.samples_per_point;
    return root.dump();
}

std::string config_digest(const GeneratorConfig& config) {
    return sha256_hex(config_to_canonical_json(config));
}

// ---- Stages ----

void stage_generate(const BatchPaths& paths, const GeneratorConfig& config, int workers) {
    const std::string digest = config_digest(config);
    RunManifest run;
    if (fs::exists(paths.run_manifest())) {
        run = load_run_manifest(paths.run_manifest());
        if (run.config_digest != digest) {
            throw ConfigError("batch directory was generated with a different config");
        }
    }
    run.config_digest = digest;

    const std::vector<ProblemRecord> records = generate_batch(config, workers);
    fs::create_directories(paths.ir_dir());
    std::vector<ManifestRow> rows(records.size());
    parallel_for(records.size(), workers, [&](std::size_t i) {
        const ProblemRecord& record = records[i];
        const std::string ir = canonical_serialize(record.problem);
        const std::string path = paths.ir_file(record.hash);
        // Existing files are byte-identical by construction; skip the write.
        if (!fs::exists(path)) write_text_file(path, ir);
        rows[i] = {record.hash, record.point, record.feasibility, "ir/" + record.hash + ".json"};
    });

    if (fs::exists(paths.manifest())) {
        // Keep the labeled manifest intact; verify it matches this batch.
        const auto existing = read_manifest(paths.manifest());
        if (existing.size() != rows.size() ||
            !std::equal(existing.begin(), existing.end(), rows.begin(),
                        [](const ManifestRow& a, const ManifestRow& b) {
                            return a.hash == b.hash;
                        })) {
            throw ConfigError("existing manifest does not match the generated batch");
        }
    } else {
        write_manifest(paths.manifest(), rows);
    }
    run.generated = true;
    save_run_manifest(paths.run_manifest(), run);
}

LabelSummary stage_label(const BatchPaths& paths, int workers, std::uint64_t node_cap) {
    RunManifest run = require_run_manifest(paths, "label");
    if (!run.generated) throw ConfigError("label requires a completed generate stage");

    std::vector<ManifestRow> rows = read_manifest(paths.manifest());
    std::vector<std::string> errors(rows.size());
    parallel_for(rows.size(), workers, [&](std::size_t i) {
        ManifestRow& row = rows[i];
        try {
            const WorkflowProblem problem =
                parse_problem(read_text_file(paths.root + "/" + row.ir_path));
            const PlanResult result = solve_optimal(problem, {}, node_cap);
            row.feasibility = result.solved()
                                  ? Feasibility::feasible(result.cost, result.length)
                                  : Feasibility::infeasible();
        } catch (const ResourceError&) {
            row.feasibility = Feasibility::unknown();
            errors[i] = row.hash;
        }
    });

    write_manifest(paths.manifest(), rows);
    LabelSummary summary;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        switch (rows[i].feasibility.state) {
            case Feasibility::State::Feasible: ++summary.feasible; ++summary.labeled; break;
            case Feasibility::State::Infeasible: ++summary.infeasible; ++summary.labeled; break;
            case Feasibility::State::Unknown: summary.resource_errors.push_back(errors[i]); break;
        }
    }
    run.labeled = true;
    save_run_manifest(paths.run_manifest(), run);
    return summary;
}

void stage_render(const BatchPaths& paths, const std::vector<PromptStyle>& styles,
                  const ExampleBank& bank, const PromptTemplates& templates, int workers) {
    RunManifest run = require_run_manifest(paths, "render");
    if (!run.generated) throw ConfigError("render requires a completed generate stage");
    if (styles.empty()) throw ConfigError("render needs at least one style");

    const std::vector<ManifestRow> rows = read_manifest(paths.manifest());
    fs::create_directories(paths.prompts_dir());
    struct IndexEntry {
        std::string hash, style;
        std::size_t chars = 0;
    };
    std::vector<IndexEntry> index(rows.size() * styles.size());
    parallel_for(rows.size(), workers, [&](std::size_t i) {
        const WorkflowProblem problem =
            parse_problem(read_text_file(paths.root + "/" + rows[i].ir_path));
        for (std::size_t s = 0; s < styles.size(); ++s) {
            const RenderedPrompt prompt = render_prompt(problem, styles[s], bank, templates);
            write_text_file(paths.prompt_file(rows[i].hash, style_name(styles[s])),
                            prompt.text);
            index[i * styles.size() + s] = {rows[i].hash, style_name(styles[s]),
                                            prompt.char_length};
        }
    });

    std::ostringstream out;
    out << "hash\tstyle\tchar_length\tpath\n";
    for (const auto& entry : index) {
        out << entry.hash << "\t" << entry.style << "\t" << entry.chars << "\tprompts/"
            << entry.hash << "." << entry.style << ".txt\n";
    }
    write_text_file(paths.prompt_index(), out.str());

    for (const auto& style : styles) {
        const std::string name = style_name(style);
        if (std::find(run.styles.begin(), run.styles.end(), name) == run.styles.end()) {
            run.styles.push_back(name);
        }
    }
    run.rendered = true;
    save_run_manifest(paths.run_manifest(), run);
}

void export_pddl(const BatchPaths& paths, int workers) {
    RunManifest run = require_run_manifest(paths, "pddl export");
    if (!run.generated) throw ConfigError("pddl export requires a completed generate stage");
    const std::vector<ManifestRow> rows = read_manifest(paths.manifest());
    fs::create_directories(paths.pddl_dir());
    parallel_for(rows.size(), workers, [&](std::size_t i) {
        const WorkflowProblem problem =
            parse_problem(read_text_file(paths.root + "/" + rows[i].ir_path));
        const std::string base = paths.pddl_dir() + "/" + rows[i].hash;
        write_text_file(base + ".domain_optimal.pddl", pddl::compile_domain(problem));
        write_text_file(base + ".problem_optimal.pddl",
                        pddl::compile_problem(problem, pddl::CompilationMode::optimality()));
    });
}

namespace {

struct ParsedEndpoint {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix, possibly empty
};

ParsedEndpoint split_endpoint(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint must start with http:// or https://");
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

}  // namespace

RespondSummary stage_respond(const BatchPaths& paths, const EndpointConfig& endpoint,
                             const std::vector<std::string>& models,
                             const std::vector<PromptStyle>& styles, int workers) {
    RunManifest run = require_run_manifest(paths, "respond");
    if (!run.rendered) throw ConfigError("respond requires a completed render stage");
    if (models.empty()) throw ConfigError("respond needs at least one model");
    if (endpoint.base_url.empty()) {
        throw ConfigError(
            "no endpoint configured; responses can instead be copied into responses/");
    }

    struct Job {
        std::string hash, model, style, prompt_path, response_path;
    };
    std::vector<Job> jobs;
    RespondSummary summary;
    for (const auto& row : read_manifest(paths.manifest())) {
        for (const auto& style : styles) {
            for (const auto& model : models) {
                Job job{row.hash, model, style_name(style),
                        paths.prompt_file(row.hash, style_name(style)),
                        paths.response_file(row.hash, model, style_name(style))};
                if (fs::exists(job.response_path)) {
                    ++summary.skipped;
                } else {
                    jobs.push_back(std::move(job));
                }
            }
        }
    }
    summary.requested = static_cast<int>(jobs.size());
    fs::create_directories(paths.responses_dir());

    const ParsedEndpoint parsed = split_endpoint(endpoint.base_url);
    const char* key = endpoint.api_key_env.empty() ? nullptr
                                                   : std::getenv(endpoint.api_key_env.c_str());

    std::mutex error_mutex;
    std::vector<std::string> error_lines;
    parallel_for(jobs.size(), workers, [&](std::size_t i) {
        const Job& job = jobs[i];
        std::string failure;
        for (int attempt = 0; attempt < endpoint.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(200 * (1 << attempt)));
            }
            try {
                httplib::Client client(parsed.origin);
                client.set_read_timeout(endpoint.timeout_seconds, 0);
                client.set_connection_timeout(10, 0);
                httplib::Headers headers;
                if (key != nullptr) {
                    headers.emplace("Authorization", std::string("Bearer ") + key);
                }
                json body;
                body["model"] = job.model;
                body["temperature"] = endpoint.temperature;
                body["messages"] = json::array(
                    {json{{"role", "user"},
                          {"content", read_text_file(job.prompt_path)}}});
                auto result = client.Post(parsed.prefix + "/chat/completions", headers,
                                          body.dump(), "application/json");
                if (!result) {
                    failure = "transport error";
                    continue;
                }
                if (result->status != 200) {
                    failure = "http status " + std::to_string(result->status);
                    continue;
                }
                const json reply = json::parse(result->body);
                const std::string content =
                    reply.at("choices").at(0).at("message").at("content").get<std::string>();
                write_text_file(job.response_path, content);
                failure.clear();
                break;
            } catch (const std::exception& e) {
                failure = e.what();
            }
        }
        if (!failure.empty()) {
            std::lock_guard<std::mutex> lock(error_mutex);
            error_lines.push_back(job.hash + "\t" + job.model + "\t" + job.style + "\t" +
                                  failure);
        }
    });

    summary.failed = static_cast<int>(error_lines.size());
    std::sort(error_lines.begin(), error_lines.end());
    std::string error_text;
    for (const auto& line : error_lines) error_text += line + "\n";
    write_text_file(paths.respond_errors(), error_text);

    for (const auto& model : models) {
        if (std::find(run.models.begin(), run.models.end(), model) == run.models.end()) {
            run.models.push_back(model);
        }
    }
    run.temperature = endpoint.temperature;
    save_run_manifest(paths.run_manifest(), run);
    return summary;
}

namespace {

const char* mark_name(NoPlanMark mark) {
    switch (mark) {
        case NoPlanMark::NotApplicable: return "n/a";
        case NoPlanMark::Correct: return "correct";
        case NoPlanMark::Incorrect: return "incorrect";
    }
    return "n/a";
}

NoPlanMark mark_from_name(const std::string& name) {
    if (name == "correct") return NoPlanMark::Correct;
    if (name == "incorrect") return NoPlanMark::Incorrect;
    return NoPlanMark::NotApplicable;
}

json verdict_to_json(const PlanVerdict& verdict) {
    json out;
    out["parsed"] = verdict.parsed;
    out["claimed_no_plan"] = verdict.claimed_no_plan;
    out["sound"] = verdict.sound;
    out["valid"] = verdict.valid;
    out["optimal"] = verdict.optimal;
    out["no_plan_correct"] = mark_name(verdict.no_plan_correct);
    out["plan_length"] = verdict.plan_length;
    if (verdict.reference_length) out["reference_length"] = *verdict.reference_length;
    if (verdict.failure_reason) {
        out["failure_reason"] = failure_reason_name(*verdict.failure_reason);
    }
    if (verdict.crosscheck_sound) out["crosscheck_sound"] = *verdict.crosscheck_sound;
    if (verdict.crosscheck_valid) out["crosscheck_valid"] = *verdict.crosscheck_valid;
    if (verdict.crosscheck_agrees) out["crosscheck_agrees"] = *verdict.crosscheck_agrees;
    return out;
}

PlanVerdict verdict_from_json(const json& in) {
    PlanVerdict verdict;
    verdict.parsed = in.value("parsed", false);
    verdict.claimed_no_plan = in.value("claimed_no_plan", false);
    verdict.sound = in.value("sound", false);
    verdict.valid = in.value("valid", false);
    verdict.optimal = in.value("optimal", false);
    verdict.no_plan_correct = mark_from_name(in.value("no_plan_correct", "n/a"));
    verdict.plan_length = in.value("plan_length", 0);
    if (in.contains("reference_length")) verdict.reference_length = in["reference_length"];
    if (in.contains("crosscheck_sound")) verdict.crosscheck_sound = in["crosscheck_sound"];
    if (in.contains("crosscheck_valid")) verdict.crosscheck_valid = in["crosscheck_valid"];
    if (in.contains("crosscheck_agrees")) verdict.crosscheck_agrees = in["crosscheck_agrees"];
    return verdict;
}

struct ResponseFile {
    std::string hash, model, style, path;
};

std::vector<ResponseFile> list_response_files(const BatchPaths& paths) {
    std::vector<ResponseFile> files;
    if (!fs::exists(paths.responses_dir())) return files;
    for (const auto& entry : fs::directory_iterator(paths.responses_dir())) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() < 5 || name.substr(name.size() - 4) != ".txt") continue;
        const std::string stem = name.substr(0, name.size() - 4);
        const auto first = stem.find('.');
        const auto last = stem.rfind('.');
        if (first == std::string::npos || last == first) continue;  // need hash.model.style
        files.push_back({stem.substr(0, first), stem.substr(first + 1, last - first - 1),
                         stem.substr(last + 1), entry.path().string()});
    }
    std::sort(files.begin(), files.end(), [](const ResponseFile& a, const ResponseFile& b) {
        return std::tie(a.hash, a.model, a.style) < std::tie(b.hash, b.model, b.style);
    });
    return files;
}

}  // namespace

JudgeSummary stage_judge(const BatchPaths& paths, int workers, std::uint64_t node_cap) {
    RunManifest run = require_run_manifest(paths, "judge");
    if (!run.labeled) throw ConfigError("judge requires a completed label stage");

    std::map<std::string, ManifestRow> rows;
    for (auto& row : read_manifest(paths.manifest())) rows.emplace(row.hash, std::move(row));

    const std::vector<ResponseFile> files = list_response_files(paths);
    fs::create_directories(paths.verdicts_dir());
    JudgeSummary summary;
    std::vector<ResponseFile> judged;
    for (const auto& file : files) {
        if (rows.count(file.hash) == 0 || !style_from_name(file.style)) {
            ++summary.ignored;
        } else {
            judged.push_back(file);
        }
    }

    parallel_for(judged.size(), workers, [&](std::size_t i) {
        const ResponseFile& file = judged[i];
        const ManifestRow& row = rows.at(file.hash);
        const WorkflowProblem problem =
            parse_problem(read_text_file(paths.root + "/" + row.ir_path));

        json out;
        out["hash"] = file.hash;
        out["model"] = file.model;
        out["style"] = file.style;

        std::string text;
        bool readable = true;
        try {
            text = read_text_file(file.path);
        } catch (const ConfigError&) {
            readable = false;
        }

        if (*style_from_name(file.style) == PromptStyle::Translation) {
            std::optional<TranslationDoc> doc;
            std::string error;
            if (readable) {
                try {
                    doc = parse_translation_response(text);
                } catch (const std::exception& e) {
                    error = e.what();
                }
            } else {
                error = "response file unreadable";
            }
            const TranslationScore score = judge_translation(problem, doc);
            json t;
            t["json_valid"] = score.json_valid;
            t["truth_elements"] = score.truth_elements;
            t["correct_elements"] = score.correct_elements;
            t["hallucinated_elements"] = score.hallucinated_elements;
            t["proportion_correct"] = score.proportion_correct;
            if (!error.empty()) t["error"] = error;
            out["translation"] = std::move(t);
        } else {
            ParsedPlanResponse parsed;
            if (readable) {
                parsed = parse_plan_response(text);
            } else {
                parsed.outcome = ParsedPlanResponse::Outcome::ParseFailure;
                parsed.failure_reason = "response file unreadable";
            }
            const PlanVerdict verdict = judge_plan(problem, row.feasibility, parsed, node_cap);
            out["verdict"] = verdict_to_json(verdict);
            if (parsed.outcome == ParsedPlanResponse::Outcome::ParseFailure) {
                out["parse_failure"] = parsed.failure_reason;
            }
        }
        write_text_file(paths.verdict_file(file.hash, file.model, file.style),
                        out.dump(2) + "\n");
    });
    summary.judged = static_cast<int>(judged.size());

    run.judged = true;
    save_run_manifest(paths.run_manifest(), run);
    return summary;
}

std::vector<JudgedResponse> load_judged_responses(const BatchPaths& paths) {
    std::map<std::string, ManifestRow> rows;
    for (auto& row : read_manifest(paths.manifest())) rows.emplace(row.hash, std::move(row));

    std::vector<JudgedResponse> responses;
    if (!fs::exists(paths.verdicts_dir())) return responses;
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(paths.verdicts_dir())) {
        if (entry.is_regular_file()) files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        const json in = json::parse(read_text_file(path));
        JudgedResponse response;
        response.hash = in.at("hash");
        response.model = in.at("model");
        response.style = in.at("style");
        auto it = rows.find(response.hash);
        if (it == rows.end()) continue;
        response.point = it->second.point;
        response.feasibility = it->second.feasibility;
        if (in.contains("verdict")) response.verdict = verdict_from_json(in["verdict"]);
        if (in.contains("translation")) {
            TranslationScore score;
            const json& t = in["translation"];
            score.json_valid = t.value("json_valid", false);
            score.truth_elements = t.value("truth_elements", 0);
            score.correct_elements = t.value("correct_elements", 0);
            score.hallucinated_elements = t.value("hallucinated_elements", 0);
            score.proportion_correct = t.value("proportion_correct", 0.0);
            response.score = score;
        }
        responses.push_back(std::move(response));
    }
    return responses;
}

MetricsReport stage_report(const BatchPaths& paths) {
    RunManifest run = require_run_manifest(paths, "report");
    if (!run.judged) throw ConfigError("report requires a completed judge stage");

    const std::vector<JudgedResponse> responses = load_judged_responses(paths);
    const MetricsReport report = aggregate_metrics(responses);
    fs::create_directories(paths.report_dir());
    write_text_file(paths.report_dir() + "/metrics.txt", metrics_to_text(report));
    write_text_file(paths.report_dir() + "/metrics.csv", metrics_to_csv(report));
    if (!responses.empty()) {
        write_text_file(paths.report_dir() + "/regression.csv",
                        regression_to_csv(export_regression(responses)));
    }
    run.reported = true;
    save_run_manifest(paths.run_manifest(), run);
    return report;
}

}  // namespace flowplan
