#include "flowplan/model.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "flowplan/digest.hpp"
#include "flowplan/error.hpp"
#include "json.hpp"

namespace flowplan {

using nlohmann::json;

bool id_matches(const std::string& name, const std::string& prefix) {
    const std::string head = prefix + "__";
    if (name.size() <= head.size() || name.compare(0, head.size(), head) != 0) {
        return false;
    }
    return std::all_of(name.begin() + static_cast<long>(head.size()), name.end(),
                       [](unsigned char c) { return c >= '0' && c <= '9'; });
}

int id_index(const std::string& name) {
    auto pos = name.rfind("__");
    if (pos == std::string::npos || pos + 2 >= name.size()) {
        throw ValidationError(name, "identifier has no numeric suffix");
    }
    int value = 0;
    for (std::size_t i = pos + 2; i < name.size(); ++i) {
        char c = name[i];
        if (c < '0' || c > '9') {
            throw ValidationError(name, "identifier has no numeric suffix");
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

const Agent* WorkflowProblem::find_agent(const std::string& id) const {
    for (const auto& agent : available_agents) {
        if (agent.id == id) return &agent;
    }
    return nullptr;
}

namespace {

std::optional<std::string> check_signature_side(const std::vector<VariableSpec>& side,
                                                const std::string& agent_id,
                                                const char* side_name) {
    if (side.empty()) {
        return agent_id + "." + side_name + ": signature side is empty";
    }
    std::unordered_set<std::string> seen;
    for (const auto& var : side) {
        if (!id_matches(var.name, "v")) {
            return agent_id + "." + side_name + ": variable name '" + var.name +
                   "' does not match v__<k>";
        }
        if (!seen.insert(var.name).second) {
            return agent_id + "." + side_name + ": duplicate variable '" + var.name + "'";
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::string> violated_invariant(const WorkflowProblem& problem) {
    std::unordered_set<std::string> agent_ids;
    // Per-variable flag consistency: the same name may occur in several
    // signatures but always with one slot_fillable value.
    std::unordered_map<std::string, bool> flags;
    for (const auto& agent : problem.available_agents) {
        if (!id_matches(agent.id, "a")) {
            return "agent id '" + agent.id + "' does not match a__<k>";
        }
        if (!agent_ids.insert(agent.id).second) {
            return "duplicate agent id '" + agent.id + "'";
        }
        if (auto err = check_signature_side(agent.signature.inputs, agent.id, "inputs")) {
            return err;
        }
        if (auto err = check_signature_side(agent.signature.outputs, agent.id, "outputs")) {
            return err;
        }
        for (const auto* side : {&agent.signature.inputs, &agent.signature.outputs}) {
            for (const auto& var : *side) {
                auto [it, inserted] = flags.emplace(var.name, var.slot_fillable);
                if (!inserted && it->second != var.slot_fillable) {
                    return "variable '" + var.name +
                           "' has conflicting slot_fillable flags across signatures";
                }
            }
        }
    }

    if (problem.goal_agent_ids.empty() || problem.goal_agent_ids.size() > 2) {
        return "goal_agent_ids must contain 1 or 2 ids";
    }
    std::unordered_set<std::string> goals;
    for (const auto& goal : problem.goal_agent_ids) {
        if (!goals.insert(goal).second) {
            return "duplicate goal agent id '" + goal + "'";
        }
        if (agent_ids.count(goal) == 0) {
            return "goal agent id '" + goal + "' names no available agent";
        }
    }

    std::unordered_set<std::string> data;
    for (const auto& name : problem.available_data) {
        if (!id_matches(name, "v")) {
            return "available_data name '" + name + "' does not match v__<k>";
        }
        if (!data.insert(name).second) {
            return "duplicate available_data variable '" + name + "'";
        }
        if (flags.count(name) != 0) {
            return "available_data variable '" + name + "' is used by an agent signature";
        }
    }
    return std::nullopt;
}

void validate(const WorkflowProblem& problem) {
    if (auto err = violated_invariant(problem)) {
        throw ValidationError(*err, "invariant violated");
    }
}

namespace {

json variable_to_json(const VariableSpec& var) {
    // nlohmann::json orders object keys lexicographically, which is exactly
    // the canonical order.
    json j;
    j["name"] = var.name;
    j["data_type"] = nullptr;
    j["mappable"] = false;
    j["slot_fillable"] = var.slot_fillable;
    return j;
}

json side_to_json(const std::vector<VariableSpec>& side) {
    json arr = json::array();
    for (const auto& var : side) arr.push_back(variable_to_json(var));
    return arr;
}

}  // namespace

std::string canonical_serialize(const WorkflowProblem& problem) {
    validate(problem);
    json root;
    json agents = json::array();
    for (const auto& agent : problem.available_agents) {
        json a;
        a["agent_id"] = agent.id;
        a["actuator_signature"]["in_sig_full"] = side_to_json(agent.signature.inputs);
        a["actuator_signature"]["out_sig_full"] = side_to_json(agent.signature.outputs);
        agents.push_back(std::move(a));
    }
    root["available_agents"] = std::move(agents);
    root["goal_agent_ids"] = problem.goal_agent_ids;
    root["mappings"] = json::array();
    json data = json::array();
    for (const auto& name : problem.available_data) {
        data.push_back(json::array({name, nullptr}));
    }
    root["available_data"] = std::move(data);
    return root.dump();
}

namespace {

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (allowed.count(key) == 0) {
            throw ValidationError(where.empty() ? key : where + "." + key, "unknown key");
        }
    }
    for (const auto& key : allowed) {
        if (!obj.contains(key)) {
            throw ValidationError(where.empty() ? key : where + "." + key, "missing key");
        }
    }
}

VariableSpec variable_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where, "variable entry must be an object");
    require_keys(j, {"name", "data_type", "mappable", "slot_fillable"}, where);
    if (!j["name"].is_string()) throw ValidationError(where + ".name", "must be a string");
    if (!j["data_type"].is_null()) {
        throw ValidationError(where + ".data_type", "must be null");
    }
    if (!j["mappable"].is_boolean() || j["mappable"].get<bool>()) {
        throw ValidationError(where + ".mappable", "must be false");
    }
    if (!j["slot_fillable"].is_boolean()) {
        throw ValidationError(where + ".slot_fillable", "must be a boolean");
    }
    return VariableSpec{j["name"].get<std::string>(), j["slot_fillable"].get<bool>()};
}

std::vector<VariableSpec> side_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) throw ValidationError(where, "must be an array");
    std::vector<VariableSpec> side;
    side.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        side.push_back(variable_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return side;
}

}  // namespace

WorkflowProblem parse_problem(std::string_view bytes) {
    json root;
    try {
        root = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    if (!root.is_object()) throw ValidationError("", "document must be a JSON object");
    require_keys(root, {"available_agents", "goal_agent_ids", "mappings", "available_data"},
                 "");

    WorkflowProblem problem;
    const json& agents = root["available_agents"];
    if (!agents.is_array()) throw ValidationError("available_agents", "must be an array");
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const std::string where = "available_agents[" + std::to_string(i) + "]";
        const json& a = agents[i];
        if (!a.is_object()) throw ValidationError(where, "must be an object");
        require_keys(a, {"agent_id", "actuator_signature"}, where);
        if (!a["agent_id"].is_string()) {
            throw ValidationError(where + ".agent_id", "must be a string");
        }
        const json& sig = a["actuator_signature"];
        if (!sig.is_object()) {
            throw ValidationError(where + ".actuator_signature", "must be an object");
        }
        require_keys(sig, {"in_sig_full", "out_sig_full"}, where + ".actuator_signature");
        Agent agent;
        agent.id = a["agent_id"].get<std::string>();
        agent.signature.inputs = side_from_json(sig["in_sig_full"], where + ".in_sig_full");
        agent.signature.outputs = side_from_json(sig["out_sig_full"], where + ".out_sig_full");
        problem.available_agents.push_back(std::move(agent));
    }

    const json& goals = root["goal_agent_ids"];
    if (!goals.is_array()) throw ValidationError("goal_agent_ids", "must be an array");
    for (const auto& g : goals) {
        if (!g.is_string()) throw ValidationError("goal_agent_ids", "entries must be strings");
        problem.goal_agent_ids.push_back(g.get<std::string>());
    }

    if (!root["mappings"].is_array() || !root["mappings"].empty()) {
        throw ValidationError("mappings", "must be an empty array");
    }

    const json& data = root["available_data"];
    if (!data.is_array()) throw ValidationError("available_data", "must be an array");
    for (std::size_t i = 0; i < data.size(); ++i) {
        const json& entry = data[i];
        const std::string where = "available_data[" + std::to_string(i) + "]";
        if (!entry.is_array() || entry.size() != 2) {
            throw ValidationError(where, "must be a [name, null] pair");
        }
        if (!entry[0].is_string()) throw ValidationError(where, "name must be a string");
        if (!entry[1].is_null()) throw ValidationError(where, "value must be null");
        problem.available_data.push_back(entry[0].get<std::string>());
    }

    validate(problem);
    return problem;
}

std::string content_hash(const WorkflowProblem& problem) {
    return sha256_hex(canonical_serialize(problem));
}

}  // namespace flowplan
