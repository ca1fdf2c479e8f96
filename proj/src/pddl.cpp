#include "flowplan/pddl.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace flowplan::pddl {

const char* mode_suffix(CompilationMode::Kind kind) {
    switch (kind) {
        case CompilationMode::Kind::Optimality: return "_optimal";
        case CompilationMode::Kind::Soundness: return "_sound";
        case CompilationMode::Kind::Validity: return "_valid";
    }
    return "";
}

namespace {

constexpr const char* kDomainName = "workflow";

std::vector<std::string> sorted_by_index(std::vector<std::string> names) {
    std::sort(names.begin(), names.end(),
              [](const auto& a, const auto& b) { return id_index(a) < id_index(b); });
    return names;
}

/// Variable universe: signature variables and available data, by index.
/// The bool marks slot-fillability; available_data variables carry no flag
/// in the representation and compile as slot-fillable (ask is blocked for
/// them by the initial known fact regardless).
std::vector<std::pair<std::string, bool>> variable_universe(const WorkflowProblem& problem) {
    std::map<int, std::pair<std::string, bool>> by_index;
    for (const auto& agent : problem.available_agents) {
        for (const auto* side : {&agent.signature.inputs, &agent.signature.outputs}) {
            for (const auto& var : *side) {
                by_index.emplace(id_index(var.name), std::pair{var.name, var.slot_fillable});
            }
        }
    }
    for (const auto& name : problem.available_data) {
        by_index.emplace(id_index(name), std::pair{name, true});
    }
    std::vector<std::pair<std::string, bool>> universe;
    universe.reserve(by_index.size());
    for (auto& [index, entry] : by_index) universe.push_back(std::move(entry));
    return universe;
}

Atom decl(const std::string& name, std::initializer_list<const char*> args) {
    Atom atom{name, {}};
    for (const char* arg : args) atom.args.emplace_back(arg);
    return atom;
}

Literal pos(std::string name, std::vector<std::string> args) {
    return {false, {std::move(name), std::move(args)}};
}

Literal neg(std::string name, std::vector<std::string> args) {
    return {true, {std::move(name), std::move(args)}};
}

}  // namespace

Domain build_domain(const WorkflowProblem& problem) {
    validate(problem);
    Domain domain;
    domain.name = kDomainName;
    domain.requirements = {":strips", ":typing", ":negative-preconditions", ":action-costs"};
    domain.types = {{{"generic", "operator", "has-done-state", "constraint-status",
                      "datum-state", "label"},
                     "object"}};

    std::vector<std::string> variables;
    for (const auto& [name, fillable] : variable_universe(problem)) variables.push_back(name);
    std::vector<std::string> agents;
    for (const auto& agent : problem.available_agents) agents.push_back(agent.id);
    agents = sorted_by_index(std::move(agents));

    domain.constants = {
        {variables, "generic"},
        {agents, "operator"},
        {{"past", "present", "future"}, "has-done-state"},
        {{"True", "False"}, "constraint-status"},
        {{"certain", "uncertain", "unknown"}, "datum-state"},
    };

    domain.predicates = {
        decl("has_done", {"?x", "-", "operator", "?x2", "-", "has-done-state"}),
        decl("been_used", {"?x", "-", "generic"}),
        decl("new_item", {"?x", "-", "generic"}),
        decl("known", {"?x", "-", "generic", "?x2", "-", "datum-state"}),
        decl("not_slotfillable", {"?x", "-", "generic"}),
        decl("is_mappable", {"?x", "-", "generic", "?x2", "-", "generic"}),
        decl("not_mappable", {"?x", "-", "generic", "?x2", "-", "generic"}),
        decl("mapped", {"?x", "-", "generic"}),
        decl("not_usable", {"?x", "-", "generic"}),
        decl("mapped_to", {"?x", "-", "generic", "?x2", "-", "generic"}),
        decl("free", {"?x", "-", "generic"}),
        decl("done_goal_pre", {}),
        decl("done_goal_post", {}),
    };
    domain.functions = {
        decl("total-cost", {}),
        decl("slot_goodness", {"?x", "-", "generic"}),
        decl("affinity", {"?x", "-", "generic", "?x2", "-", "generic"}),
    };

    std::unordered_map<std::string, const Agent*> by_id;
    for (const auto& agent : problem.available_agents) by_id[agent.id] = &agent;
    for (const auto& id : agents) {
        const Agent& agent = *by_id.at(id);
        Action action;
        action.name = agent.id;
        action.precondition.push_back(neg("has_done", {agent.id, "past"}));
        for (const auto& var : agent.signature.inputs) {
            action.precondition.push_back(pos("known", {var.name, "certain"}));
        }
        action.effect.emplace_back(pos("has_done", {agent.id, "present"}));
        for (const auto& var : agent.signature.inputs) {
            action.effect.emplace_back(pos("been_used", {var.name}));
        }
        for (const auto& var : agent.signature.outputs) {
            action.effect.emplace_back(pos("free", {var.name}));
            action.effect.emplace_back(pos("known", {var.name, "certain"}));
            action.effect.emplace_back(neg("mapped", {var.name}));
        }
        action.effect.emplace_back(Increase{{"total-cost", {}}, std::int64_t{10}});
        domain.actions.push_back(std::move(action));
    }

    Action ask;
    ask.name = "ask";
    ask.parameters = {{{"?x"}, "generic"}};
    ask.precondition.push_back(neg("known", {"?x", "certain"}));
    ask.precondition.push_back(neg("not_slotfillable", {"?x"}));
    ask.effect.emplace_back(pos("free", {"?x"}));
    ask.effect.emplace_back(pos("mapped_to", {"?x", "?x"}));
    ask.effect.emplace_back(pos("known", {"?x", "certain"}));
    ask.effect.emplace_back(neg("not_usable", {"?x"}));
    ask.effect.emplace_back(neg("mapped", {"?x"}));
    ask.effect.emplace_back(Increase{{"total-cost", {}}, Atom{"slot_goodness", {"?x"}}});
    domain.actions.push_back(std::move(ask));
    return domain;
}

Problem build_problem(const WorkflowProblem& problem, const CompilationMode& mode) {
    validate(problem);
    if (mode.kind == CompilationMode::Kind::Optimality && !mode.plan_actions.empty()) {
        throw CompileError("optimality mode takes no plan actions");
    }
    std::unordered_set<std::string> agent_ids;
    for (const auto& agent : problem.available_agents) agent_ids.insert(agent.id);
    for (const auto& id : mode.plan_actions) {
        if (agent_ids.count(id) == 0) {
            throw CompileError("plan action id '" + id + "' names no available agent");
        }
    }

    Problem doc;
    doc.name = std::string(kDomainName) + mode_suffix(mode.kind);
    doc.domain = kDomainName;

    const auto universe = variable_universe(problem);
    for (const auto& [name, fillable] : universe) {
        doc.init.emplace_back(
            FluentAssign{{"slot_goodness", {name}}, fillable ? 1000000 : 150000});
    }
    for (const auto& [name, fillable] : universe) {
        if (!fillable) doc.init.emplace_back(pos("not_slotfillable", {name}));
    }
    for (const auto& [name, fillable] : universe) {
        doc.init.emplace_back(pos("mapped_to", {name, name}));
    }
    for (const auto& [name, fillable] : universe) {
        doc.init.emplace_back(pos("new_item", {name}));
    }
    for (const auto& name : sorted_by_index(problem.available_data)) {
        doc.init.emplace_back(pos("known", {name, "certain"}));
    }
    doc.init.emplace_back(FluentAssign{{"total-cost", {}}, 0});

    std::vector<std::string> goals;
    switch (mode.kind) {
        case CompilationMode::Kind::Optimality:
            goals = problem.goal_agent_ids;
            break;
        case CompilationMode::Kind::Soundness:
            goals.assign(mode.plan_actions.begin(), mode.plan_actions.end());
            break;
        case CompilationMode::Kind::Validity: {
            std::set<std::string> merged(problem.goal_agent_ids.begin(),
                                         problem.goal_agent_ids.end());
            merged.insert(mode.plan_actions.begin(), mode.plan_actions.end());
            goals.assign(merged.begin(), merged.end());
            break;
        }
    }
    for (const auto& id : sorted_by_index(std::move(goals))) {
        doc.goal.push_back(pos("has_done", {id, "present"}));
    }
    doc.minimize_total_cost = true;
    return doc;
}

std::string compile_domain(const WorkflowProblem& problem) {
    return print_domain(build_domain(problem));
}

std::string compile_problem(const WorkflowProblem& problem, const CompilationMode& mode) {
    return print_problem(build_problem(problem, mode));
}

// ---- Printer ----

namespace {

/// Applications print zero-arity heads with a trailing space: (total-cost ).
void print_atom(std::ostringstream& out, const Atom& atom) {
    out << "(" << atom.name << " ";
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        out << atom.args[i] << (i + 1 < atom.args.size() ? " " : "");
    }
    out << ")";
}

void print_literal(std::ostringstream& out, const Literal& literal) {
    if (literal.negated) out << "(not ";
    print_atom(out, literal.atom);
    if (literal.negated) out << ")";
}

void print_increase(std::ostringstream& out, const Increase& increase) {
    out << "(increase ";
    print_atom(out, increase.fluent);
    out << " ";
    if (std::holds_alternative<std::int64_t>(increase.amount)) {
        out << std::get<std::int64_t>(increase.amount);
    } else {
        print_atom(out, std::get<Atom>(increase.amount));
    }
    out << ")";
}

void print_typed_names(std::ostringstream& out, const TypedNames& group) {
    for (const auto& name : group.names) out << name << " ";
    out << "- " << group.type;
}

void print_action_block(std::ostringstream& out, const Action& action,
                        const std::string& indent) {
    out << indent << "(:action " << action.name << "\n";
    out << indent << "    :parameters (";
    for (std::size_t i = 0; i < action.parameters.size(); ++i) {
        if (i > 0) out << " ";
        print_typed_names(out, action.parameters[i]);
    }
    out << ")\n";
    out << indent << "    :precondition (and";
    for (const auto& literal : action.precondition) {
        out << " ";
        print_literal(out, literal);
    }
    out << ")\n";
    out << indent << "    :effect (and\n";
    for (const auto& part : action.effect) {
        out << indent << "        ";
        if (std::holds_alternative<Literal>(part)) {
            print_literal(out, std::get<Literal>(part));
        } else {
            print_increase(out, std::get<Increase>(part));
        }
        out << "\n";
    }
    out << indent << "    )\n";
    out << indent << ")\n";
}

}  // namespace

std::string print_action(const Action& action) {
    std::ostringstream out;
    print_action_block(out, action, "");
    return out.str();
}

std::string print_domain(const Domain& domain) {
    std::ostringstream out;
    out << "(define (domain " << domain.name << ")\n";
    out << "    (:requirements";
    for (const auto& req : domain.requirements) out << " " << req;
    out << ")\n";
    out << "    (:types ";
    for (std::size_t i = 0; i < domain.types.size(); ++i) {
        if (i > 0) out << " ";
        print_typed_names(out, domain.types[i]);
    }
    out << ")\n";
    out << "    (:constants\n";
    for (const auto& group : domain.constants) {
        out << "        ";
        print_typed_names(out, group);
        out << "\n";
    }
    out << "    )\n";
    out << "    (:predicates\n";
    for (const auto& predicate : domain.predicates) {
        out << "        ";
        print_atom(out, predicate);
        out << "\n";
    }
    out << "    )\n";
    out << "    (:functions\n";
    for (const auto& function : domain.functions) {
        out << "        ";
        print_atom(out, function);
        out << "\n";
    }
    out << "    )\n";
    for (const auto& action : domain.actions) {
        print_action_block(out, action, "    ");
    }
    out << ")\n";
    return out.str();
}

std::string print_problem(const Problem& problem) {
    std::ostringstream out;
    out << "(define (problem " << problem.name << ")\n";
    out << "    (:domain " << problem.domain << ")\n";
    out << "    (:init\n";
    for (const auto& entry : problem.init) {
        out << "        ";
        if (std::holds_alternative<Literal>(entry)) {
            print_literal(out, std::get<Literal>(entry));
        } else {
            const auto& assign = std::get<FluentAssign>(entry);
            out << "(= ";
            print_atom(out, assign.fluent);
            out << " " << assign.value << ")";
        }
        out << "\n";
    }
    out << "    )\n";
    out << "    (:goal (and";
    for (const auto& literal : problem.goal) {
        out << " ";
        print_literal(out, literal);
    }
    out << "))\n";
    if (problem.minimize_total_cost) {
        out << "    (:metric minimize (total-cost ))\n";
    }
    out << ")\n";
    return out.str();
}

std::string print_fragment(const Fragment& fragment) {
    if (std::holds_alternative<Domain>(fragment)) {
        return print_domain(std::get<Domain>(fragment));
    }
    if (std::holds_alternative<Problem>(fragment)) {
        return print_problem(std::get<Problem>(fragment));
    }
    return print_action(std::get<Action>(fragment));
}

// ---- Tokenizer and parser ----

namespace {

struct Token {
    enum class Kind { Open, Close, Symbol };
    Kind kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t line = 1, column = 1;
    std::string current;
    std::size_t token_line = 1, token_column = 1;
    auto flush = [&]() {
        if (!current.empty()) {
            tokens.push_back({Token::Kind::Symbol, current, token_line, token_column});
            current.clear();
        }
    };
    for (char c : text) {
        if (c == '(' || c == ')') {
            flush();
            tokens.push_back({c == '(' ? Token::Kind::Open : Token::Kind::Close,
                              std::string(1, c), line, column});
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            flush();
        } else {
            if (current.empty()) {
                token_line = line;
                token_column = column;
            }
            current.push_back(c);
        }
        if (c == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    flush();
    return tokens;
}

/// Generic s-expression node.
struct Node {
    bool is_list = false;
    std::string symbol;
    std::vector<Node> children;
    std::size_t line = 0;
    std::size_t column = 0;
};

struct NodeParser {
    const std::vector<Token>& tokens;
    std::size_t at = 0;

    Node parse() {
        if (at >= tokens.size()) throw ParseError("unexpected end of input");
        const Token& token = tokens[at];
        if (token.kind == Token::Kind::Close) {
            throw ParseError("unexpected ')' at " + std::to_string(token.line) + ":" +
                             std::to_string(token.column));
        }
        if (token.kind == Token::Kind::Symbol) {
            ++at;
            return {false, token.text, {}, token.line, token.column};
        }
        Node list{true, "", {}, token.line, token.column};
        ++at;
        while (true) {
            if (at >= tokens.size()) throw ParseError("unbalanced '(' ");
            if (tokens[at].kind == Token::Kind::Close) {
                ++at;
                return list;
            }
            list.children.push_back(parse());
        }
    }
};

[[noreturn]] void unsupported(const Node& node, const std::string& what) {
    throw UnsupportedFeature(what, node.line, node.column);
}

const std::string& head(const Node& node) {
    static const std::string empty;
    if (!node.is_list || node.children.empty() || node.children[0].is_list) return empty;
    return node.children[0].symbol;
}

bool is_integer(const std::string& text) {
    if (text.empty()) return false;
    std::size_t start = text[0] == '-' ? 1 : 0;
    if (start == text.size()) return false;
    return std::all_of(text.begin() + static_cast<long>(start), text.end(),
                       [](unsigned char c) { return c >= '0' && c <= '9'; });
}

Atom parse_atom(const Node& node) {
    if (!node.is_list || node.children.empty() || node.children[0].is_list) {
        unsupported(node, "expected an atom");
    }
    Atom atom;
    atom.name = node.children[0].symbol;
    for (std::size_t i = 1; i < node.children.size(); ++i) {
        if (node.children[i].is_list) unsupported(node.children[i], "nested term in atom");
        atom.args.push_back(node.children[i].symbol);
    }
    return atom;
}

Literal parse_literal(const Node& node) {
    static const std::unordered_set<std::string> kOutside = {
        "forall", "exists", "when",  "or",     "imply", "=",
        "<",      "<=",     ">",     ">=",     "increase", "decrease",
        "assign", "scale-up", "scale-down"};
    const std::string& h = head(node);
    if (kOutside.count(h) != 0) unsupported(node, "'" + h + "' is outside the fragment");
    if (h == "not") {
        if (node.children.size() != 2) unsupported(node, "malformed (not ...)");
        const std::string& inner = head(node.children[1]);
        if (kOutside.count(inner) != 0 || inner == "not" || inner == "and") {
            unsupported(node.children[1], "'" + inner + "' is outside the fragment");
        }
        return {true, parse_atom(node.children[1])};
    }
    if (h == "and") unsupported(node, "nested conjunction");
    return {false, parse_atom(node)};
}

std::vector<Literal> parse_conjunction(const Node& node) {
    std::vector<Literal> literals;
    if (head(node) == "and") {
        for (std::size_t i = 1; i < node.children.size(); ++i) {
            literals.push_back(parse_literal(node.children[i]));
        }
    } else {
        literals.push_back(parse_literal(node));
    }
    return literals;
}

Increase parse_increase(const Node& node) {
    if (node.children.size() != 3) unsupported(node, "malformed (increase ...)");
    Increase increase;
    increase.fluent = parse_atom(node.children[1]);
    const Node& amount = node.children[2];
    if (!amount.is_list && is_integer(amount.symbol)) {
        increase.amount = static_cast<std::int64_t>(std::stoll(amount.symbol));
    } else if (amount.is_list) {
        increase.amount = parse_atom(amount);
    } else {
        unsupported(amount, "increase amount must be an integer or a fluent");
    }
    return increase;
}

std::vector<EffectPart> parse_effect(const Node& node) {
    std::vector<EffectPart> parts;
    auto parse_part = [&](const Node& part) {
        const std::string& h = head(part);
        if (h == "increase") {
            parts.emplace_back(parse_increase(part));
        } else {
            parts.emplace_back(parse_literal(part));
        }
    };
    if (head(node) == "and") {
        for (std::size_t i = 1; i < node.children.size(); ++i) parse_part(node.children[i]);
    } else {
        parse_part(node);
    }
    return parts;
}

/// Parses "name name ... - type [name ... - type]*" runs.
std::vector<TypedNames> parse_typed_list(const std::vector<Node>& nodes, std::size_t from,
                                         std::size_t to) {
    std::vector<TypedNames> groups;
    TypedNames current;
    for (std::size_t i = from; i < to; ++i) {
        const Node& node = nodes[i];
        if (node.is_list) unsupported(node, "unexpected list in typed name run");
        if (node.symbol == "-") {
            if (i + 1 >= to || nodes[i + 1].is_list) {
                unsupported(node, "dangling '-' in typed name run");
            }
            current.type = nodes[++i].symbol;
            groups.push_back(std::move(current));
            current = {};
        } else {
            current.names.push_back(node.symbol);
        }
    }
    if (!current.names.empty()) {
        unsupported(nodes[from], "untyped trailing names");
    }
    return groups;
}

Action parse_action_node(const Node& node) {
    Action action;
    if (node.children.size() < 2 || node.children[1].is_list) {
        unsupported(node, "malformed (:action ...)");
    }
    action.name = node.children[1].symbol;
    std::size_t i = 2;
    while (i < node.children.size()) {
        if (node.children[i].is_list || node.children[i].symbol.empty() ||
            node.children[i].symbol[0] != ':') {
            unsupported(node.children[i], "expected an :action section keyword");
        }
        const std::string key = node.children[i].symbol;
        if (i + 1 >= node.children.size()) unsupported(node.children[i], "missing section body");
        const Node& body = node.children[i + 1];
        if (key == ":parameters") {
            action.parameters = parse_typed_list(body.children, 0, body.children.size());
        } else if (key == ":precondition") {
            action.precondition = parse_conjunction(body);
        } else if (key == ":effect") {
            action.effect = parse_effect(body);
        } else {
            unsupported(node.children[i], "unknown action section '" + key + "'");
        }
        i += 2;
    }
    return action;
}

Domain parse_domain_node(const Node& root) {
    Domain domain;
    const Node& header = root.children[1];
    domain.name = header.children[1].symbol;
    for (std::size_t i = 2; i < root.children.size(); ++i) {
        const Node& section = root.children[i];
        const std::string& h = head(section);
        if (h == ":requirements") {
            for (std::size_t j = 1; j < section.children.size(); ++j) {
                domain.requirements.push_back(section.children[j].symbol);
            }
        } else if (h == ":types") {
            domain.types = parse_typed_list(section.children, 1, section.children.size());
        } else if (h == ":constants") {
            domain.constants = parse_typed_list(section.children, 1, section.children.size());
        } else if (h == ":predicates") {
            for (std::size_t j = 1; j < section.children.size(); ++j) {
                domain.predicates.push_back(parse_atom(section.children[j]));
            }
        } else if (h == ":functions") {
            for (std::size_t j = 1; j < section.children.size(); ++j) {
                domain.functions.push_back(parse_atom(section.children[j]));
            }
        } else if (h == ":action") {
            domain.actions.push_back(parse_action_node(section));
        } else {
            unsupported(section, "unknown domain section '" + h + "'");
        }
    }
    return domain;
}

Problem parse_problem_node(const Node& root) {
    Problem problem;
    const Node& header = root.children[1];
    problem.name = header.children[1].symbol;
    for (std::size_t i = 2; i < root.children.size(); ++i) {
        const Node& section = root.children[i];
        const std::string& h = head(section);
        if (h == ":domain") {
            problem.domain = section.children[1].symbol;
        } else if (h == ":init") {
            for (std::size_t j = 1; j < section.children.size(); ++j) {
                const Node& entry = section.children[j];
                if (head(entry) == "=") {
                    if (entry.children.size() != 3 || entry.children[2].is_list ||
                        !is_integer(entry.children[2].symbol)) {
                        unsupported(entry, "malformed fluent assignment");
                    }
                    problem.init.emplace_back(FluentAssign{
                        parse_atom(entry.children[1]),
                        static_cast<std::int64_t>(std::stoll(entry.children[2].symbol))});
                } else {
                    problem.init.emplace_back(parse_literal(entry));
                }
            }
        } else if (h == ":goal") {
            if (section.children.size() != 2) unsupported(section, "malformed (:goal ...)");
            problem.goal = parse_conjunction(section.children[1]);
        } else if (h == ":metric") {
            if (section.children.size() != 3 || section.children[1].is_list ||
                section.children[1].symbol != "minimize" ||
                parse_atom(section.children[2]).name != "total-cost") {
                unsupported(section, "only (:metric minimize (total-cost )) is supported");
            }
            problem.minimize_total_cost = true;
        } else {
            unsupported(section, "unknown problem section '" + h + "'");
        }
    }
    return problem;
}

}  // namespace

Fragment parse_fragment(std::string_view text) {
    const std::vector<Token> tokens = tokenize(text);
    if (tokens.empty()) throw ParseError("empty document");
    NodeParser parser{tokens};
    const Node root = parser.parse();
    if (parser.at != tokens.size()) {
        throw ParseError("trailing tokens after document at " +
                         std::to_string(tokens[parser.at].line) + ":" +
                         std::to_string(tokens[parser.at].column));
    }
    if (!root.is_list) throw ParseError("expected a parenthesized document");
    if (head(root) == ":action") {
        return parse_action_node(root);
    }
    if (head(root) == "define" && root.children.size() >= 2 && root.children[1].is_list) {
        const std::string& kind = head(root.children[1]);
        if (kind == "domain") return parse_domain_node(root);
        if (kind == "problem") return parse_problem_node(root);
    }
    throw ParseError("expected (define (domain ...)), (define (problem ...)), or (:action ...)");
}

bool same_tokens(std::string_view a, std::string_view b) {
    const auto ta = tokenize(a);
    const auto tb = tokenize(b);
    if (ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        if (ta[i].kind != tb[i].kind || ta[i].text != tb[i].text) return false;
    }
    return true;
}

}  // namespace flowplan::pddl
