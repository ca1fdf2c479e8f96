#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "flowplan/error.hpp"
#include "flowplan/generator.hpp"
#include "flowplan/pddl.hpp"

using namespace flowplan;
using namespace flowplan::testing;
namespace fp = flowplan::pddl;

namespace {

/// a__2 with input v__7 and output v__9, as in the published action example.
WorkflowProblem fragment_problem() { return listing_fragment_problem(); }

}  // namespace

TEST_CASE("domain declares the full type, predicate, and function inventory") {
    const std::string domain = fp::compile_domain(fragment_problem());
    for (const char* type : {"generic", "operator", "has-done-state", "constraint-status",
                             "datum-state", "label", "object"}) {
        CHECK(domain.find(type) != std::string::npos);
    }
    for (const char* predicate :
         {"(has_done ?x - operator ?x2 - has-done-state)", "(been_used ?x - generic)",
          "(new_item ?x - generic)", "(known ?x - generic ?x2 - datum-state)",
          "(not_slotfillable ?x - generic)", "(is_mappable ?x - generic ?x2 - generic)",
          "(not_mappable ?x - generic ?x2 - generic)", "(mapped ?x - generic)",
          "(not_usable ?x - generic)", "(mapped_to ?x - generic ?x2 - generic)",
          "(free ?x - generic)", "(done_goal_pre )", "(done_goal_post )"}) {
        CHECK(domain.find(predicate) != std::string::npos);
    }
    for (const char* function :
         {"(total-cost )", "(slot_goodness ?x - generic)",
          "(affinity ?x - generic ?x2 - generic)"}) {
        CHECK(domain.find(function) != std::string::npos);
    }
    CHECK(domain.find("past present future - has-done-state") != std::string::npos);
    CHECK(domain.find("True False - constraint-status") != std::string::npos);
    CHECK(domain.find("certain uncertain unknown - datum-state") != std::string::npos);
}

TEST_CASE("the a__2 action block matches the published example modulo whitespace") {
    const std::string domain = fp::compile_domain(fragment_problem());
    const auto at = domain.find("(:action a__2");
    REQUIRE(at != std::string::npos);
    const auto end = domain.find("(:action", at + 1);
    const std::string block = domain.substr(at, end - at);
    const char* reference = R"((:action a__2
    :parameters ()
    :precondition (and (not (has_done a__2 past)) (known v__7 certain))
    :effect (and
        (has_done a__2 present)
        (been_used v__7)
        (free v__9)
        (known v__9 certain)
        (not (mapped v__9))
        (increase (total-cost ) 10)
    )
))";
    CHECK(fp::same_tokens(block, reference));
}

TEST_CASE("exactly one ask action, matching the published schema") {
    const std::string domain = fp::compile_domain(fragment_problem());
    CHECK(domain.find("(:action ask") == domain.rfind("(:action ask"));
    const char* reference = R"((:action ask
    :parameters (?x - generic)
    :precondition (and (not (known ?x certain)) (not (not_slotfillable ?x)))
    :effect (and
        (free ?x)
        (mapped_to ?x ?x)
        (known ?x certain)
        (not (not_usable ?x))
        (not (mapped ?x))
        (increase (total-cost ) (slot_goodness ?x))
    )
))";
    const auto at = domain.find("(:action ask");
    const std::string block = domain.substr(at, domain.rfind(")\n") - at);
    CHECK(fp::same_tokens(block, reference));
}

TEST_CASE("every custom action charges exactly 10; ask charges slot_goodness") {
    GeneratorConfig config;
    config.samples_per_point = 1;
    config.num_actions = {5};
    config.arity = {3};
    for (const auto& record : generate_batch(config, 1)) {
        const fp::Domain domain = fp::build_domain(record.problem);
        for (const auto& action : domain.actions) {
            int increases = 0;
            for (const auto& part : action.effect) {
                if (!std::holds_alternative<fp::Increase>(part)) continue;
                ++increases;
                const auto& increase = std::get<fp::Increase>(part);
                CHECK(increase.fluent.name == "total-cost");
                if (action.name == "ask") {
                    REQUIRE(std::holds_alternative<fp::Atom>(increase.amount));
                    CHECK(std::get<fp::Atom>(increase.amount).name == "slot_goodness");
                } else {
                    REQUIRE(std::holds_alternative<std::int64_t>(increase.amount));
                    CHECK(std::get<std::int64_t>(increase.amount) == 10);
                }
            }
            CHECK(increases == 1);
        }
    }
}

TEST_CASE("shared inputs appear as known preconditions in both actions") {
    WorkflowProblem problem;
    problem.available_agents.push_back(
        agent("a__0", {var("v__0", true)}, {var("v__1", true)}));
    problem.available_agents.push_back(
        agent("a__1", {var("v__0", true)}, {var("v__2", true)}));
    problem.goal_agent_ids = {"a__0"};
    const fp::Domain domain = fp::build_domain(problem);
    int with_precondition = 0;
    for (const auto& action : domain.actions) {
        for (const auto& literal : action.precondition) {
            if (!literal.negated && literal.atom.name == "known" &&
                literal.atom.args == std::vector<std::string>{"v__0", "certain"}) {
                ++with_precondition;
            }
        }
    }
    CHECK(with_precondition == 2);
}

TEST_CASE("problem init carries slot goodness, self-mappings, and known facts") {
    const std::string text =
        fp::compile_problem(fragment_problem(), fp::CompilationMode::optimality());
    CHECK(text.find("(= (slot_goodness v__7) 1000000)") != std::string::npos);
    CHECK(text.find("(= (slot_goodness v__4) 150000)") != std::string::npos);
    CHECK(text.find("(not_slotfillable v__4)") != std::string::npos);
    // slot-fillable variables carry no prohibition
    CHECK(text.find("(not_slotfillable v__7)") == std::string::npos);
    CHECK(text.find("(mapped_to v__7 v__7)") != std::string::npos);
    CHECK(text.find("(new_item v__7)") != std::string::npos);
    CHECK(text.find("(known v__10 certain)") != std::string::npos);
    CHECK(text.find("(= (total-cost ) 0)") != std::string::npos);
    CHECK(text.find("(:metric minimize (total-cost ))") != std::string::npos);
    CHECK(text.find("(:goal (and (has_done a__0 present) (has_done a__1 present)))") !=
          std::string::npos);
}

TEST_CASE("goal sets follow the compilation mode") {
    const WorkflowProblem problem = fragment_problem();  // goals a__1, a__0

    const fp::Problem optimality =
        fp::build_problem(problem, fp::CompilationMode::optimality());
    CHECK(optimality.goal.size() == 2);

    const fp::Problem soundness =
        fp::build_problem(problem, fp::CompilationMode::soundness({"a__2"}));
    REQUIRE(soundness.goal.size() == 1);
    CHECK(soundness.goal[0].atom.args[0] == "a__2");

    // empty plan set: trivially satisfied goal conjunction
    const fp::Problem empty = fp::build_problem(problem, fp::CompilationMode::soundness({}));
    CHECK(empty.goal.empty());
    CHECK(fp::print_problem(empty).find("(:goal (and))") != std::string::npos);

    // validity: union of original goals and plan actions
    const fp::Problem validity =
        fp::build_problem(problem, fp::CompilationMode::validity({"a__0", "a__2"}));
    CHECK(validity.goal.size() == 3);

    // goal-mode algebra: validity = optimality union soundness
    const fp::Problem validity_same =
        fp::build_problem(problem, fp::CompilationMode::validity({"a__0"}));
    CHECK(validity_same.goal.size() == 2);
}

TEST_CASE("unknown plan action ids are compile errors naming the id") {
    CHECK_THROWS_WITH_AS(
        fp::build_problem(fragment_problem(), fp::CompilationMode::soundness({"a__7"})),
        "plan action id 'a__7' names no available agent", CompileError);
}

TEST_CASE("emit, parse, emit is byte-identical") {
    GeneratorConfig config;
    config.samples_per_point = 1;
    config.num_actions = {2, 5};
    config.arity = {1, 3};
    for (const auto& record : generate_batch(config, 1)) {
        const std::string domain = fp::compile_domain(record.problem);
        CHECK(fp::print_fragment(fp::parse_fragment(domain)) == domain);
        const std::string problem =
            fp::compile_problem(record.problem, fp::CompilationMode::optimality());
        CHECK(fp::print_fragment(fp::parse_fragment(problem)) == problem);
    }
}

TEST_CASE("the published action text parses into the expected structure") {
    const char* text = R"((:action a__2
    :parameters ()
    :precondition (and (not (has_done a__2 past)) (known v__7 certain))
    :effect (and
        (has_done a__2 present)
        (been_used v__7)
        (free v__9)
        (known v__9 certain)
        (not (mapped v__9))
        (increase (total-cost ) 10)
    )
))";
    const fp::Fragment fragment = fp::parse_fragment(text);
    REQUIRE(std::holds_alternative<fp::Action>(fragment));
    const fp::Action& action = std::get<fp::Action>(fragment);
    CHECK(action.name == "a__2");
    CHECK(action.parameters.empty());
    CHECK(action.precondition.size() == 2);
    CHECK(action.precondition[0].negated);
    CHECK(action.effect.size() == 6);
}

TEST_CASE("features outside the fragment are rejected with a location") {
    const char* text = R"((:action bad
    :parameters (?x - generic)
    :precondition (and)
    :effect (forall (?y - generic) (free ?y))
))";
    try {
        fp::parse_fragment(text);
        FAIL("expected UnsupportedFeature");
    } catch (const fp::UnsupportedFeature& e) {
        CHECK(e.line() == 4);
        CHECK(std::string(e.what()).find("forall") != std::string::npos);
    }
}
