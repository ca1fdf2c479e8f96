#include <map>
#include <set>

#include "doctest.h"
#include "flowplan/generator.hpp"
#include "flowplan/model.hpp"

using namespace flowplan;

namespace {

/// Count of adjacent (a__(i-1), a__i) pairs where a__i consumes an output of
/// its predecessor.
int measured_chain_pairs(const WorkflowProblem& problem) {
    int pairs = 0;
    for (std::size_t i = 1; i < problem.available_agents.size(); ++i) {
        std::set<std::string> prev_outputs;
        for (const auto& var : problem.available_agents[i - 1].signature.outputs) {
            prev_outputs.insert(var.name);
        }
        bool linked = false;
        for (const auto& var : problem.available_agents[i].signature.inputs) {
            if (prev_outputs.count(var.name) != 0) linked = true;
        }
        pairs += linked;
    }
    return pairs;
}

std::set<std::string> signature_variables(const WorkflowProblem& problem) {
    std::set<std::string> names;
    for (const auto& agent : problem.available_agents) {
        for (const auto* side : {&agent.signature.inputs, &agent.signature.outputs}) {
            for (const auto& var : *side) names.insert(var.name);
        }
    }
    return names;
}

}  // namespace

TEST_CASE("default grid enumerates 288 points in lexicographic order") {
    const GeneratorConfig config;
    const auto grid = enumerate_grid(config);
    CHECK(grid.size() == 288);
    CHECK(grid.front() == GridPoint{2, 1, 0.0, 0.375, 0, 1});
    CHECK(grid.back() == GridPoint{5, 3, 1.0, 1.0, 0, 2});
    // strictly increasing in the documented order
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const auto key = [](const GridPoint& p) {
            return std::make_tuple(p.num_actions, p.arity, p.coupling,
                                   p.slot_fillable_proportion, p.num_mappings, p.num_goals);
        };
        CHECK(key(grid[i - 1]) < key(grid[i]));
    }
}

TEST_CASE("singleton lists produce exactly one point") {
    GeneratorConfig config;
    config.num_actions = {3};
    config.arity = {2};
    config.coupling = {1.0};
    config.slot_fillable_proportion = {1.0};
    config.num_goals = {1};
    CHECK(enumerate_grid(config).size() == 1);
}

TEST_CASE("derived streams are deterministic and index-sensitive") {
    const GridPoint point{2, 1, 0.0, 0.375, 0, 1};
    RngStream a = derive_stream(20250429, point, 0);
    RngStream b = derive_stream(20250429, point, 0);
    RngStream c = derive_stream(20250429, point, 1);
    const auto first_a = a.next();
    CHECK(first_a == b.next());
    CHECK(first_a != c.next());
}

TEST_CASE("golden stream seed for the first grid point") {
    // Pinned once from the stream-derivation definition; any change to the
    // encoding or the digest breaks reproducibility and this test.
    const GridPoint point{2, 1, 0.0, 0.375, 0, 1};
    RngStream stream = derive_stream(20250429, point, 0);
    CHECK(stream.next() == 12122385987269460960ull);
}

TEST_CASE("splitmix64 reference values") {
    // seed 1234567 sequence from the splitmix64 reference implementation
    RngStream stream(1234567);
    CHECK(stream.next() == 6457827717110365317ull);
    CHECK(stream.next() == 3203168211198807973ull);
    CHECK(stream.next() == 9817491932198370423ull);
}

TEST_CASE("forced shapes at the degenerate point") {
    const GridPoint point{2, 1, 0.0, 1.0, 0, 1};
    RngStream stream = derive_stream(7, point, 0);
    const WorkflowProblem problem = generate_problem(point, stream);
    REQUIRE(problem.available_agents.size() == 2);
    for (const auto& agent : problem.available_agents) {
        CHECK(agent.signature.inputs.size() == 1);
        CHECK(agent.signature.outputs.size() == 1);
        CHECK(agent.signature.inputs[0].slot_fillable);  // proportion 1.0
        CHECK(agent.signature.outputs[0].slot_fillable);
    }
    CHECK(problem.goal_agent_ids.size() == 1);
    // no variable shared between the two agents
    std::set<std::string> seen;
    for (const auto& agent : problem.available_agents) {
        for (const auto* side : {&agent.signature.inputs, &agent.signature.outputs}) {
            for (const auto& var : *side) CHECK(seen.insert(var.name).second);
        }
    }
    CHECK(seen.size() == 4);
    CHECK(problem.available_data.size() == 26);
}

TEST_CASE("coupling 1.0 chains every consecutive pair") {
    const GridPoint point{3, 1, 1.0, 1.0, 0, 2};
    for (std::uint64_t sample = 0; sample < 20; ++sample) {
        RngStream stream = derive_stream(99, point, sample);
        const WorkflowProblem problem = generate_problem(point, stream);
        const auto& agents = problem.available_agents;
        REQUIRE(agents.size() == 3);
        CHECK(agents[1].signature.inputs[0].name == agents[0].signature.outputs[0].name);
        CHECK(agents[2].signature.inputs[0].name == agents[1].signature.outputs[0].name);
        CHECK(measured_chain_pairs(problem) == 2);
    }
}

TEST_CASE("chained pair count is exact for every grid point") {
    GeneratorConfig config;
    config.samples_per_point = 3;
    for (const auto& record : generate_batch(config, 1)) {
        CHECK(measured_chain_pairs(record.problem) == chained_pair_count(record.point));
        CHECK(record.problem.goal_agent_ids.size() ==
              static_cast<std::size_t>(record.point.num_goals));
    }
}

TEST_CASE("every generated problem satisfies the structural invariants") {
    GeneratorConfig config;
    config.samples_per_point = 2;
    const auto batch = generate_batch(config, 1);
    for (const auto& record : batch) {
        CHECK(!violated_invariant(record.problem).has_value());
        const auto signatures = signature_variables(record.problem);
        // available_data is exactly the unused remainder
        CHECK(signatures.size() + record.problem.available_data.size() == 30);
        for (const auto& name : record.problem.available_data) {
            CHECK(signatures.count(name) == 0);
        }
        // outputs are never in available_data and never produced twice
        std::set<std::string> produced;
        for (const auto& agent : record.problem.available_agents) {
            CHECK(agent.signature.inputs.size() ==
                  static_cast<std::size_t>(record.point.arity));
            CHECK(agent.signature.outputs.size() ==
                  static_cast<std::size_t>(record.point.arity));
            for (const auto& v : agent.signature.outputs) {
                CHECK(produced.insert(v.name).second);
            }
        }
    }
}

TEST_CASE("batches are pure functions of the config") {
    GeneratorConfig config;
    config.samples_per_point = 2;
    config.num_actions = {2, 3};
    const auto a = generate_batch(config, 1);
    const auto b = generate_batch(config, 1);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].hash == b[i].hash);
        CHECK(a[i].problem == b[i].problem);
    }
    // parallel path yields the identical batch
    const auto c = generate_batch(config, 4);
    REQUIRE(c.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].hash == c[i].hash);
}

TEST_CASE("zero samples per point yields an empty batch") {
    GeneratorConfig config;
    config.samples_per_point = 0;
    CHECK(generate_batch(config, 1).empty());
}

TEST_CASE("batch is sorted by hash with pairwise-distinct hashes") {
    GeneratorConfig config;
    config.samples_per_point = 4;
    config.num_actions = {2};
    const auto batch = generate_batch(config, 1);
    for (std::size_t i = 1; i < batch.size(); ++i) {
        CHECK(batch[i - 1].hash < batch[i].hash);
    }
}

TEST_CASE("pool exhaustion raises a generation error") {
    const GridPoint point{5, 3, 0.0, 1.0, 0, 1};
    RngStream stream(1);
    // 5 agents x 6 slots need 30 variables; 8 cannot cover them
    CHECK_THROWS_AS(generate_problem(point, stream, 8), GenerationError);
}
