#include "flowplan/generator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "flowplan/digest.hpp"
#include "flowplan/parallel.hpp"

namespace flowplan {

std::vector<GridPoint> enumerate_grid(const GeneratorConfig& config) {
    for (const auto* list : {&config.num_actions, &config.arity, &config.num_mappings,
                             &config.num_goals}) {
        if (list->empty()) throw ConfigError("grid value list is empty");
    }
    if (config.coupling.empty() || config.slot_fillable_proportion.empty()) {
        throw ConfigError("grid value list is empty");
    }
    std::vector<GridPoint> grid;
    for (int actions : config.num_actions)
        for (int arity : config.arity)
            for (double coupling : config.coupling)
                for (double slot : config.slot_fillable_proportion)
                    for (int mappings : config.num_mappings)
                        for (int goals : config.num_goals)
                            grid.push_back({actions, arity, coupling, slot, mappings, goals});
    return grid;
}

namespace {

/// Fixed byte encoding hashed by derive_stream. Fractions are encoded as
/// IEEE-754 bit patterns so the encoding never depends on float formatting.
std::string encode_stream_key(std::uint64_t master_seed, const GridPoint& point,
                              std::uint64_t sample_index) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "seed:%llu;point:%d,%d,%016llx,%016llx,%d,%d;sample:%llu",
                  static_cast<unsigned long long>(master_seed), point.num_actions, point.arity,
                  static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(point.coupling)),
                  static_cast<unsigned long long>(
                      std::bit_cast<std::uint64_t>(point.slot_fillable_proportion)),
                  point.num_mappings, point.num_goals,
                  static_cast<unsigned long long>(sample_index));
    return buf;
}

std::string var_name(int index) { return "v__" + std::to_string(index); }
std::string agent_name(int index) { return "a__" + std::to_string(index); }

/// Removes and returns a uniformly chosen element of `pool`.
int draw_from_pool(std::vector<int>& pool, RngStream& stream) {
    if (pool.empty()) throw GenerationError("variable pool exhausted");
    auto at = static_cast<std::size_t>(stream.next_below(pool.size()));
    int value = pool[at];
    pool.erase(pool.begin() + static_cast<long>(at));
    return value;
}

}  // namespace

RngStream derive_stream(std::uint64_t master_seed, const GridPoint& point,
                        std::uint64_t sample_index) {
    return RngStream(sha256_low64(encode_stream_key(master_seed, point, sample_index)));
}

int chained_pair_count(const GridPoint& point) {
    return static_cast<int>(std::llround(point.coupling * (point.num_actions - 1)));
}

WorkflowProblem generate_problem(const GridPoint& point, RngStream& stream,
                                 int num_variables) {
    std::vector<bool> fillable(static_cast<std::size_t>(num_variables));
    for (int v = 0; v < num_variables; ++v) {
        fillable[static_cast<std::size_t>(v)] =
            stream.next_unit() < point.slot_fillable_proportion;
    }

    // Pool of unused variable indices, kept in ascending order so draws are a
    // pure function of the stream.
    std::vector<int> pool(static_cast<std::size_t>(num_variables));
    for (int v = 0; v < num_variables; ++v) pool[static_cast<std::size_t>(v)] = v;

    const int chain = chained_pair_count(point);
    std::vector<std::vector<int>> inputs_of(static_cast<std::size_t>(point.num_actions));
    std::vector<std::vector<int>> outputs_of(static_cast<std::size_t>(point.num_actions));
    for (int i = 0; i < point.num_actions; ++i) {
        auto& inputs = inputs_of[static_cast<std::size_t>(i)];
        if (i >= 1 && i <= chain) {
            const auto& prev = outputs_of[static_cast<std::size_t>(i - 1)];
            const int link = prev[static_cast<std::size_t>(stream.next_below(prev.size()))];
            inputs.push_back(link);
            // A chain-link variable is always askable. This keeps optimal
            // plans within two direct goal completions (at most
            // 2 * (arity + 1) steps): a non-askable link would force the
            // producing chain into the plan and stretch it past that bound.
            fillable[static_cast<std::size_t>(link)] = true;
        }
        while (static_cast<int>(inputs.size()) < point.arity) {
            inputs.push_back(draw_from_pool(pool, stream));
        }
        auto& outputs = outputs_of[static_cast<std::size_t>(i)];
        while (static_cast<int>(outputs.size()) < point.arity) {
            outputs.push_back(draw_from_pool(pool, stream));
        }
    }

    WorkflowProblem problem;
    for (int i = 0; i < point.num_actions; ++i) {
        Agent agent;
        agent.id = agent_name(i);
        for (int v : inputs_of[static_cast<std::size_t>(i)]) {
            agent.signature.inputs.push_back(
                {var_name(v), fillable[static_cast<std::size_t>(v)]});
        }
        for (int v : outputs_of[static_cast<std::size_t>(i)]) {
            agent.signature.outputs.push_back(
                {var_name(v), fillable[static_cast<std::size_t>(v)]});
        }
        problem.available_agents.push_back(std::move(agent));
    }

    std::vector<int> candidates(static_cast<std::size_t>(point.num_actions));
    for (int i = 0; i < point.num_actions; ++i) candidates[static_cast<std::size_t>(i)] = i;
    for (int g = 0; g < point.num_goals; ++g) {
        problem.goal_agent_ids.push_back(agent_name(draw_from_pool(candidates, stream)));
    }

    for (int v : pool) problem.available_data.push_back(var_name(v));
    return problem;
}

std::vector<ProblemRecord> generate_point_samples(const GridPoint& point,
                                                  const GeneratorConfig& config) {
    constexpr int kRetriesPerSlot = 100;
    std::vector<ProblemRecord> records;
    std::unordered_set<std::string> seen;
    std::uint64_t attempt = 0;
    const std::uint64_t attempt_cap =
        static_cast<std::uint64_t>(config.samples_per_point) * kRetriesPerSlot;
    while (static_cast<int>(records.size()) < config.samples_per_point &&
           attempt < attempt_cap) {
        RngStream stream = derive_stream(config.master_seed, point, attempt++);
        WorkflowProblem problem;
        try {
            problem = generate_problem(point, stream, config.num_variables);
        } catch (const GenerationError&) {
            continue;
        }
        std::string hash = content_hash(problem);
        if (!seen.insert(hash).second) continue;
        records.push_back({std::move(hash), point, std::move(problem), Feasibility::unknown()});
    }
    return records;
}

std::vector<ProblemRecord> generate_batch(const GeneratorConfig& config, int workers) {
    const std::vector<GridPoint> grid = enumerate_grid(config);
    std::vector<std::vector<ProblemRecord>> per_point(grid.size());
    parallel_for(grid.size(), workers, [&](std::size_t i) {
        per_point[i] = generate_point_samples(grid[i], config);
    });

    std::vector<ProblemRecord> batch;
    for (auto& records : per_point) {
        for (auto& record : records) batch.push_back(std::move(record));
    }
    // Batch-wide dedup: stable order (grid order within equal hashes), keep
    // the first occurrence, then order by hash. Identical output for any
    // worker count.
    std::stable_sort(batch.begin(), batch.end(),
                     [](const ProblemRecord& a, const ProblemRecord& b) {
                         return a.hash < b.hash;
                     });
    batch.erase(std::unique(batch.begin(), batch.end(),
                            [](const ProblemRecord& a, const ProblemRecord& b) {
                                return a.hash == b.hash;
                            }),
                batch.end());
    return batch;
}

}  // namespace flowplan
