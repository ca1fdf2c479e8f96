#pragma once

#include <cstdint>
#include <vector>

#include "flowplan/error.hpp"
#include "flowplan/model.hpp"

namespace flowplan {

/// splitmix64 stream. Identical seeds yield identical sequences on every
/// platform.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform draw in [0, bound). bound must be positive; modulo bias is
    /// negligible at the bounds used here (<= a few dozen).
    std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// A sample could not be wired under the point's constraints (variable pool
/// exhausted). The caller retries with the next stream.
class GenerationError : public Error {
public:
    using Error::Error;
};

/// Full Cartesian product of the configured value lists, in lexicographic
/// order of (num_actions, arity, coupling, slot_fillable_proportion,
/// num_mappings, num_goals). The default lists give 288 points.
std::vector<GridPoint> enumerate_grid(const GeneratorConfig& config);

/// Deterministic per-sample stream: seed = low 64 bits of
/// SHA-256(master_seed || canonical point encoding || sample_index).
RngStream derive_stream(std::uint64_t master_seed, const GridPoint& point,
                        std::uint64_t sample_index);

/// One problem drawn from `stream` under `point`:
///   - num_variables variables v__0.., each slot-fillable with probability
///     slot_fillable_proportion;
///   - num_actions agents a__0.. with exactly `arity` inputs and outputs,
///     every slot drawn without replacement from the shared pool, except that
///     agent a__i reuses one output of a__(i-1) as an input for the first
///     round(coupling * (num_actions - 1)) values of i;
///   - num_goals distinct goal agents drawn uniformly;
///   - available_data = the variables left unused, in index order.
/// Throws GenerationError when the pool cannot cover the signatures.
WorkflowProblem generate_problem(const GridPoint& point, RngStream& stream,
                                 int num_variables = 30);

/// Number of chained (i-1, i) pairs mandated by `point`.
int chained_pair_count(const GridPoint& point);

/// Up to samples_per_point problems for one grid point with pairwise-distinct
/// hashes. Bounded retries (100 per sample slot) absorb duplicate draws and
/// wiring failures; a shortfall yields fewer records, never an error.
std::vector<ProblemRecord> generate_point_samples(const GridPoint& point,
                                                  const GeneratorConfig& config);

/// Whole-grid batch: per-point samples merged, deduplicated batch-wide and
/// sorted by hash. A pure function of `config`; `workers` only sets how many
/// points are generated concurrently (1 = serial reference path).
std::vector<ProblemRecord> generate_batch(const GeneratorConfig& config, int workers = 0);

}  // namespace flowplan
