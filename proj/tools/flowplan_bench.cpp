// Compares the serial reference path (workers = 1) against the OpenMP path
// for the generation and labeling stages, and checks that both produce
// byte-identical manifests.

#include <chrono>
#include <iostream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "flowplan/generator.hpp"
#include "flowplan/model.hpp"
#include "flowplan/parallel.hpp"
#include "flowplan/planner.hpp"

using namespace flowplan;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string batch_fingerprint(const std::vector<ProblemRecord>& records) {
    std::ostringstream out;
    for (const auto& record : records) {
        out << record.hash << " ";
        switch (record.feasibility.state) {
            case Feasibility::State::Unknown: out << "?"; break;
            case Feasibility::State::Infeasible: out << "x"; break;
            case Feasibility::State::Feasible:
                out << record.feasibility.optimal_cost << ":"
                    << record.feasibility.optimal_length;
                break;
        }
        out << "\n";
    }
    return out.str();
}

std::vector<ProblemRecord> label_all(std::vector<ProblemRecord> records, int workers) {
    parallel_for(records.size(), workers, [&](std::size_t i) {
        records[i] = label_feasibility(std::move(records[i]));
    });
    return records;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generate/label throughput: serial reference vs OpenMP"};
    int samples_per_point = 10;
    std::uint64_t seed = 20250429;
    int workers = 0;
    app.add_option("--samples-per-point", samples_per_point, "samples per grid point");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--workers", workers, "parallel worker count (0 = all cores)");
    CLI11_PARSE(app, argc, argv);

    GeneratorConfig config;
    config.samples_per_point = samples_per_point;
    config.master_seed = seed;
    const int parallel_workers = resolve_workers(workers);

    std::cout << "grid points: " << enumerate_grid(config).size()
              << ", samples per point: " << samples_per_point << "\n";
    std::cout << "parallel workers: " << parallel_workers << "\n\n";

    auto t0 = Clock::now();
    const auto serial_batch = generate_batch(config, 1);
    const double gen_serial = seconds_since(t0);

    t0 = Clock::now();
    const auto parallel_batch = generate_batch(config, workers);
    const double gen_parallel = seconds_since(t0);

    t0 = Clock::now();
    const auto serial_labeled = label_all(serial_batch, 1);
    const double label_serial = seconds_since(t0);

    t0 = Clock::now();
    const auto parallel_labeled = label_all(parallel_batch, workers);
    const double label_parallel = seconds_since(t0);

    std::cout << "generate  serial   " << gen_serial << " s\n";
    std::cout << "generate  parallel " << gen_parallel << " s  (x"
              << (gen_parallel > 0 ? gen_serial / gen_parallel : 0) << ")\n";
    std::cout << "label     serial   " << label_serial << " s\n";
    std::cout << "label     parallel " << label_parallel << " s  (x"
              << (label_parallel > 0 ? label_serial / label_parallel : 0) << ")\n\n";

    const bool identical =
        batch_fingerprint(serial_labeled) == batch_fingerprint(parallel_labeled);
    std::cout << "records: " << serial_labeled.size()
              << ", serial/parallel outputs identical: " << (identical ? "yes" : "NO") << "\n";
    return identical ? 0 : 1;
}
