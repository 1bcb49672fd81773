#pragma once

#include "scsmtt/filter.hpp"
#include "scsmtt/metrics.hpp"

#include <cstdint>

namespace scsmtt {

/// Seed of Monte-Carlo run r: the splitmix64 finalizer applied to master + (r + 1) * golden gamma.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run);

/// Per-step results of one Monte-Carlo run.
struct RunResult {
    std::uint64_t seed = 0;
    std::vector<double> agent_rmse;
    std::vector<double> ospa;
    std::vector<double> ospa_localization;
    std::vector<double> ospa_cardinality;
    std::vector<int> cardinality;
    std::vector<int> true_cardinality;
    CommCounters comm;
    /// Belief traffic of each PT belief computation, for decentralized variants.
    std::vector<PtTraffic> pt_traffic;
    int warnings = 0;
    int agent_failures = 0;
    int pt_failures = 0;
    /// Set when the run aborted; the per-step vectors are then incomplete.
    std::string error;
    double seconds = 0.0;
};

struct RunOptions {
    OspaParams ospa;
    /// Keep every PtTraffic record instead of only the totals.
    bool keep_pt_traffic = false;
};

/// Regenerates the measurements from `seed` and runs the filter over every step.
[[nodiscard]] RunResult run_monte_carlo(const Scenario& scenario, const FilterConfig& config, std::uint64_t seed,
                                        const RunOptions& options = {});

/// Runs mc_runs independent runs over `workers` threads. Results are ordered by run index and do
/// not depend on the worker count.
[[nodiscard]] std::vector<RunResult> run_batch(const Scenario& scenario, const FilterConfig& config, int mc_runs,
                                               std::uint64_t master_seed, int workers,
                                               const RunOptions& options = {});

struct BatchSummary {
    std::vector<double> rmse_mean;
    std::vector<double> ospa_mean;
    CardinalityStats cardinality;
    std::vector<int> true_cardinality;
    double rmse_time_avg = 0.0;
    double ospa_time_avg = 0.0;
    int failed_runs = 0;
};

/// Averages over completed runs. Throws when none completed.
[[nodiscard]] BatchSummary summarize(const std::vector<RunResult>& runs);

} // namespace scsmtt
