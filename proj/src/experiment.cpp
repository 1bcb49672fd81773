#include "scsmtt/experiment.hpp"

#include <atomic>
#include <chrono>
#include <thread>

namespace scsmtt {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run) {
    std::uint64_t z = master + (run + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RunResult run_monte_carlo(const Scenario& scenario, const FilterConfig& config, std::uint64_t seed,
                          const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    RunResult r;
    r.seed = seed;
    try {
        Rng meas_rng(seed);
        Rng filter_rng(derive_seed(seed, 0));
        const FilterModel model = FilterModel::from_scenario(scenario);
        FilterState state = initial_state(scenario, config);
        std::vector<bool> mobile;
        for (const auto& a : scenario.truth.agents) {
            mobile.push_back(!a.anchor);
        }
        for (int t = 0; t < scenario.truth.steps; ++t) {
            const FrameGraphs graphs = build_graphs(scenario.truth, t);
            const FrameMeasurements frame = synthesize_frame(scenario.truth, t, graphs, scenario.config.sensor, meas_rng);
            StepDiagnostics diag;
            state = step(state, model, frame, graphs.graph, config, filter_rng, &diag);
            r.comm += diag.comm;
            r.warnings += static_cast<int>(diag.warnings.size());
            r.agent_failures += diag.agent_failures;
            r.pt_failures += diag.pt_failures;
            if (options.keep_pt_traffic) {
                r.pt_traffic.insert(r.pt_traffic.end(), diag.pt_traffic.begin(), diag.pt_traffic.end());
            }
            const Estimates est = infer(state, config.existence_threshold);
            std::vector<Vector> truth_agents;
            for (const auto& track : scenario.truth.agent_tracks) {
                truth_agents.push_back(track[static_cast<std::size_t>(t)]);
            }
            r.agent_rmse.push_back(agent_rmse(truth_agents, est.agents, mobile));
            std::vector<Eigen::Vector2d> x, y;
            for (const auto& k : scenario.truth.targets) {
                if (k.alive(t)) {
                    x.emplace_back(k.at(t).head<2>());
                }
            }
            for (const auto& e : est.targets) {
                y.emplace_back(e.state.head<2>());
            }
            const auto o = ospa_detail(x, y, options.ospa);
            r.ospa.push_back(o.total);
            r.ospa_localization.push_back(o.localization);
            r.ospa_cardinality.push_back(o.cardinality);
            r.cardinality.push_back(static_cast<int>(y.size()));
            r.true_cardinality.push_back(static_cast<int>(x.size()));
        }
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<RunResult> run_batch(const Scenario& scenario, const FilterConfig& config, int mc_runs,
                                 std::uint64_t master_seed, int workers, const RunOptions& options) {
    if (mc_runs < 1) {
        throw std::invalid_argument("run_batch: mc_runs must be >= 1");
    }
    config.validate();
    std::vector<RunResult> out(static_cast<std::size_t>(mc_runs));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < mc_runs; r = next++) {
            out[static_cast<std::size_t>(r)] =
                run_monte_carlo(scenario, config, derive_seed(master_seed, static_cast<std::uint64_t>(r)), options);
        }
    };
    const int n = std::max(1, std::min(workers, mc_runs));
    std::vector<std::thread> threads;
    for (int i = 1; i < n; ++i) {
        threads.emplace_back(worker);
    }
    worker();
    for (auto& t : threads) {
        t.join();
    }
    return out;
}

BatchSummary summarize(const std::vector<RunResult>& runs) {
    BatchSummary s;
    std::vector<const RunResult*> ok;
    for (const auto& r : runs) {
        if (r.error.empty()) {
            ok.push_back(&r);
        } else {
            ++s.failed_runs;
        }
    }
    if (ok.empty()) {
        throw std::runtime_error("summarize: no completed runs");
    }
    const std::size_t steps = ok.front()->ospa.size();
    s.rmse_mean.assign(steps, 0.0);
    s.ospa_mean.assign(steps, 0.0);
    std::vector<std::vector<int>> counts;
    for (const auto* r : ok) {
        for (std::size_t t = 0; t < steps; ++t) {
            s.rmse_mean[t] += r->agent_rmse[t] / static_cast<double>(ok.size());
            s.ospa_mean[t] += r->ospa[t] / static_cast<double>(ok.size());
        }
        counts.push_back(r->cardinality);
    }
    s.cardinality = cardinality_stats(counts);
    s.true_cardinality = ok.front()->true_cardinality;
    for (std::size_t t = 0; t < steps; ++t) {
        s.rmse_time_avg += s.rmse_mean[t] / static_cast<double>(steps);
        s.ospa_time_avg += s.ospa_mean[t] / static_cast<double>(steps);
    }
    return s;
}

} // namespace scsmtt
