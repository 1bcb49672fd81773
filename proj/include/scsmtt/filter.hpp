#pragma once

#include "scsmtt/consensus.hpp"
#include "scsmtt/hogwild.hpp"
#include "scsmtt/messages.hpp"
#include "scsmtt/scenario.hpp"
#include "scsmtt/single_gaussian.hpp"

#include <optional>
#include <ostream>
#include <string>

namespace scsmtt {

enum class Variant { cgm, dgm, cg, dg, cgm_spawn, cg_spawn };

[[nodiscard]] std::string to_string(Variant v);
/// Accepts the display names "CGM", "DGM", "CG", "DG", "CGM-SPAWN" and "CG-SPAWN".
[[nodiscard]] Variant parse_variant(const std::string& name);
[[nodiscard]] bool is_single_gaussian(Variant v);
[[nodiscard]] bool is_spawn(Variant v);
[[nodiscard]] bool is_decentralized(Variant v);

struct FilterConfig {
    Variant variant = Variant::cgm;
    int outer_iters = 1;
    /// Sweeps of the centralized sampler and rounds of the decentralized one.
    int gibbs_iters = 20;
    std::size_t gibbs_top = 20;
    int consensus_iters = 50;
    double existence_threshold = 0.5;
    std::size_t max_components = kDefaultMaxComponents;
    double weight_floor = kDefaultWeightFloor;
    InnerBpOptions inner_bp;
    MessageOptions messages;
    bool distinct_weight_mode = false;
    ShardScaleRule shard_scale = ShardScaleRule::exact;
    /// When set, receives one line per message evaluation in schedule order.
    std::ostream* schedule_trace = nullptr;
    /// When set, receives the decentralized sampler's label rows.
    std::ostream* label_trace = nullptr;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
    [[nodiscard]] GibbsOptions gibbs() const;
    [[nodiscard]] HogwildOptions hogwild(int pt) const;
};

/// Beliefs held by every agent after a step.
struct FilterState {
    /// Number of completed steps.
    int time = 0;
    std::vector<GaussianMixture> agents;
    /// pts[s][k] is agent s's copy of PT k's belief.
    std::vector<std::vector<PtBelief>> pts;

    [[nodiscard]] std::size_t agent_count() const { return agents.size(); }
    [[nodiscard]] std::size_t pt_count() const { return pts.empty() ? 0 : pts.front().size(); }
};

/// Agent priors and K nonexistent PT slots. Single-Gaussian variants moment-match the priors.
[[nodiscard]] FilterState initial_state(const Scenario& scenario, const FilterConfig& config);

/// Traffic of one PT belief computation in one outer iteration.
struct PtTraffic {
    int pt = 0;
    int outer = 0;
    Eigen::Index dim = 0;
    CommCounters counters;
};

struct StepDiagnostics {
    CommCounters comm;
    std::vector<PtTraffic> pt_traffic;
    std::vector<std::string> warnings;
    int inner_bp_nonconverged = 0;
    int agent_failures = 0;
    int pt_failures = 0;
    int single_gaussian_fallbacks = 0;
};

/// Sensor, dynamics and prior description consumed by step.
struct FilterModel {
    std::vector<AgentDynamics> agent_dynamics;
    std::vector<TargetDynamics> pt_dynamics;
    std::vector<double> meas_range;
    /// Clutter density per agent.
    std::vector<double> clutter_density;
    Matrix R;
    Matrix W;
    double p_detect = 0.95;
    double clutter_rate = 25.0;

    [[nodiscard]] static FilterModel from_scenario(const Scenario& scenario);
    [[nodiscard]] std::size_t agent_count() const { return agent_dynamics.size(); }
};

/// One time step of the outer BP loop at every agent. Never throws for a single agent or PT
/// failure; those fall back to their predictions and are reported in the diagnostics.
[[nodiscard]] FilterState step(const FilterState& prev, const FilterModel& model, const FrameMeasurements& frame,
                               const NetworkGraph& graph, const FilterConfig& config, Rng& rng,
                               StepDiagnostics* diagnostics = nullptr);

struct TargetEstimate {
    int pt = 0;
    double existence = 0.0;
    Vector state;
};

struct Estimates {
    std::vector<Vector> agents;
    std::vector<TargetEstimate> targets;
};

/// MMSE estimates; PT beliefs are read from agent `viewer`'s copy.
[[nodiscard]] Estimates infer(const FilterState& state, double threshold, std::size_t viewer = 0);

/// Writes one CSV row per belief component: kind,owner,index,log_weight,mean...,cov (row-major).
void write_belief_csv(std::ostream& out, const FilterState& state);

} // namespace scsmtt
