#pragma once

#include "scsmtt/models.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace scsmtt {

using Rng = std::mt19937_64;

struct TargetTrack {
    int birth = 0;
    /// First step at which the target no longer exists; -1 for never.
    int death = -1;
    /// States indexed by t - birth.
    std::vector<Vector> states;

    [[nodiscard]] bool alive(int t) const {
        return t >= birth && (death < 0 || t < death) && t - birth < static_cast<int>(states.size());
    }
    [[nodiscard]] const Vector& at(int t) const { return states.at(static_cast<std::size_t>(t - birth)); }
};

struct AgentSpec {
    std::string name;
    bool anchor = false;
    double meas_range = 1000.0;
    double comm_range = 1000.0;
};

struct GroundTruth {
    int steps = 0;
    double ts = 1.0;
    std::vector<AgentSpec> agents;
    /// agent_tracks[s][t] is the state of agent s at step t.
    std::vector<std::vector<Vector>> agent_tracks;
    std::vector<TargetTrack> targets;

    [[nodiscard]] std::size_t agent_count() const { return agents.size(); }
    [[nodiscard]] int cardinality(int t) const;
    /// Throws std::invalid_argument on inconsistent track lengths or moving anchors.
    void validate() const;
};

struct NetworkGraph {
    std::vector<std::vector<int>> neighbors;
    int diameter = 0;

    [[nodiscard]] std::size_t size() const { return neighbors.size(); }
    [[nodiscard]] std::size_t degree(std::size_t s) const { return neighbors[s].size(); }
    [[nodiscard]] bool has_edge(int a, int b) const;
    [[nodiscard]] bool connected() const;
    /// Builds a graph from an undirected edge list and computes its diameter.
    [[nodiscard]] static NetworkGraph from_edges(std::size_t n, const std::vector<std::pair<int, int>>& edges);
};

class DisconnectedGraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FrameGraphs {
    NetworkGraph graph;
    /// visible[s] lists targets within agent s's measurement range.
    std::vector<std::vector<int>> visible;
};

/// Edges join agents within min(comm_range) of each other. Throws DisconnectedGraphError
/// when the graph is not connected.
[[nodiscard]] FrameGraphs build_graphs(const GroundTruth& truth, int t);

struct FrameMeasurements {
    std::vector<std::vector<Vector>> target;
    std::vector<std::map<int, Vector>> inter_agent;
    /// Number of measurements per agent that originate from a target, for diagnostics only.
    std::vector<int> detections;

    [[nodiscard]] std::size_t count(std::size_t s) const { return target[s].size(); }
};

/// Measurement parameters shared by all agents.
struct SensorParams {
    Matrix R;
    Matrix W;
    double p_detect = 0.95;
    double clutter_rate = 25.0;
};

/// Clutter is uniform in range over [0, meas_range] and in bearing over (-pi, pi].
[[nodiscard]] FrameMeasurements synthesize_frame(const GroundTruth& truth, int t, const FrameGraphs& graphs,
                                                 const SensorParams& sensor, Rng& rng);

struct ScenarioConfig {
    int steps = 50;
    double ts = 1.0;
    Rect roi{0.0, 0.0, 1500.0, 1500.0};
    double sigma_q_target = 0.5;
    double sigma_q_agent = 0.1;
    SensorParams sensor;
    double p_survival = 0.99;
    double p_birth = 0.25;
    double existence_threshold = 0.5;
    double ospa_cutoff = 20.0;
    double ospa_order = 1.0;
    double agent_init_offset = 50.0;
    Matrix agent_init_cov;
    Matrix anchor_init_cov;
    Matrix target_init_cov;
};

struct Scenario {
    ScenarioConfig config;
    GroundTruth truth;
    AgentDynamics mobile_dynamics;
    AgentDynamics anchor_dynamics;
    /// One dynamics model per PT slot; slots differ only in their birth density.
    std::vector<TargetDynamics> pt_dynamics;
    std::vector<GaussianMixture> agent_priors;

    [[nodiscard]] std::size_t pt_count() const { return pt_dynamics.size(); }
    [[nodiscard]] const AgentDynamics& dynamics_of(std::size_t s) const {
        return truth.agents[s].anchor ? anchor_dynamics : mobile_dynamics;
    }
    [[nodiscard]] RangeBearingModel sensor_model(std::size_t s) const;
};

struct AgentTrackSpec {
    AgentSpec spec;
    Vector initial_state;
};

struct TargetTrackSpec {
    int birth = 0;
    int death = -1;
    Vector initial_state;
};

/// Straight-line constant-velocity tracks. Targets that never exist within the step range are dropped.
[[nodiscard]] GroundTruth straight_line_truth(int steps, double ts, const std::vector<AgentTrackSpec>& agents,
                                              const std::vector<TargetTrackSpec>& targets);

/// Completes a scenario: dynamics, per-slot birth densities at each target's birth position, and
/// agent priors from the initial truth. Throws when some step's graph is disconnected.
[[nodiscard]] Scenario assemble_scenario(const ScenarioConfig& config, GroundTruth truth);

[[nodiscard]] ScenarioConfig paper_config();
[[nodiscard]] std::vector<AgentTrackSpec> paper_agents();
[[nodiscard]] std::vector<TargetTrackSpec> paper_targets();
/// The builtin "paper-vi" scenario.
[[nodiscard]] Scenario paper_scenario();

} // namespace scsmtt
