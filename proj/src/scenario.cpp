#include "scsmtt/scenario.hpp"

#include <algorithm>
#include <numbers>
#include <queue>

namespace scsmtt {

int GroundTruth::cardinality(int t) const {
    return static_cast<int>(std::count_if(targets.begin(), targets.end(),
                                          [t](const TargetTrack& k) { return k.alive(t); }));
}

void GroundTruth::validate() const {
    if (agent_tracks.size() != agents.size()) {
        throw std::invalid_argument("GroundTruth: agent track count does not match agent list");
    }
    for (std::size_t s = 0; s < agents.size(); ++s) {
        if (agent_tracks[s].size() != static_cast<std::size_t>(steps)) {
            throw std::invalid_argument("GroundTruth: agent track length differs from step count");
        }
        if (agents[s].anchor) {
            for (const auto& x : agent_tracks[s]) {
                if ((x.head<2>() - agent_tracks[s].front().head<2>()).norm() > 0.0) {
                    throw std::invalid_argument("GroundTruth: anchor " + agents[s].name + " moves");
                }
            }
        }
    }
    for (const auto& k : targets) {
        const int end = k.death < 0 ? steps : std::min(k.death, steps);
        if (k.birth < 0 || static_cast<int>(k.states.size()) != std::max(0, end - k.birth)) {
            throw std::invalid_argument("GroundTruth: target track length inconsistent with birth/death");
        }
        if (k.states.empty()) {
            throw std::invalid_argument("GroundTruth: target never exists within the step range");
        }
    }
}

bool NetworkGraph::has_edge(int a, int b) const {
    const auto& n = neighbors.at(static_cast<std::size_t>(a));
    return std::find(n.begin(), n.end(), b) != n.end();
}

namespace {

std::vector<int> bfs_depths(const NetworkGraph& g, int root) {
    std::vector<int> depth(g.size(), -1);
    std::queue<int> q;
    depth[static_cast<std::size_t>(root)] = 0;
    q.push(root);
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : g.neighbors[static_cast<std::size_t>(u)]) {
            if (depth[static_cast<std::size_t>(v)] < 0) {
                depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(u)] + 1;
                q.push(v);
            }
        }
    }
    return depth;
}

} // namespace

bool NetworkGraph::connected() const {
    if (neighbors.empty()) {
        return true;
    }
    auto d = bfs_depths(*this, 0);
    return std::none_of(d.begin(), d.end(), [](int x) { return x < 0; });
}

NetworkGraph NetworkGraph::from_edges(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
    NetworkGraph g;
    g.neighbors.assign(n, {});
    for (auto [a, b] : edges) {
        if (a == b || a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n) {
            throw std::invalid_argument("NetworkGraph::from_edges: invalid edge");
        }
        if (!g.has_edge(a, b)) {
            g.neighbors[static_cast<std::size_t>(a)].push_back(b);
            g.neighbors[static_cast<std::size_t>(b)].push_back(a);
        }
    }
    for (auto& nb : g.neighbors) {
        std::sort(nb.begin(), nb.end());
    }
    g.diameter = 0;
    for (std::size_t s = 0; s < n; ++s) {
        for (int d : bfs_depths(g, static_cast<int>(s))) {
            g.diameter = std::max(g.diameter, d);
        }
    }
    return g;
}

FrameGraphs build_graphs(const GroundTruth& truth, int t) {
    const std::size_t n = truth.agent_count();
    const auto ti = static_cast<std::size_t>(t);
    std::vector<std::pair<int, int>> edges;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double range = std::min(truth.agents[a].comm_range, truth.agents[b].comm_range);
            const double dist = (truth.agent_tracks[a][ti].head<2>() - truth.agent_tracks[b][ti].head<2>()).norm();
            if (dist <= range) {
                edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
            }
        }
    }
    FrameGraphs out;
    out.graph = NetworkGraph::from_edges(n, edges);
    if (!out.graph.connected()) {
        throw DisconnectedGraphError("build_graphs: communication graph disconnected at step " + std::to_string(t));
    }
    out.visible.assign(n, {});
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t k = 0; k < truth.targets.size(); ++k) {
            const auto& tk = truth.targets[k];
            if (!tk.alive(t)) {
                continue;
            }
            const double dist = (tk.at(t).head<2>() - truth.agent_tracks[s][ti].head<2>()).norm();
            if (dist <= truth.agents[s].meas_range) {
                out.visible[s].push_back(static_cast<int>(k));
            }
        }
    }
    return out;
}

namespace {

Vector noisy_range_bearing(const Vector& observer, const Vector& source, const Eigen::LLT<Matrix>& noise, Rng& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    Vector e(2);
    e << n01(rng), n01(rng);
    Vector z = range_bearing_vec(observer, source) + noise.matrixL() * e;
    z(1) = wrap_angle(z(1));
    return z;
}

} // namespace

FrameMeasurements synthesize_frame(const GroundTruth& truth, int t, const FrameGraphs& graphs,
                                   const SensorParams& sensor, Rng& rng) {
    const std::size_t n = truth.agent_count();
    const auto ti = static_cast<std::size_t>(t);
    const auto r_llt = robust_llt(sensor.R);
    const auto w_llt = robust_llt(sensor.W);
    std::bernoulli_distribution detect(sensor.p_detect);
    std::poisson_distribution<int> clutter_count(sensor.clutter_rate);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    FrameMeasurements out;
    out.target.assign(n, {});
    out.inter_agent.assign(n, {});
    out.detections.assign(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        const Vector& ys = truth.agent_tracks[s][ti];
        auto& zs = out.target[s];
        for (int k : graphs.visible[s]) {
            if (detect(rng)) {
                zs.push_back(noisy_range_bearing(ys, truth.targets[static_cast<std::size_t>(k)].at(t), r_llt, rng));
                ++out.detections[s];
            }
        }
        const int nc = sensor.clutter_rate > 0.0 ? clutter_count(rng) : 0;
        for (int c = 0; c < nc; ++c) {
            Vector z(2);
            z(0) = truth.agents[s].meas_range * unit(rng);
            z(1) = wrap_angle(std::numbers::pi * (2.0 * unit(rng) - 1.0));
            zs.push_back(z);
        }
        std::shuffle(zs.begin(), zs.end(), rng);
        for (int l : graphs.graph.neighbors[s]) {
            out.inter_agent[s][l] = noisy_range_bearing(ys, truth.agent_tracks[static_cast<std::size_t>(l)][ti], w_llt, rng);
        }
    }
    return out;
}

RangeBearingModel Scenario::sensor_model(std::size_t s) const {
    RangeBearingModel m;
    m.R = config.sensor.R;
    m.p_detect = config.sensor.p_detect;
    m.clutter_rate = config.sensor.clutter_rate;
    m.roi = config.roi;
    m.max_range = truth.agents.at(s).meas_range;
    return m;
}

GroundTruth straight_line_truth(int steps, double ts, const std::vector<AgentTrackSpec>& agents,
                                const std::vector<TargetTrackSpec>& targets) {
    GroundTruth g;
    g.steps = steps;
    g.ts = ts;
    const Matrix a = constant_velocity_transition(ts);
    for (const auto& spec : agents) {
        g.agents.push_back(spec.spec);
        std::vector<Vector> track;
        Vector x = spec.initial_state;
        if (spec.spec.anchor) {
            x.tail<2>().setZero();
        }
        for (int t = 0; t < steps; ++t) {
            track.push_back(x);
            x = a * x;
        }
        g.agent_tracks.push_back(std::move(track));
    }
    for (const auto& spec : targets) {
        if (spec.birth >= steps || (spec.death >= 0 && spec.death <= spec.birth)) {
            continue;
        }
        TargetTrack k;
        k.birth = spec.birth;
        k.death = spec.death;
        const int end = spec.death < 0 ? steps : std::min(spec.death, steps);
        Vector x = spec.initial_state;
        for (int t = spec.birth; t < end; ++t) {
            k.states.push_back(x);
            x = a * x;
        }
        g.targets.push_back(std::move(k));
    }
    g.validate();
    return g;
}

Scenario assemble_scenario(const ScenarioConfig& config, GroundTruth truth) {
    truth.validate();
    Scenario sc;
    sc.config = config;
    sc.mobile_dynamics = {constant_velocity_transition(config.ts), constant_velocity_noise(config.ts, config.sigma_q_agent)};
    Matrix anchor_a = Matrix::Identity(4, 4);
    anchor_a(2, 2) = 0.0;
    anchor_a(3, 3) = 0.0;
    sc.anchor_dynamics = {anchor_a, Matrix::Identity(4, 4) * 1e-6};

    const Matrix b = constant_velocity_transition(config.ts);
    const Matrix sigma = constant_velocity_noise(config.ts, config.sigma_q_target);
    for (const auto& k : truth.targets) {
        TargetDynamics dyn;
        dyn.B = b;
        dyn.Sigma = sigma;
        dyn.p_survival = config.p_survival;
        dyn.p_birth = config.p_birth;
        ScaledGaussian birth;
        birth.log_weight = std::log(config.p_birth);
        birth.mean = Vector::Zero(4);
        birth.mean.head<2>() = k.states.front().head<2>();
        birth.cov = config.target_init_cov;
        dyn.birth_gm.components.push_back(birth);
        dyn.validate();
        sc.pt_dynamics.push_back(std::move(dyn));
    }

    const double off = config.agent_init_offset;
    const double offsets[4][2] = {{off, 0.0}, {-off, 0.0}, {0.0, off}, {0.0, -off}};
    for (std::size_t s = 0; s < truth.agent_count(); ++s) {
        const Vector& x0 = truth.agent_tracks[s].front();
        GaussianMixture gm;
        if (truth.agents[s].anchor) {
            ScaledGaussian g;
            g.mean = x0;
            g.cov = config.anchor_init_cov;
            gm.components.push_back(g);
        } else {
            for (const auto& o : offsets) {
                ScaledGaussian g;
                g.log_weight = std::log(0.25);
                g.mean = x0;
                g.mean(0) += o[0];
                g.mean(1) += o[1];
                g.cov = config.agent_init_cov;
                gm.components.push_back(g);
            }
        }
        sc.agent_priors.push_back(std::move(gm));
    }
    for (int t = 0; t < truth.steps; ++t) {
        (void)build_graphs(truth, t);
    }
    sc.truth = std::move(truth);
    return sc;
}

namespace {

Matrix diag4(double a, double b, double c, double d) {
    Matrix m = Matrix::Zero(4, 4);
    m.diagonal() << a, b, c, d;
    return m;
}

Vector state(double px, double py, double vx, double vy) {
    Vector v(4);
    v << px, py, vx, vy;
    return v;
}

} // namespace

ScenarioConfig paper_config() {
    ScenarioConfig c;
    c.sensor.R = Matrix::Zero(2, 2);
    c.sensor.R.diagonal() << 10.0, 1e-4;
    c.sensor.W = c.sensor.R;
    c.sensor.p_detect = 0.95;
    c.sensor.clutter_rate = 25.0;
    c.agent_init_cov = diag4(1600.0, 1600.0, 40.0, 40.0);
    c.anchor_init_cov = diag4(1e-2, 1e-2, 1e-4, 1e-4);
    c.target_init_cov = diag4(1600.0, 1600.0, 16.0, 16.0);
    return c;
}

std::vector<AgentTrackSpec> paper_agents() {
    auto anchor = [](const char* name, double x, double y) {
        return AgentTrackSpec{AgentSpec{name, true, 1500.0, 1000.0}, state(x, y, 0, 0)};
    };
    auto mobile = [](const char* name, double x, double y, double vx, double vy) {
        return AgentTrackSpec{AgentSpec{name, false, 1000.0, 1000.0}, state(x, y, vx, vy)};
    };
    return {
        anchor("A1", 400.0, 1100.0),
        anchor("A2", 1100.0, 1100.0),
        mobile("M1", 80.0, 60.0, 1.0, 0.5),
        mobile("M2", 1420.0, 80.0, -1.0, 0.6),
        mobile("M3", 750.0, 400.0, 0.0, 1.5),
        mobile("M4", 300.0, 700.0, 2.0, -1.0),
        mobile("M5", 1200.0, 650.0, -2.0, 1.0),
        mobile("M6", 750.0, 1350.0, 1.5, -1.0),
    };
}

std::vector<TargetTrackSpec> paper_targets() {
    return {
        {0, 40, state(300.0, 300.0, 3.0, 2.5)},
        {0, 40, state(1200.0, 300.0, -3.0, 2.5)},
        {0, -1, state(500.0, 1000.0, 2.5, -3.0)},
        {0, -1, state(1000.0, 1000.0, -2.5, -3.0)},
        {5, -1, state(200.0, 800.0, 4.0, 0.0)},
        {5, -1, state(1300.0, 800.0, -4.0, 0.0)},
        {10, -1, state(750.0, 200.0, 0.0, 4.0)},
        {10, -1, state(750.0, 1300.0, 0.0, -4.0)},
        {20, -1, state(400.0, 550.0, 3.0, 3.0)},
        {20, -1, state(1100.0, 550.0, -3.0, 3.0)},
    };
}

Scenario paper_scenario() {
    const auto config = paper_config();
    return assemble_scenario(config, straight_line_truth(config.steps, config.ts, paper_agents(), paper_targets()));
}

} // namespace scsmtt
