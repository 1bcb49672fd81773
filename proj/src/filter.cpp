#include "scsmtt/filter.hpp"

#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace scsmtt {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Link {
    LinearizedObservation lin;
    Vector w;
};

/// Per-agent working set of one step.
struct AgentContext {
    GaussianMixture phi;
    GaussianMixture belief;
    std::vector<PtBelief> alpha;
    std::vector<bool> visible;
    std::vector<LinearizedObservation> lin;
    std::vector<std::vector<Vector>> eff;
    std::map<int, Link> links;
    std::vector<GaussianMixture> theta;
    std::vector<PtBelief> delta;
    std::vector<GammaMessage> gamma;
    std::vector<int> theta_iter;
    std::vector<int> delta_iter;
    std::vector<PtBelief> pt_belief;
    DetectionParams det;
};

GaussianMixture single(const GaussianMixture& gm) {
    GaussianMixture out;
    out.components.push_back(moment_match(gm));
    return out;
}

GaussianMixture normalized(GaussianMixture gm) {
    gm.normalize();
    return gm;
}

PtBelief normalized(PtBelief b) {
    b.normalize();
    return b;
}

PtBelief predict_pt(const PtBelief& prev, const TargetDynamics& dyn, const FilterConfig& config) {
    PtBelief a = target_predict(prev, dyn);
    if (a.exist_gm.empty()) {
        return a;
    }
    if (is_single_gaussian(config.variant)) {
        a.exist_gm = single(a.exist_gm);
    } else {
        a.exist_gm = gm_truncate(a.exist_gm, config.max_components, config.weight_floor);
    }
    return a;
}

void trace(const FilterConfig& config, int p, std::size_t s, const char* what, int k = -1, int theta_iter = -1,
           int delta_iter = -1) {
    if (config.schedule_trace == nullptr) {
        return;
    }
    *config.schedule_trace << p << ',' << s << ',' << what << ',' << k << ',' << theta_iter << ',' << delta_iter
                           << '\n';
}

double log_or_neg_inf(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

class StepRunner {
public:
    StepRunner(const FilterState& prev, const FilterModel& model, const FrameMeasurements& frame,
               const NetworkGraph& graph, const FilterConfig& config, Rng& rng, StepDiagnostics& diag)
        : prev_(prev), model_(model), frame_(frame), graph_(graph), config_(config), rng_(rng), diag_(diag),
          S_(prev.agent_count()), K_(prev.pt_count()) {}

    FilterState run() {
        predict();
        linearize();
        for (int p = 1; p <= config_.outer_iters; ++p) {
            std::vector<GaussianMixture> broadcast;
            broadcast.reserve(S_);
            for (const auto& c : ctx_) {
                broadcast.push_back(c.belief);
            }
            for (std::size_t s = 0; s < S_; ++s) {
                update_agent(s, p, broadcast);
            }
            for (std::size_t k = 0; k < K_; ++k) {
                update_pt(k, p);
            }
        }
        FilterState out;
        out.time = prev_.time + 1;
        for (auto& c : ctx_) {
            out.agents.push_back(std::move(c.belief));
            out.pts.push_back(std::move(c.pt_belief));
        }
        return out;
    }

private:
    void warn(std::string msg) { diag_.warnings.push_back(std::move(msg)); }

    void predict() {
        const bool sg = is_single_gaussian(config_.variant);
        ctx_.resize(S_);
        for (std::size_t s = 0; s < S_; ++s) {
            auto& c = ctx_[s];
            c.phi = prev_.time == 0 ? prev_.agents[s] : agent_predict(prev_.agents[s], model_.agent_dynamics[s]);
            c.phi = sg ? single(c.phi) : gm_truncate(c.phi, config_.max_components, config_.weight_floor);
            c.phi.normalize();
            c.belief = c.phi;
            c.det = {model_.p_detect, model_.clutter_rate, model_.clutter_density[s]};
            for (std::size_t k = 0; k < K_; ++k) {
                c.alpha.push_back(predict_pt(prev_.pts[s][k], model_.pt_dynamics[k], config_));
            }
            c.visible.assign(K_, false);
            c.lin.resize(K_);
            c.eff.resize(K_);
            c.theta.assign(K_, c.phi);
            c.delta = c.alpha;
            for (auto& d : c.delta) {
                if (!d.exist_gm.empty() || d.nonexist_mass > 0.0) {
                    d.normalize();
                }
            }
            c.gamma.assign(K_, GammaMessage::unit());
            c.theta_iter.assign(K_, 0);
            c.delta_iter.assign(K_, 0);
            c.pt_belief.resize(K_);
        }
    }

    void linearize() {
        for (std::size_t s = 0; s < S_; ++s) {
            auto& c = ctx_[s];
            const Vector y = c.phi.mean();
            for (std::size_t k = 0; k < K_; ++k) {
                const auto& a = c.alpha[k];
                if (a.exist_gm.empty()) {
                    continue;
                }
                const Vector x = a.exist_gm.mean();
                if ((x.head<2>() - y.head<2>()).norm() > model_.meas_range[s]) {
                    continue;
                }
                try {
                    c.lin[k] = linearize_range_bearing(y, x, ObservationKind::target_measurement, model_.R);
                } catch (const std::invalid_argument&) {
                    continue;
                }
                c.visible[k] = true;
                for (const auto& z : frame_.target[s]) {
                    c.eff[k].push_back(c.lin[k].effective(z));
                }
            }
            if (s < frame_.inter_agent.size()) {
                for (const auto& [l, w] : frame_.inter_agent[s]) {
                    if (l < 0 || static_cast<std::size_t>(l) >= S_ || !graph_.has_edge(static_cast<int>(s), l)) {
                        continue;
                    }
                    try {
                        auto lin = linearize_range_bearing(y, ctx_[static_cast<std::size_t>(l)].phi.mean(),
                                                           ObservationKind::inter_agent, model_.W);
                        Vector eff = lin.effective(w);
                        c.links.emplace(l, Link{std::move(lin), std::move(eff)});
                    } catch (const std::invalid_argument&) {
                        warn("agent " + std::to_string(s) + ": coincident linearization with neighbor " +
                             std::to_string(l));
                    }
                }
            }
        }
    }

    void update_agent(std::size_t s, int p, const std::vector<GaussianMixture>& broadcast) {
        auto& c = ctx_[s];
        const bool sg = is_single_gaussian(config_.variant);
        const auto gopts = config_.gibbs();
        try {
            std::vector<LikelihoodMessage> likelihoods;
            for (const auto& [l, link] : c.links) {
                likelihoods.push_back(compute_phi_msg(broadcast[static_cast<std::size_t>(l)], link.lin, link.w));
                trace(config_, p, s, "phi", l);
            }
            const std::size_t m_count = frame_.count(s);
            Eigen::MatrixXd beta(static_cast<Eigen::Index>(K_), static_cast<Eigen::Index>(m_count + 1));
            for (std::size_t k = 0; k < K_; ++k) {
                const auto row = static_cast<Eigen::Index>(k);
                if (c.visible[k]) {
                    beta.row(row) = compute_beta_gm(c.theta[k], c.delta[k].exist_gm, c.lin[k], c.eff[k], c.det);
                    trace(config_, p, s, "beta", static_cast<int>(k), c.theta_iter[k], c.delta_iter[k]);
                } else {
                    beta.row(row) = unobserved_beta_row(m_count);
                }
            }
            if (!beta.allFinite()) {
                throw NumericalError("non-finite association weights");
            }
            const auto assoc = inner_bp(beta, config_.inner_bp);
            if (!assoc.converged) {
                ++diag_.inner_bp_nonconverged;
            }
            std::vector<std::size_t> lambda_index(K_, kNone);
            if (!is_spawn(config_.variant)) {
                for (std::size_t k = 0; k < K_; ++k) {
                    if (!c.visible[k]) {
                        continue;
                    }
                    const Eigen::VectorXd eta = assoc.eta.row(static_cast<Eigen::Index>(k)).transpose();
                    lambda_index[k] = likelihoods.size();
                    likelihoods.push_back(
                        compute_lambda_msg(eta, c.delta[k].exist_gm, c.eff[k], c.lin[k], c.det, config_.messages));
                    trace(config_, p, s, "lambda", static_cast<int>(k));
                }
            }
            auto state = make_gibbs_state(c.phi, likelihoods);
            gibbs_run(state, gopts, rng_);
            GaussianMixture b = normalized(gibbs_materialize(state, gopts));
            c.belief = sg ? single(b) : b;
            trace(config_, p, s, "agent_belief");
            for (std::size_t k = 0; k < K_; ++k) {
                if (!c.visible[k]) {
                    continue;
                }
                GaussianMixture theta = is_spawn(config_.variant) ? c.belief
                                                                  : extract_theta(state, lambda_index[k], b, gopts);
                c.theta[k] = sg ? single(theta) : theta;
                c.theta_iter[k] = p;
                trace(config_, p, s, "theta", static_cast<int>(k));
                const Eigen::VectorXd eta = assoc.eta.row(static_cast<Eigen::Index>(k)).transpose();
                c.gamma[k] = compute_gamma_msg(eta, c.theta[k], c.eff[k], c.lin[k], c.det, config_.messages);
                trace(config_, p, s, "gamma", static_cast<int>(k));
            }
        } catch (const std::exception& e) {
            ++diag_.agent_failures;
            warn("agent " + std::to_string(s) + " step " + std::to_string(prev_.time) + ": " + e.what());
            c.belief = c.phi;
            c.theta.assign(K_, c.phi);
            c.gamma.assign(K_, GammaMessage::unit());
        }
    }

    std::vector<std::size_t> observers(std::size_t k) const {
        std::vector<std::size_t> out;
        for (std::size_t s = 0; s < S_; ++s) {
            if (ctx_[s].visible[k]) {
                out.push_back(s);
            }
        }
        return out;
    }

    void set_delta(std::size_t s, std::size_t k, PtBelief d, int p) {
        ctx_[s].delta[k] = std::move(d);
        ctx_[s].delta_iter[k] = p;
        trace(config_, p, s, "delta", static_cast<int>(k));
    }

    void update_pt(std::size_t k, int p) {
        const bool extract = p != config_.outer_iters;
        const PtBelief& alpha = ctx_.front().alpha[k];
        try {
            if (alpha.exist_gm.empty()) {
                for (auto& c : ctx_) {
                    c.pt_belief[k] = normalized(c.alpha[k]);
                }
                return;
            }
            switch (config_.variant) {
            case Variant::dgm:
                pt_hogwild(k, p, extract);
                break;
            case Variant::dg:
                pt_single_gaussian(k, p, extract);
                break;
            default:
                pt_centralized(k, p, extract);
                break;
            }
            for (std::size_t s = 0; s < S_; ++s) {
                trace(config_, p, s, "pt_belief", static_cast<int>(k));
            }
        } catch (const std::exception& e) {
            ++diag_.pt_failures;
            warn("pt " + std::to_string(k) + " step " + std::to_string(prev_.time) + ": " + e.what());
            for (auto& c : ctx_) {
                c.pt_belief[k] = normalized(c.alpha[k]);
                c.delta[k] = c.pt_belief[k];
            }
        }
    }

    void pt_centralized(std::size_t k, int p, bool extract) {
        const bool sg = is_single_gaussian(config_.variant);
        const auto gopts = config_.gibbs();
        const PtBelief& alpha = ctx_.front().alpha[k];
        const auto obs = observers(k);
        std::vector<LikelihoodMessage> msgs;
        std::vector<double> log_eta0;
        double log_b0 = 0.0;
        for (std::size_t s : obs) {
            msgs.push_back(ctx_[s].gamma[k].exist);
            log_eta0.push_back(log_eta0_payload(ctx_[s].gamma[k].eta0));
            log_b0 += log_eta0.back();
        }
        const double log_a0 = log_or_neg_inf(alpha.nonexist_mass);
        auto state = make_gibbs_state(alpha.exist_gm, msgs);
        gibbs_run(state, gopts, rng_);
        PtBelief b;
        const GaussianMixture exist = gibbs_materialize(state, gopts);
        b.exist_gm = sg ? single(exist) : exist;
        b.normalize_with_log_nonexist(log_a0 + log_b0);
        for (auto& c : ctx_) {
            c.pt_belief[k] = b;
        }
        if (!extract) {
            return;
        }
        for (std::size_t i = 0; i < obs.size(); ++i) {
            PtBelief d;
            const GaussianMixture loo = leave_one_out_mixture(state, i, gopts);
            if (loo.empty()) {
                d = normalized(alpha);
            } else {
                d.exist_gm = sg ? single(loo) : loo;
                d.normalize_with_log_nonexist(log_a0 + log_b0 - log_eta0[i]);
            }
            set_delta(obs[i], k, std::move(d), p);
        }
    }

    std::vector<Rng> agent_rngs() {
        std::vector<Rng> out;
        out.reserve(S_);
        for (std::size_t s = 0; s < S_; ++s) {
            out.emplace_back(rng_());
        }
        return out;
    }

    void record_traffic(std::size_t k, int p, const ConsensusNetwork& net, Eigen::Index dim) {
        diag_.comm += net.counters();
        diag_.pt_traffic.push_back(PtTraffic{static_cast<int>(k), p, dim, net.counters()});
    }

    void pt_hogwild(std::size_t k, int p, bool extract) {
        const PtBelief& alpha = ctx_.front().alpha[k];
        std::vector<GammaMessage> gammas;
        for (const auto& c : ctx_) {
            gammas.push_back(c.visible[k] ? c.gamma[k] : GammaMessage::unit());
        }
        auto state = make_hogwild_state(alpha, gammas);
        ConsensusNetwork net(graph_, config_.consensus_iters);
        auto rngs = agent_rngs();
        const auto hopts = config_.hogwild(static_cast<int>(k));
        auto beliefs = hogwild_belief(state, net, rngs, hopts);
        record_traffic(k, p, net, alpha.exist_gm.dim());
        for (std::size_t s = 0; s < S_; ++s) {
            ctx_[s].pt_belief[k] = std::move(beliefs[s]);
            if (extract && ctx_[s].visible[k]) {
                set_delta(s, k, extract_delta(state, s, ctx_[s].alpha[k], hopts), p);
            }
        }
    }

    void pt_single_gaussian(std::size_t k, int p, bool extract) {
        const PtBelief& alpha = ctx_.front().alpha[k];
        if (alpha.exist_gm.size() != 1) {
            throw NumericalError("single-Gaussian PT prior must have one component");
        }
        const int s_count = static_cast<int>(S_);
        std::vector<ScaledBeliefShard> shards;
        std::vector<double> log_eta0;
        for (const auto& c : ctx_) {
            const GammaMessage g = c.visible[k] ? c.gamma[k] : GammaMessage::unit();
            shards.push_back(local_shard(c.alpha[k].exist_gm.components.front(), g.exist, s_count));
            log_eta0.push_back(log_eta0_payload(g.eta0));
        }
        ConsensusNetwork net(graph_, config_.consensus_iters);
        const auto fused = fuse_shards(shards, log_eta0, net, config_.shard_scale);
        record_traffic(k, p, net, alpha.exist_gm.dim());
        for (std::size_t s = 0; s < S_; ++s) {
            ctx_[s].pt_belief[k] = single_gaussian_belief(fused[s], ctx_[s].alpha[k].nonexist_mass);
            if (extract && ctx_[s].visible[k]) {
                auto r = extract_delta_single(fused[s], shards[s], log_eta0[s], ctx_[s].alpha[k], s_count,
                                              config_.shard_scale);
                if (r.fallback) {
                    ++diag_.single_gaussian_fallbacks;
                    warn("pt " + std::to_string(k) + " agent " + std::to_string(s) +
                         ": indefinite precision difference, fused belief used as extrinsic message");
                }
                set_delta(s, k, std::move(r.delta), p);
            }
        }
    }

    const FilterState& prev_;
    const FilterModel& model_;
    const FrameMeasurements& frame_;
    const NetworkGraph& graph_;
    const FilterConfig& config_;
    Rng& rng_;
    StepDiagnostics& diag_;
    std::size_t S_;
    std::size_t K_;
    std::vector<AgentContext> ctx_;
};

} // namespace

std::string to_string(Variant v) {
    switch (v) {
    case Variant::cgm:
        return "CGM";
    case Variant::dgm:
        return "DGM";
    case Variant::cg:
        return "CG";
    case Variant::dg:
        return "DG";
    case Variant::cgm_spawn:
        return "CGM-SPAWN";
    case Variant::cg_spawn:
        return "CG-SPAWN";
    }
    throw std::invalid_argument("to_string: unknown variant");
}

Variant parse_variant(const std::string& name) {
    for (Variant v : {Variant::cgm, Variant::dgm, Variant::cg, Variant::dg, Variant::cgm_spawn, Variant::cg_spawn}) {
        if (to_string(v) == name) {
            return v;
        }
    }
    throw std::invalid_argument("unknown variant '" + name + "'");
}

bool is_single_gaussian(Variant v) { return v == Variant::cg || v == Variant::dg || v == Variant::cg_spawn; }

bool is_spawn(Variant v) { return v == Variant::cgm_spawn || v == Variant::cg_spawn; }

bool is_decentralized(Variant v) { return v == Variant::dgm || v == Variant::dg; }

void FilterConfig::validate() const {
    if (outer_iters < 1) {
        throw std::invalid_argument("FilterConfig: outer_iters must be >= 1");
    }
    if (gibbs_iters < 1) {
        throw std::invalid_argument("FilterConfig: gibbs_iters must be >= 1");
    }
    if (gibbs_top < 1) {
        throw std::invalid_argument("FilterConfig: gibbs_top must be >= 1");
    }
    if (consensus_iters < 0) {
        throw std::invalid_argument("FilterConfig: consensus_iters must be >= 0");
    }
    if (!(existence_threshold > 0.0 && existence_threshold < 1.0)) {
        throw std::invalid_argument("FilterConfig: existence_threshold must lie in (0,1)");
    }
    if (max_components < 1) {
        throw std::invalid_argument("FilterConfig: max_components must be >= 1");
    }
    if (weight_floor < 0.0 || weight_floor >= 1.0) {
        throw std::invalid_argument("FilterConfig: weight_floor must lie in [0,1)");
    }
}

GibbsOptions FilterConfig::gibbs() const { return {gibbs_iters, gibbs_top, max_components, weight_floor}; }

HogwildOptions FilterConfig::hogwild(int pt) const {
    HogwildOptions o;
    o.rounds = gibbs_iters;
    o.top = gibbs_top;
    o.max_components = max_components;
    o.weight_floor = weight_floor;
    o.distinct_weight_mode = distinct_weight_mode;
    o.label_trace = label_trace;
    o.pt_index = pt;
    return o;
}

FilterModel FilterModel::from_scenario(const Scenario& scenario) {
    FilterModel m;
    for (std::size_t s = 0; s < scenario.truth.agent_count(); ++s) {
        m.agent_dynamics.push_back(scenario.dynamics_of(s));
        m.meas_range.push_back(scenario.truth.agents[s].meas_range);
        m.clutter_density.push_back(scenario.sensor_model(s).clutter_density());
    }
    m.pt_dynamics = scenario.pt_dynamics;
    m.R = scenario.config.sensor.R;
    m.W = scenario.config.sensor.W;
    m.p_detect = scenario.config.sensor.p_detect;
    m.clutter_rate = scenario.config.sensor.clutter_rate;
    return m;
}

FilterState initial_state(const Scenario& scenario, const FilterConfig& config) {
    FilterState st;
    for (const auto& prior : scenario.agent_priors) {
        GaussianMixture g = is_single_gaussian(config.variant) ? single(prior) : prior;
        g.normalize();
        st.agents.push_back(std::move(g));
    }
    PtBelief none;
    none.nonexist_mass = 1.0;
    st.pts.assign(st.agents.size(), std::vector<PtBelief>(scenario.pt_count(), none));
    return st;
}

FilterState step(const FilterState& prev, const FilterModel& model, const FrameMeasurements& frame,
                 const NetworkGraph& graph, const FilterConfig& config, Rng& rng, StepDiagnostics* diagnostics) {
    config.validate();
    const std::size_t n = prev.agent_count();
    if (model.agent_count() != n || frame.target.size() != n || graph.size() != n ||
        model.meas_range.size() != n || model.clutter_density.size() != n || prev.pts.size() != n) {
        throw DimensionError("step: agent count mismatch");
    }
    if (model.pt_dynamics.size() != prev.pt_count()) {
        throw DimensionError("step: PT count mismatch");
    }
    StepDiagnostics local;
    StepDiagnostics& diag = diagnostics != nullptr ? *diagnostics : local;
    diag = {};
    return StepRunner(prev, model, frame, graph, config, rng, diag).run();
}

Estimates infer(const FilterState& state, double threshold, std::size_t viewer) {
    Estimates e;
    for (const auto& a : state.agents) {
        e.agents.push_back(a.mean());
    }
    if (state.pts.empty()) {
        return e;
    }
    const auto& pts = state.pts.at(viewer);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double pe = pts[k].existence();
        if (pe >= threshold && !pts[k].exist_gm.empty()) {
            e.targets.push_back(TargetEstimate{static_cast<int>(k), pe, pts[k].exist_gm.mean()});
        }
    }
    return e;
}

void write_belief_csv(std::ostream& out, const FilterState& state) {
    out << std::setprecision(17);
    auto row = [&](const char* kind, std::size_t owner, std::size_t index, const ScaledGaussian& g) {
        out << kind << ',' << owner << ',' << index << ',' << g.log_weight;
        for (Eigen::Index i = 0; i < g.mean.size(); ++i) {
            out << ',' << g.mean(i);
        }
        for (Eigen::Index r = 0; r < g.cov.rows(); ++r) {
            for (Eigen::Index c = 0; c < g.cov.cols(); ++c) {
                out << ',' << g.cov(r, c);
            }
        }
        out << '\n';
    };
    for (std::size_t s = 0; s < state.agents.size(); ++s) {
        for (const auto& g : state.agents[s].components) {
            row("agent", s, s, g);
        }
    }
    for (std::size_t s = 0; s < state.pts.size(); ++s) {
        for (std::size_t k = 0; k < state.pts[s].size(); ++k) {
            out << "pt_nonexist," << s << ',' << k << ',' << state.pts[s][k].nonexist_mass << '\n';
            for (const auto& g : state.pts[s][k].exist_gm.components) {
                row("pt", s, k, g);
            }
        }
    }
}

} // namespace scsmtt
