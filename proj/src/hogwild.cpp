#include "scsmtt/hogwild.hpp"

#include <algorithm>
#include <bit>
#include <set>

namespace scsmtt {

namespace {

constexpr double kMinLogEta0 = -700.0;

Eigen::VectorXd flatten(const CanonicalInfo& ci) {
    const auto d = ci.e_tilde.size();
    Eigen::VectorXd v(d * d + d + 1);
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            v(k++) = ci.C_tilde(r, c);
        }
    }
    for (Eigen::Index r = 0; r < d; ++r) {
        v(k++) = ci.e_tilde(r);
    }
    v(k) = ci.c;
    return v;
}

CanonicalInfo unflatten(const Eigen::VectorXd& v, Eigen::Index d) {
    CanonicalInfo ci = CanonicalInfo::null(d);
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            ci.C_tilde(r, c) = v(k++);
        }
    }
    for (Eigen::Index r = 0; r < d; ++r) {
        ci.e_tilde(r) = v(k++);
    }
    ci.c = v(k);
    return ci;
}

LabelVector weight_key(double log_mass) {
    const auto bits = std::bit_cast<std::uint64_t>(log_mass);
    return {static_cast<int>(bits >> 32), static_cast<int>(bits & 0xffffffffu)};
}

std::vector<const HogwildArchiveEntry*> ranked(const std::map<LabelVector, HogwildArchiveEntry>& archive) {
    std::vector<const HogwildArchiveEntry*> out;
    for (const auto& kv : archive) {
        out.push_back(&kv.second);
    }
    std::stable_sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->log_mass > b->log_mass; });
    return out;
}

void append_components(const std::vector<PreparedComponent>& prior, const CanonicalInfo& sums, GaussianMixture& out) {
    for (const auto& p : prior) {
        try {
            auto g = fuse_prepared(p, sums);
            if (g.log_weight != kNegInf) {
                out.components.push_back(std::move(g));
            }
        } catch (const NumericalError&) {
            // Ill-conditioned fusion: the component is dropped.
        }
    }
}

PtBelief normalized_prior(const PtBelief& alpha) {
    PtBelief b = alpha;
    b.normalize();
    return b;
}

} // namespace

HogwildState make_hogwild_state(const PtBelief& alpha, std::span<const GammaMessage> gammas) {
    if (alpha.exist_gm.empty()) {
        throw std::invalid_argument("make_hogwild_state: prior has no existence components");
    }
    HogwildState st;
    st.prior = prepare(alpha.exist_gm);
    st.log_alpha_nonexist = alpha.nonexist_mass > 0.0 ? std::log(alpha.nonexist_mass) : kNegInf;
    const auto d = alpha.exist_gm.dim();
    for (const auto& g : gammas) {
        HogwildAgent a;
        a.table = canonical_table(g.exist, d);
        a.log_eta0 = g.eta0 > 0.0 ? std::max(kMinLogEta0, std::log(g.eta0)) : kMinLogEta0;
        st.agents.push_back(std::move(a));
    }
    return st;
}

int hogwild_init(const HogwildState& state, std::size_t agent, std::mt19937_64& rng) {
    const auto& table = state.agents.at(agent).table;
    std::vector<double> w(table.label_count());
    for (std::size_t q = 0; q < w.size(); ++q) {
        w[q] = fused_log_mass(state.prior, table.entries[q]);
    }
    return static_cast<int>(sample_log_categorical(std::span<const double>(w), rng));
}

std::vector<double> hogwild_conditional_log_weights(const HogwildState& state, const CanonicalInfo& global,
                                                    std::size_t agent) {
    const auto& a = state.agents.at(agent);
    CanonicalInfo base = global;
    base -= a.table.entries[static_cast<std::size_t>(a.label)];
    return fused_log_mass_each(state.prior, base, a.table.entries);
}

void hogwild_round(HogwildState& state, ConsensusNetwork& net, std::vector<std::mt19937_64>& rngs,
                   const HogwildOptions& options) {
    const std::size_t n = state.agents.size();
    if (n != net.agent_count() || rngs.size() != n) {
        throw DimensionError("hogwild_round: agent count mismatch");
    }
    const auto d = state.dim();
    AgentValues payload(n);
    LabelVector joint(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& a = state.agents[s];
        const auto& entry = a.table.entries[static_cast<std::size_t>(a.label)];
        if (!std::isfinite(entry.c)) {
            throw NumericalError("hogwild_round: current label has zero weight");
        }
        payload[s] = flatten(entry);
        joint[s] = a.label;
    }
    const auto global = net.sum_and_agree(std::move(payload), TrafficKind::belief);
    if (!options.distinct_weight_mode) {
        net.record(static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(net.graph().diameter),
                   TrafficKind::auxiliary);
    }
    for (std::size_t s = 0; s < n; ++s) {
        auto& a = state.agents[s];
        const CanonicalInfo sums = unflatten(global[s], d);
        const double log_mass = fused_log_mass(state.prior, sums);
        const LabelVector key = options.distinct_weight_mode ? weight_key(log_mass) : joint;
        a.archive.try_emplace(key, HogwildArchiveEntry{joint, sums, log_mass});
        if (options.label_trace != nullptr) {
            *options.label_trace << state.rounds_done << ',' << s << ',' << options.pt_index << ',' << a.label << '\n';
        }
        const auto w = hogwild_conditional_log_weights(state, sums, s);
        a.label = static_cast<int>(sample_log_categorical(std::span<const double>(w), rngs[s]));
    }
    ++state.rounds_done;
}

void hogwild_finalize(HogwildState& state, ConsensusNetwork& net) {
    const std::size_t n = state.agents.size();
    AgentValues eta0(n);
    for (std::size_t s = 0; s < n; ++s) {
        eta0[s] = Eigen::VectorXd::Constant(1, state.agents[s].log_eta0);
    }
    const auto b0 = net.sum_and_agree(std::move(eta0), TrafficKind::belief);
    state.log_b0 = b0.front()(0);

    AgentValues digest(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& archive = state.agents[s].archive;
        const std::size_t width = archive.empty() ? 0 : archive.begin()->first.size() + 1;
        Eigen::VectorXd v(static_cast<Eigen::Index>(archive.size() * width));
        Eigen::Index k = 0;
        for (const auto& [key, entry] : archive) {
            for (int x : key) {
                v(k++) = static_cast<double>(x);
            }
            v(k++) = entry.log_mass;
        }
        digest[s] = std::move(v);
    }
    (void)net.agree(std::move(digest), TrafficKind::auxiliary);
}

PtBelief hogwild_agent_belief(const HogwildState& state, std::size_t agent, const HogwildOptions& options) {
    const auto& archive = state.agents.at(agent).archive;
    PtBelief b;
    std::size_t taken = 0;
    for (const auto* e : ranked(archive)) {
        if (taken++ >= options.top) {
            break;
        }
        append_components(state.prior, e->sums, b.exist_gm);
    }
    b.exist_gm = gm_truncate(b.exist_gm, options.max_components, options.weight_floor);
    b.normalize_with_log_nonexist(state.log_alpha_nonexist + state.log_b0);
    return b;
}

std::vector<PtBelief> hogwild_belief(HogwildState& state, ConsensusNetwork& net, std::vector<std::mt19937_64>& rngs,
                                     const HogwildOptions& options) {
    if (options.rounds < 1) {
        throw std::invalid_argument("hogwild_belief: rounds must be >= 1");
    }
    for (std::size_t s = 0; s < state.agents.size(); ++s) {
        state.agents[s].label = hogwild_init(state, s, rngs.at(s));
    }
    for (int r = 0; r < options.rounds; ++r) {
        hogwild_round(state, net, rngs, options);
    }
    hogwild_finalize(state, net);
    std::vector<PtBelief> out;
    for (std::size_t s = 0; s < state.agents.size(); ++s) {
        out.push_back(hogwild_agent_belief(state, s, options));
    }
    return out;
}

PtBelief extract_delta(const HogwildState& state, std::size_t agent, const PtBelief& alpha,
                       const HogwildOptions& options) {
    const auto& me = state.agents.at(agent);
    PtBelief delta;
    std::set<LabelVector> seen;
    for (const auto* e : ranked(me.archive)) {
        if (seen.size() >= options.top) {
            break;
        }
        LabelVector key = e->labels;
        key.at(agent) = -1;
        if (!seen.insert(key).second) {
            continue;
        }
        CanonicalInfo sums = e->sums;
        sums -= me.table.entries[static_cast<std::size_t>(e->labels[agent])];
        append_components(state.prior, sums, delta.exist_gm);
    }
    if (delta.exist_gm.empty()) {
        return normalized_prior(alpha);
    }
    delta.exist_gm = gm_truncate(delta.exist_gm, options.max_components, options.weight_floor);
    delta.normalize_with_log_nonexist(state.log_alpha_nonexist + state.log_b0 - me.log_eta0);
    return delta;
}

} // namespace scsmtt
