#include "scsmtt/single_gaussian.hpp"

namespace scsmtt {

namespace {

constexpr double kMinLogEta0 = -700.0;

Eigen::VectorXd flatten(const ShardInfo& si, double log_eta0) {
    const auto d = si.info.size();
    Eigen::VectorXd v(d * d + d + 2);
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            v(k++) = si.precision(r, c);
        }
    }
    for (Eigen::Index r = 0; r < d; ++r) {
        v(k++) = si.info(r);
    }
    v(k++) = si.log_scale;
    v(k) = log_eta0;
    return v;
}

ShardInfo unflatten(const Eigen::VectorXd& v, Eigen::Index d) {
    ShardInfo si;
    si.precision.resize(d, d);
    si.info.resize(d);
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            si.precision(r, c) = v(k++);
        }
    }
    for (Eigen::Index r = 0; r < d; ++r) {
        si.info(r) = v(k++);
    }
    si.log_scale = v(k);
    return si;
}

} // namespace

ShardInfo& ShardInfo::operator+=(const ShardInfo& o) {
    require_same_dim(info.size(), o.info.size(), "ShardInfo::operator+=");
    precision += o.precision;
    info += o.info;
    log_scale += o.log_scale;
    return *this;
}

ShardInfo& ShardInfo::operator-=(const ShardInfo& o) {
    require_same_dim(info.size(), o.info.size(), "ShardInfo::operator-=");
    precision -= o.precision;
    info -= o.info;
    log_scale -= o.log_scale;
    return *this;
}

ScaledBeliefShard local_shard(const ScaledGaussian& alpha_exist, const LikelihoodMessage& gamma, int s_count) {
    const ScaledGaussian root = gaussian_fractional_power(alpha_exist, s_count);
    GaussianMixture gm;
    if (gamma.log_constant != kNegInf) {
        ScaledGaussian c = root;
        c.log_weight += gamma.log_constant;
        gm.components.push_back(std::move(c));
    }
    for (const auto& term : gamma.terms) {
        try {
            auto g = fuse_prior_with_info(root, canonicalize(term));
            if (g.log_weight != kNegInf) {
                gm.components.push_back(std::move(g));
            }
        } catch (const NumericalError&) {
            // Ill-conditioned term: dropped from the local product.
        }
    }
    if (gm.empty()) {
        throw NumericalError("local_shard: zero total weight");
    }
    const auto mm = moment_match(gm);
    return {mm.log_weight, mm.mean, mm.cov};
}

ShardInfo to_info(const ScaledGaussian& g, ShardScaleRule rule) {
    const auto llt = robust_llt(g.cov);
    ShardInfo si;
    si.precision = symmetrize(llt.solve(Matrix::Identity(g.dim(), g.dim())));
    si.info = si.precision * g.mean;
    si.log_scale = g.log_weight;
    if (rule == ShardScaleRule::exact) {
        si.log_scale -= 0.5 * (g.mean.dot(si.info) + static_cast<double>(g.dim()) * kLog2Pi + log_det(llt));
    }
    return si;
}

ScaledGaussian from_info(const ShardInfo& si, ShardScaleRule rule) {
    const auto d = si.info.size();
    Eigen::LLT<Matrix> llt(symmetrize(si.precision));
    if (llt.info() != Eigen::Success) {
        throw NumericalError("from_info: precision is not positive definite");
    }
    ScaledGaussian g;
    g.cov = symmetrize(llt.solve(Matrix::Identity(d, d)));
    g.mean = llt.solve(si.info);
    g.log_weight = si.log_scale;
    if (rule == ShardScaleRule::exact) {
        g.log_weight += 0.5 * (si.info.dot(g.mean) + static_cast<double>(d) * kLog2Pi - log_det(llt));
    }
    return g;
}

double log_eta0_payload(double eta0) { return eta0 > 0.0 ? std::max(kMinLogEta0, std::log(eta0)) : kMinLogEta0; }

std::vector<FusedShards> fuse_shards(std::span<const ScaledBeliefShard> shards, std::span<const double> log_eta0,
                                     ConsensusNetwork& net, ShardScaleRule rule) {
    const std::size_t n = shards.size();
    if (n != net.agent_count() || log_eta0.size() != n) {
        throw DimensionError("fuse_shards: agent count mismatch");
    }
    if (n == 0) {
        throw std::invalid_argument("fuse_shards: no agents");
    }
    const auto d = shards.front().m_hat.size();
    AgentValues payload(n);
    for (std::size_t s = 0; s < n; ++s) {
        require_same_dim(shards[s].m_hat.size(), d, "fuse_shards");
        payload[s] = flatten(to_info(shards[s].as_gaussian(), rule), log_eta0[s]);
    }
    const auto sums = net.sum_and_agree(std::move(payload), TrafficKind::belief);
    std::vector<FusedShards> out;
    out.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        FusedShards f;
        f.total = unflatten(sums[s], d);
        f.exist = from_info(f.total, rule);
        f.log_b0 = sums[s](sums[s].size() - 1);
        out.push_back(std::move(f));
    }
    return out;
}

PtBelief single_gaussian_belief(const FusedShards& fused, double alpha_nonexist) {
    PtBelief b;
    b.exist_gm.components.push_back(fused.exist);
    b.normalize_with_log_nonexist(alpha_nonexist > 0.0 ? std::log(alpha_nonexist) + fused.log_b0 : kNegInf);
    return b;
}

SingleDelta extract_delta_single(const FusedShards& fused, const ScaledBeliefShard& own, double own_log_eta0,
                                 const PtBelief& alpha, int s_count, ShardScaleRule rule) {
    if (alpha.exist_gm.size() != 1) {
        throw std::invalid_argument("extract_delta_single: prior must hold one existence component");
    }
    SingleDelta out;
    const double log_nonexist = alpha.nonexist_mass > 0.0 ? std::log(alpha.nonexist_mass) + fused.log_b0 : kNegInf;
    try {
        ShardInfo rest = fused.total;
        rest -= to_info(own.as_gaussian(), rule);
        const ScaledGaussian others = from_info(rest, rule);
        const ScaledGaussian root = gaussian_fractional_power(alpha.exist_gm.components.front(), s_count);
        out.delta.exist_gm.components.push_back(gaussian_product_pair(others, root));
        out.delta.normalize_with_log_nonexist(log_nonexist - own_log_eta0);
    } catch (const NumericalError&) {
        out.fallback = true;
        out.delta.exist_gm.components.assign(1, fused.exist);
        out.delta.normalize_with_log_nonexist(log_nonexist);
    }
    return out;
}

} // namespace scsmtt
