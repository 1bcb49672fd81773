#pragma once

#include "scsmtt/consensus.hpp"
#include "scsmtt/messages.hpp"

namespace scsmtt {

/// How the scale of a fused product of shards is formed.
enum class ShardScaleRule {
    /// Mass of the pointwise product of the shard Gaussians.
    exact,
    /// Product of the shard scales, ignoring the Gaussian overlap factors.
    product_of_scales,
};

/// Moment-matched local factor c_hat * N(x; m_hat, P_hat) of one agent.
struct ScaledBeliefShard {
    double c_hat = 0.0;
    Vector m_hat;
    Matrix P_hat;

    [[nodiscard]] ScaledGaussian as_gaussian() const { return {c_hat, m_hat, P_hat}; }
};

/// Information-form scaled Gaussian: the log-density is log_scale + x' info - x' precision x / 2
/// under the exact rule; under the product rule log_scale is the plain log weight.
struct ShardInfo {
    Matrix precision;
    Vector info;
    double log_scale = 0.0;

    ShardInfo& operator+=(const ShardInfo& o);
    ShardInfo& operator-=(const ShardInfo& o);
};

/// S-th root of the prior times the local likelihood, moment-matched to one scaled Gaussian.
[[nodiscard]] ScaledBeliefShard local_shard(const ScaledGaussian& alpha_exist, const LikelihoodMessage& gamma,
                                            int s_count);

[[nodiscard]] ShardInfo to_info(const ScaledGaussian& g, ShardScaleRule rule);

/// Throws NumericalError if the precision is not positive definite.
[[nodiscard]] ScaledGaussian from_info(const ShardInfo& info, ShardScaleRule rule);

/// Network-wide single-Gaussian PT belief as held by one agent.
struct FusedShards {
    ShardInfo total;
    ScaledGaussian exist;
    /// Sum over agents of log eta_s(0).
    double log_b0 = 0.0;
};

/// One consensus over (precision, info, scale, log eta_s(0)) per agent, d^2 + d + 2 reals.
[[nodiscard]] std::vector<FusedShards> fuse_shards(std::span<const ScaledBeliefShard> shards,
                                                   std::span<const double> log_eta0, ConsensusNetwork& net,
                                                   ShardScaleRule rule = ShardScaleRule::exact);

/// Normalized PT belief from the fused existence part and the prior nonexistence mass.
[[nodiscard]] PtBelief single_gaussian_belief(const FusedShards& fused, double alpha_nonexist);

/// Result of the local extrinsic computation.
struct SingleDelta {
    PtBelief delta;
    /// True when the precision difference was not positive definite and the fused belief was used.
    bool fallback = false;
};

/// Extrinsic message for one agent: the fused belief with its own shard divided out, times the
/// S-th root of the prior. alpha must hold a single existence component.
[[nodiscard]] SingleDelta extract_delta_single(const FusedShards& fused, const ScaledBeliefShard& own,
                                               double own_log_eta0, const PtBelief& alpha, int s_count,
                                               ShardScaleRule rule = ShardScaleRule::exact);

/// Clamped log eta(0) used as the nonexistence payload.
[[nodiscard]] double log_eta0_payload(double eta0);

} // namespace scsmtt
