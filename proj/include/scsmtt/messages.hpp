#pragma once

#include "scsmtt/association.hpp"
#include "scsmtt/gibbs.hpp"

namespace scsmtt {

struct MessageOptions {
    /// Measurements whose association probability falls below this value contribute no terms.
    double eta_floor = 1e-9;
};

/// Inter-agent likelihood for the observer. obs is linearized with the observer as the agent
/// block G and the neighbor as the source block E; w is the effective measurement.
[[nodiscard]] LikelihoodMessage compute_phi_msg(const GaussianMixture& neighbor_belief,
                                                const LinearizedObservation& obs, const Vector& w);

/// Agent-side likelihood from one PT. Terms are flattened as (m, j) in row-major order.
[[nodiscard]] LikelihoodMessage compute_lambda_msg(const Eigen::VectorXd& eta_row, const GaussianMixture& delta_exist,
                                                   std::span<const Vector> measurements,
                                                   const LinearizedObservation& obs, const DetectionParams& det,
                                                   const MessageOptions& options = {});

struct GammaMessage {
    LikelihoodMessage exist;
    double eta0 = 1.0;

    [[nodiscard]] static GammaMessage unit() { return {LikelihoodMessage::unit(), 1.0}; }
};

/// PT-side likelihood from one agent. Terms are flattened as (m, j) in row-major order.
[[nodiscard]] GammaMessage compute_gamma_msg(const Eigen::VectorXd& eta_row, const GaussianMixture& theta,
                                             std::span<const Vector> measurements, const LinearizedObservation& obs,
                                             const DetectionParams& det, const MessageOptions& options = {});

/// Extrinsic agent message for the likelihood at index `excluded`: the normalized product of the
/// prediction with every other likelihood. Falls back to the normalized `fallback` belief when
/// the sampler archived nothing.
[[nodiscard]] GaussianMixture extract_theta(const GibbsProductState& state, std::size_t excluded,
                                            const GaussianMixture& fallback, const GibbsOptions& options);

} // namespace scsmtt
