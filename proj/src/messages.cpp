#include "scsmtt/messages.hpp"

namespace scsmtt {

LikelihoodMessage compute_phi_msg(const GaussianMixture& neighbor_belief, const LinearizedObservation& obs,
                                  const Vector& w) {
    LikelihoodMessage msg;
    msg.terms.reserve(neighbor_belief.size());
    for (const auto& c : neighbor_belief.components) {
        require_same_dim(c.dim(), obs.E.cols(), "compute_phi_msg");
        LikelihoodComponent t;
        t.log_u = c.log_weight;
        t.e = w - obs.E * c.mean;
        t.H = obs.G;
        t.C = symmetrize(obs.R + obs.E * c.cov * obs.E.transpose());
        msg.terms.push_back(std::move(t));
    }
    return msg;
}

namespace {

double log_or_neg_inf(double v) {
    return v > 0.0 ? std::log(v) : kNegInf;
}

/// Shared construction of the Lambda and gamma terms; `mix_block` maps the mixture's state into
/// measurement space and `target_block` becomes the message's H.
LikelihoodMessage association_message(const Eigen::VectorXd& eta_row, const GaussianMixture& mixture,
                                      std::span<const Vector> measurements, const Matrix& mix_block,
                                      const Matrix& target_block, const Matrix& r, double log_constant,
                                      const DetectionParams& det, const MessageOptions& options) {
    det.validate();
    if (static_cast<std::size_t>(eta_row.size()) != measurements.size() + 1) {
        throw DimensionError("association message: eta row length must be M+1");
    }
    LikelihoodMessage msg;
    msg.log_constant = log_constant;
    if (det.p_detect == 0.0 || mixture.empty()) {
        return msg;
    }
    const double log_scale = std::log(det.p_detect) - std::log(det.clutter_rate * det.clutter_density);
    std::vector<Matrix> covs;
    std::vector<Vector> shifts;
    for (const auto& c : mixture.components) {
        covs.push_back(symmetrize(r + mix_block * c.cov * mix_block.transpose()));
        shifts.push_back(mix_block * c.mean);
    }
    for (std::size_t m = 0; m < measurements.size(); ++m) {
        const double eta = eta_row(static_cast<Eigen::Index>(m + 1));
        if (!(eta > options.eta_floor)) {
            continue;
        }
        for (std::size_t j = 0; j < mixture.size(); ++j) {
            const double lw = mixture.components[j].log_weight;
            if (lw == kNegInf) {
                continue;
            }
            LikelihoodComponent t;
            t.log_u = std::log(eta) + log_scale + lw;
            t.e = measurements[m] - shifts[j];
            t.H = target_block;
            t.C = covs[j];
            msg.terms.push_back(std::move(t));
        }
    }
    return msg;
}

} // namespace

LikelihoodMessage compute_lambda_msg(const Eigen::VectorXd& eta_row, const GaussianMixture& delta_exist,
                                     std::span<const Vector> measurements, const LinearizedObservation& obs,
                                     const DetectionParams& det, const MessageOptions& options) {
    const double exist = delta_exist.empty() ? 0.0 : delta_exist.total_weight();
    const double constant = log_or_neg_inf(eta_row(0) * (1.0 - det.p_detect * exist));
    return association_message(eta_row, delta_exist, measurements, obs.E, obs.G, obs.R, constant, det, options);
}

GammaMessage compute_gamma_msg(const Eigen::VectorXd& eta_row, const GaussianMixture& theta,
                               std::span<const Vector> measurements, const LinearizedObservation& obs,
                               const DetectionParams& det, const MessageOptions& options) {
    GammaMessage out;
    out.eta0 = eta_row(0);
    const double constant = log_or_neg_inf(eta_row(0) * (1.0 - det.p_detect));
    out.exist = association_message(eta_row, theta, measurements, obs.G, obs.E, obs.R, constant, det, options);
    return out;
}

GaussianMixture extract_theta(const GibbsProductState& state, std::size_t excluded, const GaussianMixture& fallback,
                              const GibbsOptions& options) {
    GaussianMixture theta;
    if (excluded < state.likelihood_count()) {
        theta = leave_one_out_mixture(state, excluded, options);
    }
    if (theta.empty()) {
        theta = fallback;
    }
    theta.normalize();
    return theta;
}

} // namespace scsmtt
