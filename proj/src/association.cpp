#include "scsmtt/association.hpp"

#include <algorithm>

namespace scsmtt {

void DetectionParams::validate() const {
    if (p_detect < 0.0 || p_detect > 1.0) {
        throw std::invalid_argument("DetectionParams: p_detect outside [0,1]");
    }
    if (!(clutter_rate * clutter_density > 0.0)) {
        throw std::invalid_argument("DetectionParams: clutter intensity must be positive");
    }
}

Eigen::VectorXd compute_beta_gm(const GaussianMixture& theta, const GaussianMixture& delta_exist,
                                const LinearizedObservation& obs, std::span<const Vector> measurements,
                                const DetectionParams& det) {
    det.validate();
    const std::size_t m_count = measurements.size();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_count + 1));
    const double exist_mass = delta_exist.empty() ? 0.0 : delta_exist.total_weight();
    beta(0) = 1.0 - det.p_detect * exist_mass;
    if (m_count == 0 || delta_exist.empty() || theta.empty() || det.p_detect == 0.0) {
        return beta;
    }
    const double log_scale = std::log(det.p_detect) - std::log(det.clutter_rate * det.clutter_density);
    const auto dz = obs.R.rows();

    struct Pair {
        double log_w;
        Vector mean;
        Eigen::LLT<Matrix> llt;
        double log_norm;
    };
    std::vector<Pair> pairs;
    pairs.reserve(theta.size() * delta_exist.size());
    for (const auto& d : delta_exist.components) {
        if (d.log_weight == kNegInf) {
            continue;
        }
        const Matrix eoe = obs.E * d.cov * obs.E.transpose();
        const Vector em = obs.E * d.mean;
        for (const auto& t : theta.components) {
            if (t.log_weight == kNegInf) {
                continue;
            }
            Matrix s = obs.R + eoe + obs.G * t.cov * obs.G.transpose();
            auto llt = robust_llt(s);
            const double log_norm = -0.5 * (static_cast<double>(dz) * kLog2Pi + log_det(llt));
            pairs.push_back(Pair{d.log_weight + t.log_weight, em + obs.G * t.mean, std::move(llt), log_norm});
        }
    }
    std::vector<double> terms(pairs.size());
    for (std::size_t m = 0; m < m_count; ++m) {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            Vector r = measurements[m] - pairs[p].mean;
            const double q = pairs[p].llt.matrixL().solve(r).squaredNorm();
            terms[p] = pairs[p].log_w + pairs[p].log_norm - 0.5 * q;
        }
        beta(static_cast<Eigen::Index>(m + 1)) = std::exp(log_scale + log_sum_exp(terms));
    }
    return beta;
}

Eigen::VectorXd unobserved_beta_row(std::size_t measurement_count) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(measurement_count + 1));
    b(0) = 1.0;
    return b;
}

AssociationTable inner_bp(const Eigen::MatrixXd& beta, const InnerBpOptions& options) {
    const Eigen::Index k_count = beta.rows();
    const Eigen::Index m_count = beta.cols() - 1;
    AssociationTable out;
    out.beta = beta;
    out.eta = Eigen::MatrixXd::Zero(k_count, beta.cols());
    if (k_count == 0) {
        return out;
    }
    if ((beta.array() < 0.0).any()) {
        throw std::invalid_argument("inner_bp: negative association weight");
    }
    // nu(m, k) is the measurement-to-PT message, phi(k, m) the PT-to-measurement message.
    Eigen::MatrixXd nu = Eigen::MatrixXd::Ones(m_count, k_count);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(k_count, m_count);
    if (m_count > 0) {
        out.converged = false;
        for (int it = 0; it < options.max_iters; ++it) {
            double change = 0.0;
            for (Eigen::Index k = 0; k < k_count; ++k) {
                for (Eigen::Index m = 0; m < m_count; ++m) {
                    double denom = beta(k, 0);
                    for (Eigen::Index mp = 0; mp < m_count; ++mp) {
                        if (mp != m) {
                            denom += beta(k, mp + 1) * nu(mp, k);
                        }
                    }
                    const double v = denom > 0.0 ? beta(k, m + 1) / denom : 0.0;
                    change = std::max(change, std::abs(v - phi(k, m)));
                    phi(k, m) = v;
                }
            }
            for (Eigen::Index m = 0; m < m_count; ++m) {
                const double total = phi.col(m).sum();
                for (Eigen::Index k = 0; k < k_count; ++k) {
                    const double v = 1.0 / (1.0 + (total - phi(k, m)));
                    change = std::max(change, std::abs(v - nu(m, k)));
                    nu(m, k) = v;
                }
            }
            out.iterations = it + 1;
            if (change < options.tol) {
                out.converged = true;
                break;
            }
        }
    }
    for (Eigen::Index k = 0; k < k_count; ++k) {
        out.eta(k, 0) = beta(k, 0);
        for (Eigen::Index m = 0; m < m_count; ++m) {
            out.eta(k, m + 1) = beta(k, m + 1) * nu(m, k);
        }
        const double total = out.eta.row(k).sum();
        if (total > 0.0 && std::isfinite(total)) {
            out.eta.row(k) /= total;
        } else {
            out.eta.row(k).setZero();
            out.eta(k, 0) = 1.0;
        }
    }
    return out;
}

} // namespace scsmtt
