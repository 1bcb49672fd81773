#include "scsmtt/models.hpp"

#include <numbers>

namespace scsmtt {

void PtBelief::normalize() {
    const double lw = exist_gm.empty() ? kNegInf : exist_gm.log_total_weight();
    const double total = std::exp(lw) + nonexist_mass;
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericalError("PtBelief::normalize: zero total mass");
    }
    const double lt = std::log(total);
    exist_gm.scale_log(-lt);
    nonexist_mass /= total;
}

void PtBelief::normalize_with_log_nonexist(double log_nonexist) {
    const double lw = exist_gm.empty() ? kNegInf : exist_gm.log_total_weight();
    const double parts[] = {lw, log_nonexist};
    const double lt = log_sum_exp(parts);
    if (!std::isfinite(lt)) {
        throw NumericalError("PtBelief::normalize_with_log_nonexist: zero or infinite total mass");
    }
    exist_gm.scale_log(-lt);
    nonexist_mass = std::exp(log_nonexist - lt);
}

void TargetDynamics::validate() const {
    if (p_survival < 0.0 || p_survival > 1.0 || p_birth < 0.0 || p_birth > 1.0) {
        throw std::invalid_argument("TargetDynamics: probabilities must lie in [0,1]");
    }
    const double total = birth_gm.empty() ? 0.0 : birth_gm.total_weight();
    if (std::abs(total - p_birth) > 1e-9) {
        throw std::invalid_argument("TargetDynamics: birth weights must sum to p_birth");
    }
}

double RangeBearingModel::clutter_density() const {
    if (!(max_range > 0.0)) {
        throw std::invalid_argument("RangeBearingModel: max_range must be positive");
    }
    return 1.0 / (max_range * 2.0 * std::numbers::pi);
}

Vector LinearizedObservation::effective(const Vector& z) const {
    Vector r = z - predicted;
    if (r.size() >= 2) {
        r(1) = wrap_angle(r(1));
    }
    return r + predicted - offset;
}

Matrix constant_velocity_transition(double ts) {
    Matrix a = Matrix::Identity(4, 4);
    a(0, 2) = ts;
    a(1, 3) = ts;
    return a;
}

Matrix constant_velocity_noise(double ts, double sigma_q) {
    const double q = sigma_q * sigma_q;
    const double t2 = ts * ts;
    const double t3 = t2 * ts;
    const double t4 = t3 * ts;
    Matrix m = Matrix::Zero(4, 4);
    for (int i = 0; i < 2; ++i) {
        m(i, i) = q * t4 / 4.0;
        m(i, i + 2) = q * t3 / 2.0;
        m(i + 2, i) = q * t3 / 2.0;
        m(i + 2, i + 2) = q * t2;
    }
    return m;
}

GaussianMixture agent_predict(const GaussianMixture& prior, const AgentDynamics& dyn) {
    GaussianMixture out;
    out.components.reserve(prior.size());
    for (const auto& c : prior.components) {
        require_same_dim(c.dim(), dyn.A.cols(), "agent_predict");
        ScaledGaussian p;
        p.log_weight = c.log_weight;
        p.mean = dyn.A * c.mean;
        p.cov = symmetrize(dyn.Q + dyn.A * c.cov * dyn.A.transpose());
        out.components.push_back(std::move(p));
    }
    return out;
}

PtBelief target_predict(const PtBelief& prior, const TargetDynamics& dyn) {
    const double pe = std::min(1.0, prior.existence());
    PtBelief out;
    if (dyn.p_survival > 0.0) {
        const double ls = std::log(dyn.p_survival);
        for (const auto& c : prior.exist_gm.components) {
            if (c.log_weight == kNegInf) {
                continue;
            }
            require_same_dim(c.dim(), dyn.B.cols(), "target_predict");
            ScaledGaussian p;
            p.log_weight = c.log_weight + ls;
            p.mean = dyn.B * c.mean;
            p.cov = symmetrize(dyn.Sigma + dyn.B * c.cov * dyn.B.transpose());
            out.exist_gm.components.push_back(std::move(p));
        }
    }
    if (pe < 1.0) {
        const double lb = std::log1p(-pe);
        for (const auto& c : dyn.birth_gm.components) {
            if (c.log_weight == kNegInf) {
                continue;
            }
            ScaledGaussian b = c;
            b.log_weight += lb;
            out.exist_gm.components.push_back(std::move(b));
        }
    }
    out.nonexist_mass = 1.0 - dyn.p_birth + (dyn.p_birth - dyn.p_survival) * pe;
    return out;
}

std::pair<double, double> range_bearing(const Eigen::Vector2d& observer, const Eigen::Vector2d& source) {
    const Eigen::Vector2d delta = source - observer;
    const double r = delta.norm();
    if (!(r > 0.0)) {
        throw std::invalid_argument("range_bearing: coincident points");
    }
    return {r, wrap_angle(std::atan2(delta.y(), delta.x()))};
}

Vector range_bearing_vec(const Vector& observer_state, const Vector& source_state) {
    auto [r, b] = range_bearing(observer_state.head<2>(), source_state.head<2>());
    Vector z(2);
    z << r, b;
    return z;
}

LinearizedObservation linearize_range_bearing(const Vector& observer_mean, const Vector& source_mean,
                                              ObservationKind which, const Matrix& R) {
    const Eigen::Vector2d delta = source_mean.head<2>() - observer_mean.head<2>();
    const double r2 = delta.squaredNorm();
    if (!(r2 > 0.0)) {
        throw std::invalid_argument("linearize_range_bearing: coincident linearization points");
    }
    const double r = std::sqrt(r2);
    Eigen::Matrix2d j;
    j.row(0) = delta.transpose() / r;
    j(1, 0) = -delta.y() / r2;
    j(1, 1) = delta.x() / r2;

    LinearizedObservation lin;
    lin.kind = which;
    lin.R = R;
    lin.E = Matrix::Zero(2, source_mean.size());
    lin.E.leftCols(2) = j;
    lin.G = Matrix::Zero(2, observer_mean.size());
    lin.G.leftCols(2) = -j;
    lin.predicted = range_bearing_vec(observer_mean, source_mean);
    lin.offset = lin.predicted - lin.G * observer_mean - lin.E * source_mean;
    return lin;
}

} // namespace scsmtt
