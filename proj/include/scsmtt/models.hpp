#pragma once

#include "scsmtt/gm.hpp"

#include <utility>

namespace scsmtt {

/// Existence-augmented potential-target belief. The r=1 part is a mixture whose total
/// weight is the existence probability; the r=0 part is a scalar mass.
struct PtBelief {
    GaussianMixture exist_gm;
    double nonexist_mass = 1.0;

    [[nodiscard]] double existence() const { return exist_gm.empty() ? 0.0 : exist_gm.total_weight(); }
    /// Rescales both parts so that they sum to one.
    void normalize();
    /// Sets the nonexistence part from its log mass and normalizes both parts in the log domain.
    void normalize_with_log_nonexist(double log_nonexist);
};

struct AgentDynamics {
    Matrix A;
    Matrix Q;
};

struct TargetDynamics {
    Matrix B;
    Matrix Sigma;
    double p_survival = 1.0;
    double p_birth = 0.0;
    GaussianMixture birth_gm;

    /// Throws std::invalid_argument when the birth weights do not sum to p_birth.
    void validate() const;
};

struct Rect {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    [[nodiscard]] bool contains(double x, double y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
    [[nodiscard]] double area() const { return (x_max - x_min) * (y_max - y_min); }
};

struct RangeBearingModel {
    Matrix R;
    double p_detect = 1.0;
    double clutter_rate = 0.0;
    Rect roi;
    double max_range = 0.0;

    /// Constant clutter density over range in [0, max_range] and bearing in (-pi, pi].
    [[nodiscard]] double clutter_density() const;
};

enum class ObservationKind { target_measurement, inter_agent };

/// First-order expansion z ~ h(y_lin, x_lin) + G (y - y_lin) + E (x - x_lin) + n. For
/// inter-agent links E plays the role of the neighbor block F.
struct LinearizedObservation {
    ObservationKind kind = ObservationKind::target_measurement;
    Matrix G;
    Matrix E;
    /// h(y_lin, x_lin) - G y_lin - E x_lin.
    Vector offset;
    /// h(y_lin, x_lin).
    Vector predicted;
    Matrix R;

    /// Residual-form measurement wrap(z - h_lin) + G y_lin + E x_lin consumed by likelihood terms.
    [[nodiscard]] Vector effective(const Vector& z) const;
};

/// Constant-velocity transition for the state [px, py, vx, vy].
[[nodiscard]] Matrix constant_velocity_transition(double ts);
/// Discretized white-acceleration noise for the constant-velocity state.
[[nodiscard]] Matrix constant_velocity_noise(double ts, double sigma_q);

[[nodiscard]] GaussianMixture agent_predict(const GaussianMixture& prior, const AgentDynamics& dyn);

[[nodiscard]] PtBelief target_predict(const PtBelief& prior, const TargetDynamics& dyn);

/// Range and bearing from observer to source.
[[nodiscard]] std::pair<double, double> range_bearing(const Eigen::Vector2d& observer,
                                                      const Eigen::Vector2d& source);

[[nodiscard]] Vector range_bearing_vec(const Vector& observer_state, const Vector& source_state);

[[nodiscard]] LinearizedObservation linearize_range_bearing(const Vector& observer_mean,
                                                            const Vector& source_mean,
                                                            ObservationKind which,
                                                            const Matrix& R);

} // namespace scsmtt
