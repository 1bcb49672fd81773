#pragma once

#include "scsmtt/models.hpp"

#include <span>

namespace scsmtt {

/// Row k holds PT k's weights over measurement indices 0..M, column 0 being the missed detection.
struct AssociationTable {
    Eigen::MatrixXd beta;
    Eigen::MatrixXd eta;
    int iterations = 0;
    bool converged = true;
};

struct DetectionParams {
    double p_detect = 1.0;
    double clutter_rate = 1.0;
    double clutter_density = 1.0;

    /// Throws std::invalid_argument when lambda * f_fa is not positive.
    void validate() const;
};

/// Association weights of one PT at one agent. Measurements are effective (linearized) vectors.
[[nodiscard]] Eigen::VectorXd compute_beta_gm(const GaussianMixture& theta, const GaussianMixture& delta_exist,
                                              const LinearizedObservation& obs,
                                              std::span<const Vector> measurements, const DetectionParams& det);

/// Row for a PT the agent cannot observe: missed detection with certainty.
[[nodiscard]] Eigen::VectorXd unobserved_beta_row(std::size_t measurement_count);

struct InnerBpOptions {
    int max_iters = 100;
    double tol = 1e-8;
};

/// Iterates the PT/measurement bipartite messages and returns the normalized marginals eta.
/// Non-convergence is reported through the table's flags, never thrown.
[[nodiscard]] AssociationTable inner_bp(const Eigen::MatrixXd& beta, const InnerBpOptions& options = {});

} // namespace scsmtt
