#pragma once

#include "scsmtt/linalg.hpp"

#include <vector>

namespace scsmtt {

struct OspaParams {
    double cutoff = 20.0;
    double order = 1.0;

    /// Throws std::invalid_argument unless cutoff > 0 and order >= 1.
    void validate() const;
};

/// OSPA value with its localization and cardinality parts; for order 1 the parts sum to the total.
struct OspaResult {
    double total = 0.0;
    double localization = 0.0;
    double cardinality = 0.0;
    /// assignment[i] is the index in the larger set matched to element i of the smaller set.
    std::vector<int> assignment;
};

/// Minimum-cost assignment of every row to a distinct column (rows <= cols).
[[nodiscard]] std::vector<int> hungarian(const Eigen::MatrixXd& cost);

/// OSPA between two sets of 2-D positions.
[[nodiscard]] OspaResult ospa_detail(const std::vector<Eigen::Vector2d>& x, const std::vector<Eigen::Vector2d>& y,
                                     const OspaParams& params = {});

[[nodiscard]] double ospa(const std::vector<Eigen::Vector2d>& x, const std::vector<Eigen::Vector2d>& y,
                          const OspaParams& params = {});

/// Root mean squared position error over the selected agents.
[[nodiscard]] double agent_rmse(const std::vector<Vector>& truth, const std::vector<Vector>& estimates,
                                const std::vector<bool>& include);

struct CardinalityStats {
    std::vector<double> mean;
    std::vector<double> std;
};

/// counts[r][t] is run r's confirmed-target count at step t. Uses the n-1 sample standard deviation.
[[nodiscard]] CardinalityStats cardinality_stats(const std::vector<std::vector<int>>& counts);

} // namespace scsmtt
