#include "scsmtt/metrics.hpp"

#include <limits>
#include <stdexcept>

namespace scsmtt {

void OspaParams::validate() const {
    if (!(cutoff > 0.0) || !(order >= 1.0)) {
        throw std::invalid_argument("OspaParams: need cutoff > 0 and order >= 1");
    }
}

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
    const auto n = static_cast<int>(cost.rows());
    const auto m = static_cast<int>(cost.cols());
    if (n > m) {
        throw DimensionError("hungarian: more rows than columns");
    }
    if (n == 0) {
        return {};
    }
    const double inf = std::numeric_limits<double>::infinity();
    // Potentials u (rows) and v (columns), 1-based with column 0 as the virtual start.
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(m + 1), 0.0);
    std::vector<int> match(static_cast<std::size_t>(m + 1), 0), way(static_cast<std::size_t>(m + 1), 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(m + 1), inf);
        std::vector<bool> used(static_cast<std::size_t>(m + 1), false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = match[static_cast<std::size_t>(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (used[ju]) {
                    continue;
                }
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[ju];
                if (cur < minv[ju]) {
                    minv[ju] = cur;
                    way[ju] = j0;
                }
                if (minv[ju] < delta) {
                    delta = minv[ju];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (used[ju]) {
                    u[static_cast<std::size_t>(match[ju])] += delta;
                    v[ju] -= delta;
                } else {
                    minv[ju] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> out(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= m; ++j) {
        if (match[static_cast<std::size_t>(j)] != 0) {
            out[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
        }
    }
    return out;
}

OspaResult ospa_detail(const std::vector<Eigen::Vector2d>& x, const std::vector<Eigen::Vector2d>& y,
                       const OspaParams& params) {
    params.validate();
    const bool swap = x.size() > y.size();
    const auto& small = swap ? y : x;
    const auto& large = swap ? x : y;
    OspaResult r;
    const std::size_t m = small.size(), n = large.size();
    if (n == 0) {
        return r;
    }
    const double p = params.order, c = params.cutoff;
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::pow(std::min((small[i] - large[j]).norm(), c), p);
        }
    }
    r.assignment = hungarian(cost);
    double loc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        loc += cost(static_cast<Eigen::Index>(i), r.assignment[i]);
    }
    const double card = std::pow(c, p) * static_cast<double>(n - m);
    const double nn = static_cast<double>(n);
    r.total = std::pow((loc + card) / nn, 1.0 / p);
    r.localization = std::pow(loc / nn, 1.0 / p);
    r.cardinality = std::pow(card / nn, 1.0 / p);
    return r;
}

double ospa(const std::vector<Eigen::Vector2d>& x, const std::vector<Eigen::Vector2d>& y, const OspaParams& params) {
    return ospa_detail(x, y, params).total;
}

double agent_rmse(const std::vector<Vector>& truth, const std::vector<Vector>& estimates,
                  const std::vector<bool>& include) {
    if (truth.size() != estimates.size() || truth.size() != include.size()) {
        throw DimensionError("agent_rmse: size mismatch");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s < truth.size(); ++s) {
        if (!include[s]) {
            continue;
        }
        sum += (truth[s].head<2>() - estimates[s].head<2>()).squaredNorm();
        ++count;
    }
    return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count));
}

CardinalityStats cardinality_stats(const std::vector<std::vector<int>>& counts) {
    CardinalityStats st;
    if (counts.empty()) {
        return st;
    }
    const std::size_t steps = counts.front().size();
    for (const auto& run : counts) {
        if (run.size() != steps) {
            throw DimensionError("cardinality_stats: runs have different lengths");
        }
    }
    const double r = static_cast<double>(counts.size());
    for (std::size_t t = 0; t < steps; ++t) {
        double mean = 0.0;
        for (const auto& run : counts) {
            mean += run[t];
        }
        mean /= r;
        double ss = 0.0;
        for (const auto& run : counts) {
            ss += (run[t] - mean) * (run[t] - mean);
        }
        st.mean.push_back(mean);
        st.std.push_back(counts.size() > 1 ? std::sqrt(ss / (r - 1.0)) : 0.0);
    }
    return st;
}

} // namespace scsmtt
