#include "scsmtt/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace scsmtt;

namespace {

using Set = std::vector<Eigen::Vector2d>;

Set random_set(std::mt19937_64& rng, int max_size, double extent) {
    std::uniform_int_distribution<int> n(0, max_size);
    std::uniform_real_distribution<double> u(0.0, extent);
    Set out(static_cast<std::size_t>(n(rng)));
    for (auto& p : out) p = Eigen::Vector2d(u(rng), u(rng));
    return out;
}

/// OSPA by enumerating every injection of the smaller set into the larger one.
double brute_force_ospa(Set x, Set y, double c, double p) {
    if (x.size() > y.size()) std::swap(x, y);
    const std::size_t m = x.size();
    const std::size_t n = y.size();
    if (n == 0) return 0.0;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            s += std::pow(std::min((x[i] - y[static_cast<std::size_t>(perm[i])]).norm(), c), p);
        }
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::pow((best + std::pow(c, p) * static_cast<double>(n - m)) / static_cast<double>(n), 1.0 / p);
}

} // namespace

TEST(Ospa, IdenticalSetsGiveZero) {
    const Set x{{1.0, 2.0}, {50.0, -3.0}, {7.0, 7.0}};
    EXPECT_EQ(ospa(x, x), 0.0);
    EXPECT_EQ(ospa({}, {}), 0.0);
}

TEST(Ospa, EmptyAgainstSingletonIsCutoff) {
    EXPECT_DOUBLE_EQ(ospa({}, {{4.0, 4.0}}), 20.0);
    EXPECT_DOUBLE_EQ(ospa({{4.0, 4.0}}, {}), 20.0);
}

TEST(Ospa, SinglePairIsEuclideanDistance) { EXPECT_NEAR(ospa({{0.0, 0.0}}, {{3.0, 4.0}}), 5.0, 1e-12); }

TEST(Ospa, RejectsInvalidParameters) {
    EXPECT_THROW((void)ospa({}, {}, OspaParams{0.0, 1.0}), std::invalid_argument);
    EXPECT_THROW((void)ospa({}, {}, OspaParams{20.0, 0.5}), std::invalid_argument);
}

TEST(Ospa, MatchesBruteForceAssignment) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const Set x = random_set(rng, 6, 60.0);
        const Set y = random_set(rng, 6, 60.0);
        for (double p : {1.0, 2.0}) {
            const OspaParams params{20.0, p};
            EXPECT_NEAR(ospa(x, y, params), brute_force_ospa(x, y, 20.0, p), 1e-10);
        }
    }
}

TEST(Ospa, MetricPropertiesOnRandomTriples) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const Set x = random_set(rng, 6, 80.0);
        const Set y = random_set(rng, 6, 80.0);
        const Set z = random_set(rng, 6, 80.0);
        for (double p : {1.0, 2.0}) {
            const OspaParams params{20.0, p};
            const double dxy = ospa(x, y, params);
            EXPECT_NEAR(dxy, ospa(y, x, params), 1e-12);
            EXPECT_GE(dxy, 0.0);
            EXPECT_LE(dxy, 20.0 + 1e-12);
            EXPECT_LE(dxy, ospa(x, z, params) + ospa(z, y, params) + 1e-9);
        }
    }
}

TEST(Ospa, FirstOrderDecompositionSumsToTotal) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const Set x = random_set(rng, 6, 60.0);
        const Set y = random_set(rng, 6, 60.0);
        const auto r = ospa_detail(x, y);
        EXPECT_NEAR(r.localization + r.cardinality, r.total, 1e-12);
        const std::size_t n = std::max(x.size(), y.size());
        const std::size_t m = std::min(x.size(), y.size());
        if (n > 0) {
            EXPECT_NEAR(r.cardinality, 20.0 * static_cast<double>(n - m) / static_cast<double>(n), 1e-12);
        }
        ASSERT_EQ(r.assignment.size(), m);
        const Set& small = x.size() <= y.size() ? x : y;
        const Set& large = x.size() <= y.size() ? y : x;
        double loc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            loc += std::min((small[i] - large[static_cast<std::size_t>(r.assignment[i])]).norm(), 20.0);
        }
        if (n > 0) {
            EXPECT_NEAR(loc / static_cast<double>(n), r.localization, 1e-12);
        }
    }
}

TEST(Hungarian, MatchesBruteForceOnRectangularCosts) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int rows = 1 + trial % 4;
        const int cols = rows + trial % 3;
        Eigen::MatrixXd cost(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) cost(i, j) = u(rng);
        const auto a = hungarian(cost);
        ASSERT_EQ(a.size(), static_cast<std::size_t>(rows));
        std::vector<int> sorted = a;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
        double got = 0.0;
        for (int i = 0; i < rows; ++i) got += cost(i, a[static_cast<std::size_t>(i)]);
        std::vector<int> perm(static_cast<std::size_t>(cols));
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do {
            double s = 0.0;
            for (int i = 0; i < rows; ++i) s += cost(i, perm[static_cast<std::size_t>(i)]);
            best = std::min(best, s);
        } while (std::next_permutation(perm.begin(), perm.end()));
        EXPECT_NEAR(got, best, 1e-12);
    }
}

TEST(AgentRmse, PerfectEstimatesGiveZero) {
    const std::vector<Vector> t{Vector::Constant(4, 1.0), Vector::Constant(4, 2.0)};
    EXPECT_EQ(agent_rmse(t, t, {true, true}), 0.0);
}

TEST(AgentRmse, SingleOffsetIsEuclidean) {
    Vector truth = Vector::Zero(4);
    Vector est = truth;
    est(0) = 3.0;
    est(1) = 4.0;
    est(2) = 100.0;
    EXPECT_NEAR(agent_rmse({truth}, {est}, {true}), 5.0, 1e-12);
}

TEST(AgentRmse, ExcludedAgentsIgnored) {
    Vector truth = Vector::Zero(4);
    Vector off = truth;
    off(0) = 3.0;
    off(1) = 4.0;
    Vector far = truth;
    far(0) = 1000.0;
    EXPECT_NEAR(agent_rmse({truth, truth}, {off, far}, {true, false}), 5.0, 1e-12);
    Vector off2 = truth;
    off2(0) = 6.0;
    off2(1) = 8.0;
    EXPECT_NEAR(agent_rmse({truth, truth}, {off, off2}, {true, true}), std::sqrt((25.0 + 100.0) / 2.0), 1e-12);
}

TEST(CardinalityStats, ConstantCountsHaveZeroSpread) {
    const auto s = cardinality_stats({{2, 3, 4}, {2, 3, 4}, {2, 3, 4}});
    ASSERT_EQ(s.mean.size(), 3u);
    EXPECT_EQ(s.mean[1], 3.0);
    EXPECT_EQ(s.std[0], 0.0);
    EXPECT_EQ(s.std[2], 0.0);
}

TEST(CardinalityStats, MeanOfOneAndThreeIsTwo) {
    const auto s = cardinality_stats({{1}, {3}});
    EXPECT_EQ(s.mean[0], 2.0);
    EXPECT_NEAR(s.std[0], std::sqrt(2.0), 1e-15);
}

TEST(CardinalityStats, MatchesTwoPassRecomputation) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> u(0, 6);
    std::vector<std::vector<int>> counts(17, std::vector<int>(9));
    for (auto& row : counts)
        for (auto& c : row) c = u(rng);
    const auto s = cardinality_stats(counts);
    for (std::size_t t = 0; t < 9; ++t) {
        long double sum = 0.0L;
        for (const auto& row : counts) sum += row[t];
        const long double mean = sum / counts.size();
        long double ss = 0.0L;
        for (const auto& row : counts) ss += (row[t] - mean) * (row[t] - mean);
        EXPECT_NEAR(s.mean[t], static_cast<double>(mean), 1e-12);
        EXPECT_NEAR(s.std[t], static_cast<double>(std::sqrt(ss / (counts.size() - 1))), 1e-12);
    }
}
