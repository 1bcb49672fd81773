#include "oracles.hpp"

#include "scsmtt/association.hpp"

#include <gtest/gtest.h>

using namespace scsmtt;
using namespace scsmtt::testing;

namespace {

ScaledGaussian unit_1d(double m, double v) {
    ScaledGaussian g;
    g.mean = Vector::Constant(1, m);
    g.cov = Matrix::Constant(1, 1, v);
    return g;
}

LinearizedObservation scalar_obs(double g, double e, double r) {
    LinearizedObservation o;
    o.G = Matrix::Constant(1, 1, g);
    o.E = Matrix::Constant(1, 1, e);
    o.R = Matrix::Constant(1, 1, r);
    o.offset = Vector::Zero(1);
    o.predicted = Vector::Zero(1);
    return o;
}

} // namespace

TEST(ComputeBeta, MissedDetectionColumn) {
    GaussianMixture theta{{unit_1d(0, 1)}};
    GaussianMixture delta{{unit_1d(0, 1)}};
    std::vector<Vector> z{Vector::Constant(1, 0.3)};
    auto b = compute_beta_gm(theta, delta, scalar_obs(1, 1, 1), z, {0.95, 10, 0.1});
    EXPECT_NEAR(b(0), 0.05, 1e-15);
}

TEST(ComputeBeta, NonexistentPt) {
    GaussianMixture theta{{unit_1d(0, 1)}};
    std::vector<Vector> z{Vector::Constant(1, 0.3), Vector::Constant(1, 2.0)};
    auto b = compute_beta_gm(theta, GaussianMixture{}, scalar_obs(1, 1, 1), z, {0.95, 10, 0.1});
    EXPECT_EQ(b(0), 1.0);
    EXPECT_EQ(b(1), 0.0);
    EXPECT_EQ(b(2), 0.0);
}

TEST(ComputeBeta, ScalarPlugIn) {
    const double g = 0.7, e = -1.3, r = 0.4;
    GaussianMixture theta{{unit_1d(2.0, 0.5)}};
    GaussianMixture delta{{unit_1d(-1.0, 1.5)}};
    const double z = 0.9, pd = 0.8, lambda = 5.0, f = 0.02;
    std::vector<Vector> zs{Vector::Constant(1, z)};
    auto b = compute_beta_gm(theta, delta, scalar_obs(g, e, r), zs, {pd, lambda, f});
    const double mean = e * -1.0 + g * 2.0;
    const double var = r + e * e * 1.5 + g * g * 0.5;
    const double expect = pd * std::exp(-0.5 * (z - mean) * (z - mean) / var) / std::sqrt(2 * M_PI * var) / (lambda * f);
    EXPECT_NEAR(b(1), expect, 1e-12 * expect);
    EXPECT_NEAR(b(0), 1 - pd, 1e-15);
}

TEST(ComputeBeta, MixtureSumsOverComponentPairs) {
    std::mt19937_64 rng(5);
    GaussianMixture theta, delta;
    theta.components = {unit_1d(0.5, 0.3), unit_1d(-1, 0.8)};
    theta.components[0].log_weight = std::log(0.3);
    theta.components[1].log_weight = std::log(0.7);
    delta.components = {unit_1d(1, 0.2), unit_1d(2, 0.6)};
    delta.components[0].log_weight = std::log(0.4);
    delta.components[1].log_weight = std::log(0.2);
    auto obs = scalar_obs(-1.0, 1.0, 0.5);
    std::vector<Vector> zs{Vector::Constant(1, 1.2), Vector::Constant(1, -0.4)};
    auto b = compute_beta_gm(theta, delta, obs, zs, {0.9, 3.0, 0.1});
    EXPECT_NEAR(b(0), 1 - 0.9 * 0.6, 1e-14);
    for (int m = 0; m < 2; ++m) {
        double acc = 0;
        for (auto& d : delta.components)
            for (auto& t : theta.components) {
                const double mu = d.mean(0) - t.mean(0);
                const double var = 0.5 + d.cov(0, 0) + t.cov(0, 0);
                acc += d.weight() * t.weight() * naive_pdf(zs[m], Eigen::VectorXd::Constant(1, mu), Eigen::MatrixXd::Constant(1, 1, var));
            }
        EXPECT_NEAR(b(m + 1), 0.9 * acc / 0.3, 1e-12);
    }
}

TEST(ComputeBeta, ZeroClutterIntensityRejected) {
    GaussianMixture theta{{unit_1d(0, 1)}};
    std::vector<Vector> z{Vector::Constant(1, 0.3)};
    EXPECT_THROW((void)compute_beta_gm(theta, theta, scalar_obs(1, 1, 1), z, {0.9, 0.0, 0.1}), std::invalid_argument);
}

TEST(InnerBp, NoMeasurements) {
    Eigen::MatrixXd beta(3, 1);
    beta << 0.3, 1.0, 0.05;
    auto t = inner_bp(beta);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(t.eta(k, 0), 1.0);
}

TEST(InnerBp, SinglePtSingleMeasurement) {
    Eigen::MatrixXd beta(1, 2);
    beta << 0.2, 3.0;
    auto t = inner_bp(beta);
    EXPECT_NEAR(t.eta(0, 1), 3.0 / 3.2, 1e-12);
}

TEST(InnerBp, TwoPtsOneMeasurementTree) {
    Eigen::MatrixXd beta(2, 2);
    beta << 1.0, 1.0, 1.0, 1.0;
    auto t = inner_bp(beta);
    auto ref = enumerate_association_marginals(beta);
    EXPECT_NEAR(t.eta(0, 1), 1.0 / 3.0, 1e-10);
    EXPECT_LT((t.eta - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(InnerBp, RowsAreProbabilityVectors) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd beta(4, 5);
        for (int i = 0; i < beta.size(); ++i) beta.data()[i] = u(rng);
        auto t = inner_bp(beta, {200, 1e-12});
        for (int k = 0; k < 4; ++k) {
            EXPECT_NEAR(t.eta.row(k).sum(), 1.0, 1e-12);
            EXPECT_GE(t.eta.row(k).minCoeff(), 0.0);
        }
    }
}

TEST(InnerBp, UnobservedRowsStayMissed) {
    Eigen::MatrixXd beta(2, 3);
    beta.row(0) = unobserved_beta_row(2).transpose();
    beta.row(1) << 0.1, 2.0, 0.5;
    auto t = inner_bp(beta);
    EXPECT_NEAR(t.eta(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(t.eta(1, 1) + t.eta(1, 2) + t.eta(1, 0), 1.0, 1e-15);
}

TEST(InnerBp, LoopyInstancesConverge) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.01, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd beta(4, 5);
        for (int i = 0; i < beta.size(); ++i) beta.data()[i] = u(rng);
        auto t = inner_bp(beta, {200, 1e-10});
        EXPECT_TRUE(t.converged);
        EXPECT_LE(t.iterations, 200);
    }
}
