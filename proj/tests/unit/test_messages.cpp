#include "oracles.hpp"

#include "scsmtt/messages.hpp"

#include <gtest/gtest.h>

using namespace scsmtt;
using namespace scsmtt::testing;

namespace {

LinearizedObservation random_obs(std::mt19937_64& rng) {
    Vector y(4), x(4);
    y << 10, 20, 1, 0;
    x << 150, -90, 0, 1;
    y.head<2>() += random_vec(rng, 2, 5.0);
    Matrix r = Matrix::Zero(2, 2);
    r.diagonal() << 4.0, 0.01;
    return linearize_range_bearing(y, x, ObservationKind::target_measurement, r);
}

GaussianMixture random_gm(std::mt19937_64& rng, int n, double total, const Vector& centre) {
    GaussianMixture gm;
    for (int i = 0; i < n; ++i) {
        ScaledGaussian g;
        g.mean = centre + random_vec(rng, 4, 3.0);
        g.cov = random_spd(rng, 4, 1.0, 20.0);
        g.log_weight = std::log(0.5 + i);
        gm.components.push_back(g);
    }
    gm.normalize();
    gm.scale_log(std::log(total));
    return gm;
}

} // namespace

TEST(PhiMessage, SingleComponentParameters) {
    std::mt19937_64 rng(1);
    auto obs = random_obs(rng);
    ScaledGaussian g;
    g.mean = Vector::Zero(4);
    g.mean << 150, -90, 0, 1;
    g.cov = random_spd(rng, 4, 1.0, 5.0);
    Vector w(2);
    w << 170.0, -0.6;
    auto msg = compute_phi_msg(GaussianMixture{{g}}, obs, w);
    ASSERT_EQ(msg.size(), 1u);
    EXPECT_EQ(msg.log_constant, kNegInf);
    EXPECT_EQ(msg.terms[0].log_u, 0.0);
    EXPECT_TRUE(msg.terms[0].e.isApprox(w - obs.E * g.mean, 1e-14));
    EXPECT_TRUE(msg.terms[0].H.isApprox(obs.G, 0));
    EXPECT_TRUE(msg.terms[0].C.isApprox(obs.R + obs.E * g.cov * obs.E.transpose(), 1e-14));
}

TEST(PhiMessage, ZeroNeighborUncertaintyAndWeights) {
    std::mt19937_64 rng(2);
    auto obs = random_obs(rng);
    auto gm = random_gm(rng, 3, 1.0, Vector::Zero(4));
    for (auto& c : gm.components) c.cov = Matrix::Zero(4, 4);
    auto msg = compute_phi_msg(gm, obs, Vector::Zero(2));
    for (std::size_t i = 0; i < gm.size(); ++i) {
        EXPECT_TRUE(msg.terms[i].C.isApprox(obs.R, 0));
        EXPECT_EQ(msg.terms[i].log_u, gm.components[i].log_weight);
    }
}

TEST(LambdaMessage, ConstantVanishesWithCertainDetection) {
    std::mt19937_64 rng(3);
    auto obs = random_obs(rng);
    auto delta = random_gm(rng, 1, 1.0, Vector::Zero(4));
    Eigen::VectorXd eta(2);
    eta << 0.3, 0.7;
    std::vector<Vector> z{Vector::Zero(2)};
    auto msg = compute_lambda_msg(eta, delta, z, obs, {1.0, 10.0, 0.01});
    EXPECT_EQ(msg.log_constant, kNegInf);
    EXPECT_EQ(msg.size(), 1u);
}

TEST(LambdaMessage, StructureAndDegenerateEta) {
    std::mt19937_64 rng(4);
    auto obs = random_obs(rng);
    Vector centre(4);
    centre << 150, -90, 0, 1;
    auto delta = random_gm(rng, 1, 0.6, centre);
    std::vector<Vector> z{Vector::Zero(2)};
    Eigen::VectorXd eta(2);
    eta << 0.4, 0.6;
    auto msg = compute_lambda_msg(eta, delta, z, obs, {0.9, 10.0, 0.01});
    EXPECT_EQ(msg.size(), 1u);
    EXPECT_NEAR(msg.log_constant, std::log(0.4 * (1 - 0.9 * 0.6)), 1e-14);
    eta << 1.0, 0.0;
    auto flat = compute_lambda_msg(eta, delta, z, obs, {0.9, 10.0, 0.01});
    EXPECT_EQ(flat.size(), 0u);
    EXPECT_NEAR(flat.log_constant, std::log(1 - 0.9 * 0.6), 1e-14);
}

TEST(LambdaMessage, PointwiseMatchesDefiningSum) {
    std::mt19937_64 rng(5);
    Vector centre(4);
    centre << 150, -90, 0, 1;
    for (int trial = 0; trial < 10; ++trial) {
        auto obs = random_obs(rng);
        auto delta = random_gm(rng, 2, 0.7, centre);
        std::vector<Vector> z;
        for (int m = 0; m < 3; ++m) {
            Vector zz = obs.offset + obs.E * centre + random_vec(rng, 2, 1.0);
            z.push_back(zz);
        }
        Eigen::VectorXd eta(4);
        eta << 0.1, 0.5, 0.3, 0.1;
        const DetectionParams det{0.9, 5.0, 0.02};
        auto msg = compute_lambda_msg(eta, delta, z, obs, det);
        EXPECT_EQ(msg.size(), 6u);
        for (int k = 0; k < 10; ++k) {
            Eigen::VectorXd y = random_vec(rng, 4, 3.0);
            double direct = eta(0) * (1 - 0.9 * 0.7);
            for (int m = 0; m < 3; ++m)
                for (const auto& c : delta.components)
                    direct += eta(m + 1) * 0.9 * c.weight() *
                              naive_pdf(z[m], obs.G * y + obs.E * c.mean, obs.R + obs.E * c.cov * obs.E.transpose()) / 0.1;
            EXPECT_NEAR(msg.log_eval(y), std::log(direct), 1e-9);
        }
        for (std::size_t i = 3; i < msg.size(); ++i) {
            EXPECT_TRUE(msg.terms[i].C.isApprox(msg.terms[i % 2].C, 0));
        }
    }
}

TEST(GammaMessage, PointwiseMatchesDefiningSum) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        auto obs = random_obs(rng);
        auto theta = random_gm(rng, 3, 1.0, Vector::Zero(4));
        std::vector<Vector> z{obs.predicted + random_vec(rng, 2, 1.0), obs.predicted + random_vec(rng, 2, 1.0)};
        Eigen::VectorXd eta(3);
        eta << 0.2, 0.5, 0.3;
        const DetectionParams det{0.95, 25.0, 0.001};
        auto g = compute_gamma_msg(eta, theta, z, obs, det);
        EXPECT_EQ(g.eta0, 0.2);
        EXPECT_EQ(g.exist.size(), 6u);
        for (int k = 0; k < 10; ++k) {
            Eigen::VectorXd x = random_vec(rng, 4, 3.0);
            double direct = 0.2 * (1 - 0.95);
            for (int m = 0; m < 2; ++m)
                for (const auto& c : theta.components)
                    direct += eta(m + 1) * 0.95 * c.weight() *
                              naive_pdf(z[m], obs.E * x + obs.G * c.mean, obs.R + obs.G * c.cov * obs.G.transpose()) / 0.025;
            EXPECT_NEAR(g.exist.log_eval(x), std::log(direct), 1e-9);
        }
    }
}

TEST(GammaMessage, UnitAndCertainDetection) {
    auto u = GammaMessage::unit();
    EXPECT_EQ(u.exist.log_constant, 0.0);
    EXPECT_EQ(u.exist.size(), 0u);
    EXPECT_EQ(u.eta0, 1.0);
    std::mt19937_64 rng(7);
    auto obs = random_obs(rng);
    Eigen::VectorXd eta(1);
    eta << 1.0;
    auto g = compute_gamma_msg(eta, random_gm(rng, 1, 1.0, Vector::Zero(4)), {}, obs, {1.0, 1.0, 1.0});
    EXPECT_EQ(g.exist.log_constant, kNegInf);
}

TEST(ExtractTheta, NoExclusionGivesNormalizedBelief) {
    std::mt19937_64 rng(8);
    GaussianMixture prior;
    prior.components.push_back(random_scaled_gaussian(rng, 2));
    prior.normalize();
    std::vector<LikelihoodMessage> msgs{random_message(rng, 2, 1, 2, false)};
    auto st = make_gibbs_state(prior, msgs);
    GibbsOptions o;
    o.weight_floor = 0.0;
    gibbs_run(st, o, rng);
    auto belief = gibbs_materialize(st, o);
    auto theta = extract_theta(st, 5, belief, o);
    belief.normalize();
    ASSERT_EQ(theta.size(), belief.size());
    EXPECT_NEAR(theta.total_weight(), 1.0, 1e-12);
    for (std::size_t i = 0; i < theta.size(); ++i) EXPECT_NEAR(theta.components[i].log_weight, belief.components[i].log_weight, 1e-12);
}

TEST(ExtractTheta, ExcludingSecondMatchesBruteForce) {
    std::mt19937_64 rng(9);
    GaussianMixture prior;
    prior.components.push_back(random_scaled_gaussian(rng, 2));
    prior.components.push_back(random_scaled_gaussian(rng, 2));
    prior.normalize();
    std::vector<LikelihoodMessage> msgs{random_message(rng, 1, 1, 2, false), random_message(rng, 1, 1, 2)};
    msgs[1].log_constant = msgs[1].terms[0].log_u - 2.0;
    auto st = make_gibbs_state(prior, msgs);
    GibbsOptions o;
    o.iterations = 50;
    o.weight_floor = 0.0;
    gibbs_run(st, o, rng);
    auto theta = extract_theta(st, 1, prior, o);
    std::vector<LikelihoodMessage> first{msgs[0]};
    GaussianMixture ref;
    for (auto& g : brute_force_label(prior, first, {1})) ref.components.push_back(g);
    ref.normalize();
    for (int k = 0; k < 30; ++k) {
        Eigen::VectorXd x = random_vec(rng, 2, 2.0);
        EXPECT_NEAR(theta.log_eval(x), ref.log_eval(x), 1e-9);
    }
    EXPECT_NEAR(theta.total_weight(), 1.0, 1e-12);
}
