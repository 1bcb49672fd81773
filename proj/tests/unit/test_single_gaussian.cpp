#include "oracles.hpp"

#include "scsmtt/single_gaussian.hpp"

#include <gtest/gtest.h>

using namespace scsmtt;
using namespace scsmtt::testing;

namespace {

ScaledGaussian gauss1(double lw, double m, double v) {
    ScaledGaussian g;
    g.log_weight = lw;
    g.mean = Vector::Constant(1, m);
    g.cov = Matrix::Constant(1, 1, v);
    return g;
}

LikelihoodComponent term1(double log_u, double e, double h, double c) {
    LikelihoodComponent t;
    t.log_u = log_u;
    t.e = Vector::Constant(1, e);
    t.H = Matrix::Constant(1, 1, h);
    t.C = Matrix::Constant(1, 1, c);
    return t;
}

/// Log of the S-th root of a scaled Gaussian, evaluated pointwise.
double log_root(const ScaledGaussian& g, double x, int s) {
    Eigen::VectorXd v(1);
    v << x;
    return naive_log_eval(g, v) / s;
}

double log_msg(const LikelihoodMessage& m, double x) {
    Vector v(1);
    v << x;
    return m.log_eval(v);
}

PtBelief single_alpha(const ScaledGaussian& g, double nonexist) {
    PtBelief a;
    a.exist_gm.components.push_back(g);
    a.nonexist_mass = nonexist;
    return a;
}

NetworkGraph path(std::size_t n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < static_cast<int>(n); ++i) e.emplace_back(i, i + 1);
    return NetworkGraph::from_edges(n, e);
}

} // namespace

TEST(LocalShard, UnitGammaIsRootOfPrior) {
    std::mt19937_64 rng(1);
    for (int s = 1; s <= 4; ++s) {
        auto a = random_scaled_gaussian(rng, 3);
        auto shard = local_shard(a, LikelihoodMessage::unit(), s);
        auto root = gaussian_fractional_power(a, s);
        EXPECT_NEAR(shard.c_hat, root.log_weight, 1e-12);
        EXPECT_LT((shard.m_hat - root.mean).norm(), 1e-12);
        EXPECT_LT((shard.P_hat - root.cov).norm(), 1e-12);
    }
}

TEST(LocalShard, SingleAgentMatchesDirectUpdate) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        auto a = random_scaled_gaussian(rng, 4);
        LikelihoodMessage g;
        g.log_constant = std::uniform_real_distribution<>(-3, 1)(rng);
        g.terms.push_back(random_likelihood(rng, 2, 4));
        auto shard = local_shard(a, g, 1);
        auto upd = kalman_product(a, {g.terms[0]}, 0.0);
        const double w0 = std::exp(a.log_weight + g.log_constant), w1 = std::exp(upd.log_weight);
        const double w = w0 + w1;
        const Eigen::VectorXd m = (w0 * Eigen::VectorXd(a.mean) + w1 * Eigen::VectorXd(upd.mean)) / w;
        const Eigen::VectorXd d0 = Eigen::VectorXd(a.mean) - m, d1 = Eigen::VectorXd(upd.mean) - m;
        const Eigen::MatrixXd p = (w0 * (Eigen::MatrixXd(a.cov) + d0 * d0.transpose()) +
                                   w1 * (Eigen::MatrixXd(upd.cov) + d1 * d1.transpose())) / w;
        EXPECT_NEAR(shard.c_hat, std::log(w), 1e-9 * std::max(1.0, std::abs(std::log(w))));
        EXPECT_LT((Eigen::VectorXd(shard.m_hat) - m).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, m.norm()));
        EXPECT_LT((Eigen::MatrixXd(shard.P_hat) - p).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, p.norm()));
    }
}

TEST(LocalShard, MomentsMatchQuadratureOfLocalProduct) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = gauss1(std::log(0.7), std::normal_distribution<>(0, 1)(rng), 2.0);
        LikelihoodMessage g;
        g.log_constant = -1.0;
        g.terms.push_back(term1(0.0, std::normal_distribution<>(0, 1)(rng), 1.0, 0.8));
        g.terms.push_back(term1(-0.5, std::normal_distribution<>(0, 1)(rng), 1.0, 1.3));
        const int s = 2;
        auto shard = local_shard(a, g, s);
        auto q = quadrature_log_fn([&](double x) { return log_root(a, x, s) + log_msg(g, x); }, -60, 60, 200000);
        EXPECT_NEAR(std::exp(shard.c_hat), q.mass, 1e-12 * std::max(1.0, q.mass));
        EXPECT_NEAR(shard.m_hat(0), q.mean, 1e-12 * std::max(1.0, std::abs(q.mean)) + 1e-12);
        EXPECT_NEAR(shard.P_hat(0, 0), q.var, 1e-11 * std::max(1.0, q.var));
    }
}

TEST(LocalShard, ProductOfShardsHasCentralizedMass) {
    std::mt19937_64 rng(4);
    const auto a = gauss1(std::log(0.6), 0.3, 3.0);
    LikelihoodMessage g1, g2;
    g1.terms.push_back(term1(0.2, 1.0, 1.0, 0.5));
    g2.terms.push_back(term1(-0.4, -0.5, 1.0, 0.9));
    const auto s1 = local_shard(a, g1, 2), s2 = local_shard(a, g2, 2);
    auto prod = quadrature_log_fn(
        [&](double x) {
            Eigen::VectorXd v(1);
            v << x;
            return naive_log_eval(s1.as_gaussian(), v) + naive_log_eval(s2.as_gaussian(), v);
        },
        -60, 60, 200000);
    auto central = quadrature_log_fn(
        [&](double x) {
            Eigen::VectorXd v(1);
            v << x;
            return naive_log_eval(a, v) + log_msg(g1, x) + log_msg(g2, x);
        },
        -60, 60, 200000);
    EXPECT_NEAR(prod.mass, central.mass, 1e-6 * central.mass);

    ConsensusNetwork net(path(2), 200);
    std::vector<ScaledBeliefShard> shards{s1, s2};
    std::vector<double> eta0{0.0, 0.0};
    auto fused = fuse_shards(shards, eta0, net);
    EXPECT_NEAR(fused[0].exist.weight(), central.mass, 1e-6 * central.mass);
    EXPECT_NEAR(fused[0].exist.mean(0), central.mean, 1e-6);
    EXPECT_NEAR(fused[0].exist.cov(0, 0), central.var, 1e-6);
}

TEST(LocalShard, ZeroWeightThrows) {
    LikelihoodMessage empty;
    EXPECT_THROW((void)local_shard(gauss1(0.0, 0.0, 1.0), empty, 2), NumericalError);
}

TEST(ShardInfo, RoundTripBothRules) {
    std::mt19937_64 rng(5);
    for (auto rule : {ShardScaleRule::exact, ShardScaleRule::product_of_scales}) {
        auto g = random_scaled_gaussian(rng, 4);
        auto back = from_info(to_info(g, rule), rule);
        EXPECT_NEAR(back.log_weight, g.log_weight, 1e-10);
        EXPECT_LT((back.mean - g.mean).norm(), 1e-10);
        EXPECT_LT((back.cov - g.cov).norm(), 1e-10);
    }
}

TEST(ShardInfo, ExactLogScaleEvaluatesDensity) {
    std::mt19937_64 rng(6);
    auto g = random_scaled_gaussian(rng, 3);
    auto si = to_info(g, ShardScaleRule::exact);
    for (int k = 0; k < 10; ++k) {
        Eigen::VectorXd x = random_vec(rng, 3);
        Vector xv = x;
        const double v = si.log_scale + xv.dot(si.info) - 0.5 * xv.dot(si.precision * xv);
        EXPECT_NEAR(v, naive_log_eval(g, x), 1e-10);
    }
}

TEST(FuseShards, IdenticalShardsUnderProductRule) {
    std::mt19937_64 rng(7);
    const Eigen::VectorXd m = random_vec(rng, 4);
    const Eigen::MatrixXd p = random_spd(rng, 4);
    const std::size_t n = 4;
    std::vector<ScaledBeliefShard> shards(n, ScaledBeliefShard{0.0, m, p});
    std::vector<double> eta0(n, 0.0);
    ConsensusNetwork net(path(n), 300);
    auto fused = fuse_shards(shards, eta0, net, ShardScaleRule::product_of_scales);
    EXPECT_NEAR(fused[0].exist.log_weight, 0.0, 1e-9);
    EXPECT_LT((Eigen::VectorXd(fused[0].exist.mean) - m).norm(), 1e-9);
    EXPECT_LT((Eigen::MatrixXd(fused[0].exist.cov) - p / static_cast<double>(n)).norm(), 1e-9);
}

TEST(FuseShards, ExactRuleMatchesPointwiseProductMass) {
    std::mt19937_64 rng(8);
    const std::size_t n = 3;
    std::vector<ScaledBeliefShard> shards;
    std::vector<ScaledGaussian> gs;
    for (std::size_t s = 0; s < n; ++s) {
        auto g = random_scaled_gaussian(rng, 2);
        gs.push_back(g);
        shards.push_back({g.log_weight, g.mean, g.cov});
    }
    std::vector<double> eta0(n, 0.0);
    ConsensusNetwork net(path(n), 400);
    auto fused = fuse_shards(shards, eta0, net);
    auto ref = gaussian_product_pair(gaussian_product_pair(gs[0], gs[1]), gs[2]);
    EXPECT_NEAR(fused[0].exist.log_weight, ref.log_weight, 1e-8);
    EXPECT_LT((fused[0].exist.mean - ref.mean).norm(), 1e-8);
    EXPECT_LT((fused[0].exist.cov - ref.cov).norm(), 1e-8);
}

TEST(FuseShards, SingleAgentIsIdentity) {
    std::mt19937_64 rng(9);
    auto g = random_scaled_gaussian(rng, 4);
    std::vector<ScaledBeliefShard> shards{{g.log_weight, g.mean, g.cov}};
    std::vector<double> eta0{std::log(0.3)};
    ConsensusNetwork net(NetworkGraph::from_edges(1, {}), 10);
    for (auto rule : {ShardScaleRule::exact, ShardScaleRule::product_of_scales}) {
        auto fused = fuse_shards(shards, eta0, net, rule);
        EXPECT_NEAR(fused[0].exist.log_weight, g.log_weight, 1e-10);
        EXPECT_LT((fused[0].exist.mean - g.mean).norm(), 1e-10);
        EXPECT_LT((fused[0].exist.cov - g.cov).norm(), 1e-10);
        EXPECT_NEAR(fused[0].log_b0, std::log(0.3), 1e-12);
    }
}

TEST(FuseShards, PermutationInvariantAndAgentsAgreeBitwise) {
    std::mt19937_64 rng(10);
    const std::size_t n = 4;
    std::vector<ScaledBeliefShard> shards;
    std::vector<double> eta0;
    for (std::size_t s = 0; s < n; ++s) {
        auto g = random_scaled_gaussian(rng, 4);
        shards.push_back({g.log_weight, g.mean, g.cov});
        eta0.push_back(std::log(0.1 + 0.2 * static_cast<double>(s)));
    }
    auto graph = NetworkGraph::from_edges(n, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    ConsensusNetwork net(graph, 300);
    auto fused = fuse_shards(shards, eta0, net);
    for (const auto& f : fused) {
        EXPECT_EQ(f.exist.log_weight, fused[0].exist.log_weight);
        EXPECT_EQ(f.exist.mean, fused[0].exist.mean);
        EXPECT_EQ(f.exist.cov, fused[0].exist.cov);
        EXPECT_EQ(f.log_b0, fused[0].log_b0);
    }
    std::vector<ScaledBeliefShard> perm{shards[2], shards[0], shards[3], shards[1]};
    std::vector<double> peta{eta0[2], eta0[0], eta0[3], eta0[1]};
    auto fp = fuse_shards(perm, peta, net);
    EXPECT_NEAR(fp[0].exist.log_weight, fused[0].exist.log_weight, 1e-9);
    EXPECT_LT((fp[0].exist.mean - fused[0].exist.mean).norm(), 1e-9);
    EXPECT_LT((fp[0].exist.cov - fused[0].exist.cov).norm(), 1e-9);
    EXPECT_NEAR(fp[0].log_b0, fused[0].log_b0, 1e-9);
}

TEST(FuseShards, CommunicationCount) {
    std::mt19937_64 rng(11);
    const std::size_t n = 5;
    std::vector<ScaledBeliefShard> shards;
    for (std::size_t s = 0; s < n; ++s) {
        auto g = random_scaled_gaussian(rng, 4);
        shards.push_back({g.log_weight, g.mean, g.cov});
    }
    std::vector<double> eta0(n, 0.0);
    ConsensusNetwork net(path(n), 50);
    (void)fuse_shards(shards, eta0, net);
    EXPECT_EQ(net.counters().belief_reals, (50u + 4u) * (16u + 4u + 2u));
    EXPECT_EQ(net.counters().auxiliary_reals, 0u);
}

TEST(SingleGaussianBelief, NormalizedJointly) {
    FusedShards f;
    f.exist = gauss1(std::log(2.0), 0.0, 1.0);
    f.log_b0 = std::log(0.5);
    auto b = single_gaussian_belief(f, 0.4);
    EXPECT_NEAR(b.existence(), 2.0 / 2.2, 1e-12);
    EXPECT_NEAR(b.nonexist_mass, 0.2 / 2.2, 1e-12);
}

TEST(ExtractDeltaSingle, EqualShardsCancel) {
    std::mt19937_64 rng(12);
    auto g = random_scaled_gaussian(rng, 4);
    ScaledBeliefShard sh{g.log_weight, g.mean, g.cov};
    std::vector<ScaledBeliefShard> shards{sh, sh};
    std::vector<double> eta0{0.0, 0.0};
    ConsensusNetwork net(path(2), 100);
    for (auto rule : {ShardScaleRule::exact, ShardScaleRule::product_of_scales}) {
        auto fused = fuse_shards(shards, eta0, net, rule);
        ShardInfo rest = fused[0].total;
        rest -= to_info(sh.as_gaussian(), rule);
        auto other = from_info(rest, rule);
        EXPECT_NEAR(other.log_weight, g.log_weight, 1e-8);
        EXPECT_LT((other.mean - g.mean).norm(), 1e-8);
        EXPECT_LT((other.cov - g.cov).norm(), 1e-8);
    }
}

TEST(ExtractDeltaSingle, MatchesBruteForceProductOnToy) {
    const auto a = gauss1(std::log(0.6), 0.3, 3.0);
    const PtBelief alpha = single_alpha(a, 0.4);
    LikelihoodMessage g1, g2;
    g1.log_constant = std::log(0.2);
    g1.terms.push_back(term1(0.2, 1.0, 1.0, 0.5));
    g2.log_constant = std::log(0.3);
    g2.terms.push_back(term1(-0.4, -0.5, 1.0, 0.9));
    const auto s1 = local_shard(a, g1, 2), s2 = local_shard(a, g2, 2);
    std::vector<ScaledBeliefShard> shards{s1, s2};
    std::vector<double> eta0{std::log(0.25), std::log(0.35)};
    ConsensusNetwork net(path(2), 200);
    auto fused = fuse_shards(shards, eta0, net);
    auto res = extract_delta_single(fused[0], s1, eta0[0], alpha, 2);
    ASSERT_FALSE(res.fallback);
    auto log_f = [&](double x) {
        Eigen::VectorXd v(1);
        v << x;
        return log_root(a, x, 2) + naive_log_eval(s2.as_gaussian(), v);
    };
    auto q = quadrature_log_fn(log_f, -60, 60, 200000);
    const double nonexist = 0.4 * 0.35;
    const double norm = q.mass + nonexist;
    EXPECT_NEAR(res.delta.nonexist_mass, nonexist / norm, 1e-9);
    for (double x : {-2.0, -0.5, 0.0, 0.7, 1.9}) {
        Vector v(1);
        v << x;
        EXPECT_NEAR(res.delta.exist_gm.log_eval(v), log_f(x) - std::log(norm), 1e-9);
    }
}

TEST(ExtractDeltaSingle, NonexistenceDividesOwnEta) {
    const auto a = gauss1(std::log(0.5), 0.0, 2.0);
    const PtBelief alpha = single_alpha(a, 0.5);
    const auto s1 = local_shard(a, LikelihoodMessage::unit(), 2);
    const auto s2 = local_shard(a, LikelihoodMessage::unit(), 2);
    std::vector<ScaledBeliefShard> shards{s1, s2};
    std::vector<double> eta0{std::log(0.5), 0.0};
    ConsensusNetwork net(path(2), 200);
    auto fused = fuse_shards(shards, eta0, net);
    auto b = single_gaussian_belief(fused[0], 0.5);
    auto d = extract_delta_single(fused[0], s1, eta0[0], alpha, 2);
    // b(x,0) = 0.5 * 0.5; delta(x,0) = b(x,0) / 0.5; existence part is the prior.
    EXPECT_NEAR(b.nonexist_mass, 0.25 / 0.75, 1e-9);
    EXPECT_NEAR(d.delta.nonexist_mass, 0.5, 1e-9);
}

TEST(ExtractDeltaSingle, IndefiniteDifferenceFallsBack) {
    const auto a = gauss1(0.0, 0.0, 1.0);
    const PtBelief alpha = single_alpha(a, 0.5);
    FusedShards f;
    f.exist = gauss1(0.0, 0.0, 1.0);
    f.total = to_info(f.exist, ShardScaleRule::exact);
    f.log_b0 = 0.0;
    ScaledBeliefShard own{0.0, Vector::Zero(1), Matrix::Constant(1, 1, 0.5)};
    auto res = extract_delta_single(f, own, 0.0, alpha, 2);
    EXPECT_TRUE(res.fallback);
    EXPECT_NEAR(res.delta.existence(), 1.0 / 1.5, 1e-12);
    EXPECT_NEAR(res.delta.exist_gm.components[0].cov(0, 0), 1.0, 1e-12);
}
