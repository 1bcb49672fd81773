#include "scsmtt/config.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace scsmtt;

namespace {

ExperimentSpec parse(const std::string& text) {
    std::istringstream in(text);
    return parse_spec(in);
}

std::string dump(const ExperimentSpec& spec) {
    std::ostringstream out;
    write_spec(out, spec);
    return out.str();
}

std::string error_key(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

} // namespace

TEST(Config, EmptyFileIsBuiltin) { EXPECT_EQ(dump(parse("")), dump(builtin_spec("paper-vi"))); }

TEST(Config, WrittenSpecParsesBackExactly) {
    ExperimentSpec spec = parse("steps = 12\nR = 9 0.5 0.5 2e-4\nvariant = DG\nconsensus_iters = 15\n"
                                "shard_scale = product\nagent = X true 900 800 10 20 0 0\n"
                                "agent = Y false 900 800 400 20 1.25 -0.5\ntarget = 2 9 100 200 1 1\n");
    const std::string text = dump(spec);
    EXPECT_EQ(dump(parse(text)), text);
    EXPECT_EQ(spec.filter.variant, Variant::dg);
    EXPECT_EQ(spec.filter.shard_scale, ShardScaleRule::product_of_scales);
    EXPECT_EQ(spec.filter.consensus_iters, 15);
    EXPECT_EQ(spec.scenario.sensor.R(0, 1), 0.5);
    ASSERT_EQ(spec.agents.size(), 2u);
    EXPECT_TRUE(spec.agents[0].spec.anchor);
    EXPECT_EQ(spec.agents[1].initial_state(2), 1.25);
    ASSERT_EQ(spec.targets.size(), 1u);
    EXPECT_EQ(spec.targets[0].death, 9);
}

TEST(Config, DiagonalShorthand) {
    const auto spec = parse("agent_init_cov = 1 2 3 4\n");
    EXPECT_EQ(spec.scenario.agent_init_cov(2, 2), 3.0);
    EXPECT_EQ(spec.scenario.agent_init_cov(0, 1), 0.0);
}

TEST(Config, ExistenceThresholdReachesFilter) {
    const auto spec = parse("existence_threshold = 0.7\n");
    EXPECT_EQ(spec.filter.existence_threshold, 0.7);
}

TEST(Config, CommentsAndBlankLinesIgnored) {
    const auto spec = parse("# header\n\n  gibbs_iters = 7   # trailing\n");
    EXPECT_EQ(spec.filter.gibbs_iters, 7);
}

TEST(Config, ErrorsNameTheOffendingKey) {
    EXPECT_EQ(error_key("bogus = 1\n"), "bogus");
    EXPECT_EQ(error_key("steps = ten\n"), "steps");
    EXPECT_EQ(error_key("roi = 1 2 3\n"), "roi");
    EXPECT_EQ(error_key("variant = XYZ\n"), "variant");
    EXPECT_EQ(error_key("agent = A true 1 2\n"), "agent");
    EXPECT_EQ(error_key("R = 1 2 3\n"), "R");
    EXPECT_EQ(error_key("distinct_weight_mode = maybe\n"), "distinct_weight_mode");
    EXPECT_EQ(error_key("no equals sign\n"), "");
}

TEST(Config, UnknownBuiltinAndMissingFile) {
    EXPECT_THROW((void)builtin_spec("other"), ConfigError);
    EXPECT_THROW((void)load_spec("/nonexistent/path.cfg"), ConfigError);
}

TEST(Config, ShortScenarioDropsLateTargets) {
    const auto spec = parse("steps = 8\n");
    const Scenario sc = build_scenario(spec);
    EXPECT_EQ(sc.truth.steps, 8);
    for (const auto& k : sc.truth.targets) {
        EXPECT_LT(k.birth, 8);
        EXPECT_FALSE(k.states.empty());
    }
    EXPECT_EQ(sc.pt_count(), sc.truth.targets.size());
}

TEST(Config, TruthCsvListsLivingTargets) {
    const Scenario sc = build_scenario(parse("steps = 6\n"));
    std::ostringstream out;
    write_truth_csv(out, sc.truth);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,id,px,py,vx,vy");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    int expected = 0;
    for (int t = 0; t < 6; ++t) expected += sc.truth.cardinality(t);
    EXPECT_EQ(rows, expected);
}
