#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mutadapt/config.hpp"
#include "mutadapt/errors.hpp"

using namespace mutadapt;

TEST(Config, ShippedConfigLoads) {
    const auto c = load_model_config(fixtures::config_path());
    EXPECT_EQ(c.history_length, 1u);
    EXPECT_DOUBLE_EQ(c.gamma, 0.9);
    EXPECT_DOUBLE_EQ(c.rewards.optimal, 20);
    EXPECT_DOUBLE_EQ(c.rewards.suboptimal, 15);
    EXPECT_EQ(c.initial_orientation, 10);
    EXPECT_NO_THROW(MomdpModel{c});
}

TEST(Config, DefaultsFillMissingFields) {
    const auto c = parse_model_config(R"({"schema":"mutadapt.model/1"})");
    EXPECT_EQ(c.variant, Variant::baseline);
    EXPECT_EQ(c.alpha_grid.size(), 5u);
    EXPECT_FALSE(c.t_alpha.has_value());
    MomdpModel m(c);
    EXPECT_TRUE(m.t_alpha().is_identity());
    EXPECT_TRUE(m.t_compliance().is_identity());
}

TEST(Config, CanonicalDumpRoundTrips) {
    const auto c = load_model_config(fixtures::config_path());
    const auto text = dump_model_config(c);
    const auto back = parse_model_config(text);
    EXPECT_EQ(dump_model_config(back), text);
    EXPECT_EQ(model_config_hash(back), model_config_hash(c));
    EXPECT_EQ(model_config_hash(c).size(), 16u);
}

TEST(Config, Rejections) {
    EXPECT_THROW(parse_model_config("[1,2"), ValidationError);
    EXPECT_THROW(parse_model_config(R"({"schema":"mutadapt.model/2"})"), ValidationError);
    EXPECT_THROW(parse_model_config(R"({"schema":"mutadapt.model/1","variant":"telepathy"})"), ValidationError);
    EXPECT_THROW(parse_model_config(R"({"schema":"mutadapt.model/1","gamma":"high"})"), ValidationError);
    EXPECT_THROW(load_model_config("/nonexistent/config.json"), ValidationError);
}

TEST(Config, NamesRoundTrip) {
    for (auto v : {Variant::baseline, Variant::compliance, Variant::state_conveying})
        EXPECT_EQ(parse_variant(to_string(v)), v);
    EXPECT_EQ(parse_mode("goal1"), kGoal1);
    EXPECT_EQ(parse_mode("goal2"), kGoal2);
    EXPECT_THROW(parse_mode("goal3"), ValidationError);
}
