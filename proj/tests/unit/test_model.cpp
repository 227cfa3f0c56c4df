#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "mutadapt/errors.hpp"

using namespace mutadapt;
using fixtures::make_state;

TEST(Model, EnumerationCounts) {
    EXPECT_EQ(MomdpModel(fixtures::plain(Variant::baseline)).states().size(), 40u);
    EXPECT_EQ(MomdpModel(fixtures::plain(Variant::compliance)).states().size(), 80u);
    EXPECT_EQ(MomdpModel(fixtures::plain(Variant::state_conveying)).states().size(), 40u);
    auto c = fixtures::plain(Variant::baseline);
    c.history_length = 2;
    EXPECT_EQ(MomdpModel(c).states().size(), 160u);
}

TEST(Model, EnumerationIsDuplicateFreeAndIndexed) {
    for (auto v : {Variant::baseline, Variant::compliance}) {
        MomdpModel m(fixtures::plain(v));
        std::set<ObservableState> seen(m.states().begin(), m.states().end());
        EXPECT_EQ(seen.size(), m.states().size());
        for (std::size_t i = 0; i < m.states().size(); ++i) EXPECT_EQ(m.state_index(m.states()[i]), i);
    }
}

TEST(Model, ActionSets) {
    EXPECT_EQ(MomdpModel(fixtures::plain(Variant::baseline)).actions().size(), 2u);
    MomdpModel c(fixtures::plain(Variant::compliance));
    ASSERT_EQ(c.actions().size(), 4u);
    EXPECT_TRUE(c.allows(RobotAction::command(kGoal1)));
    EXPECT_FALSE(c.allows(RobotAction::conveying()));
    MomdpModel s(fixtures::plain(Variant::state_conveying));
    ASSERT_EQ(s.actions().size(), 3u);
    EXPECT_EQ(s.actions().back(), RobotAction::conveying());
    EXPECT_FALSE(s.allows(RobotAction::command(kGoal2)));
}

TEST(Model, AgreementRotatesDisagreementFreezes) {
    MomdpModel m(fixtures::plain(Variant::baseline));
    auto x = make_state(10, kGoal2, kGoal1);
    EXPECT_EQ(world_transition(m, x, RobotAction::task(kGoal1), {kGoal1}).world.orientation, -10);
    EXPECT_EQ(world_transition(m, x, RobotAction::task(kGoal2), {kGoal2}).world.orientation, 30);
    auto frozen = world_transition(m, x, RobotAction::task(kGoal1), {kGoal2});
    EXPECT_EQ(frozen.world.orientation, 10);
    EXPECT_EQ(frozen.last_human_mode(), kGoal2);
    EXPECT_EQ(frozen.last_robot_mode(), kGoal1);
}

TEST(Model, VerbalActionsFreezeTheTable) {
    MomdpModel c(fixtures::plain(Variant::compliance));
    auto x = make_state(10, kGoal2, kGoal1);
    for (Mode h : {kGoal1, kGoal2}) {
        auto n = world_transition(c, x, RobotAction::command(kGoal1), {h});
        EXPECT_EQ(n.world.orientation, 10);
        EXPECT_TRUE(n.verbal_flag);
        EXPECT_EQ(n.last_robot_mode(), kGoal1);
    }
    MomdpModel s(fixtures::plain(Variant::state_conveying));
    auto n = world_transition(s, make_state(30, kGoal2, kGoal2), RobotAction::conveying(), {kGoal2});
    EXPECT_EQ(n.world.orientation, 30);
    EXPECT_FALSE(n.verbal_flag);
    EXPECT_EQ(n.last_robot_mode(), kGoal2);  // previous robot mode carried over
}

TEST(Model, OrientationStaysOnGridAndMovesByStep) {
    for (auto v : {Variant::baseline, Variant::compliance, Variant::state_conveying}) {
        MomdpModel m(fixtures::plain(v));
        for (const auto& x : m.states()) {
            if (x.terminal()) continue;
            for (const auto& a : m.actions())
                for (Mode h : {kGoal1, kGoal2}) {
                    auto n = world_transition(m, x, a, {h});
                    EXPECT_TRUE(is_valid_orientation(n.world.orientation));
                    const int d = std::abs(n.world.orientation - x.world.orientation);
                    EXPECT_TRUE(d == 0 || d == kOrientationStep);
                    EXPECT_TRUE(m.is_valid_state(n));
                }
        }
    }
}

TEST(Model, StepsToEachGoalFromStart) {
    MomdpModel m(fixtures::plain(Variant::baseline));
    for (auto [mode, expected] : {std::pair{kGoal1, 5}, std::pair{kGoal2, 4}}) {
        auto x = m.initial_state();
        int steps = 0;
        while (!x.terminal()) {
            x = world_transition(m, x, RobotAction::task(mode), {mode});
            ++steps;
        }
        EXPECT_EQ(steps, expected);
    }
}

TEST(Model, RewardsPaidOnArrival) {
    MomdpModel m(fixtures::plain(Variant::compliance));
    auto pre1 = make_state(-70, kGoal1, kGoal1);
    auto a = RobotAction::task(kGoal1);
    EXPECT_DOUBLE_EQ(reward(m, pre1, a, {kGoal1}, world_transition(m, pre1, a, {kGoal1})), 20.0);
    auto pre2 = make_state(70, kGoal2, kGoal2);
    auto b = RobotAction::task(kGoal2);
    EXPECT_DOUBLE_EQ(reward(m, pre2, b, {kGoal2}, world_transition(m, pre2, b, {kGoal2})), 15.0);
    EXPECT_DOUBLE_EQ(reward(m, pre1, a, {kGoal2}, world_transition(m, pre1, a, {kGoal2})), 0.0);
    EXPECT_GT(20 * std::pow(0.9, 5), 15 * std::pow(0.9, 4));
}

TEST(Model, VerbalCostIsCharged) {
    auto c = fixtures::plain(Variant::compliance);
    c.rewards.verbal_cost = 0.05;
    MomdpModel m(c);
    auto x = make_state(10, kGoal2, kGoal1);
    auto a = RobotAction::command(kGoal1);
    EXPECT_DOUBLE_EQ(reward(m, x, a, {kGoal2}, world_transition(m, x, a, {kGoal2})), -0.05);
}

TEST(Model, TerminalAndForeignActionsAreRejected) {
    MomdpModel m(fixtures::plain(Variant::baseline));
    EXPECT_THROW(world_transition(m, make_state(-90, kGoal1, kGoal1), RobotAction::task(kGoal1), {kGoal1}),
                 DomainError);
    EXPECT_THROW(world_transition(m, make_state(10, kGoal1, kGoal1), RobotAction::command(kGoal1), {kGoal1}),
                 DomainError);
}

TEST(Model, InitialState) {
    MomdpModel m(fixtures::table_carry(Variant::baseline));
    auto x = m.initial_state();
    EXPECT_EQ(x.world.orientation, 10);
    EXPECT_EQ(x.last_human_mode(), kGoal2);
    EXPECT_EQ(x.last_robot_mode(), kGoal1);
    EXPECT_EQ(m.initial_state(kGoal1).last_human_mode(), kGoal1);
}

TEST(Model, PriorIsProductOfMarginals) {
    MomdpModel m(fixtures::table_carry(Variant::compliance));
    const auto& c = m.config();
    auto p = m.prior();
    for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t k = 0; k < 5; ++k)
            EXPECT_NEAR(p.at(a, k), c.alpha_prior[a] * c.compliance_prior[k], 1e-15);
}

TEST(Model, RejectsNonStochasticTransition) {
    auto c = fixtures::plain(Variant::state_conveying);
    std::vector<std::vector<double>> rows(5, std::vector<double>(5, 0.0));
    for (auto& r : rows) r[0] = 0.9;
    c.t_alpha = LatentTransition(rows);
    EXPECT_THROW(MomdpModel{c}, ValidationError);
}

TEST(Model, RejectsBadFields) {
    auto c = fixtures::plain(Variant::baseline);
    c.gamma = 1.5;
    EXPECT_THROW(MomdpModel{c}, ValidationError);
    c = fixtures::plain(Variant::baseline);
    c.initial_orientation = -90;
    EXPECT_THROW(MomdpModel{c}, ValidationError);
    c = fixtures::plain(Variant::baseline);
    c.alpha_prior = {0.5, 0.5};
    EXPECT_THROW(MomdpModel{c}, ValidationError);
}

TEST(Model, LatentTransitionRowsOfShippedConfig) {
    MomdpModel m(fixtures::table_carry(Variant::state_conveying));
    for (const auto& row : m.t_alpha().rows()) {
        double s = 0;
        for (double v : row) s += v;
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Model, HashTracksConfig) {
    auto a = fixtures::plain(Variant::baseline);
    auto b = a;
    EXPECT_EQ(MomdpModel(a).hash(), MomdpModel(b).hash());
    b.gamma = 0.95;
    EXPECT_NE(MomdpModel(a).hash(), MomdpModel(b).hash());
}
