#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "json.hpp"
#include "mutadapt/errors.hpp"
#include "mutadapt/learning.hpp"
#include "mutadapt/sim.hpp"

using namespace mutadapt;
using namespace oracles;

namespace {

const std::vector<double> kGrid{0.0, 0.25, 0.5, 0.75, 1.0};

// Builds a trace by applying the scripted (robot, human) steps from the start state.
InteractionTrace scripted(const MomdpModel& m, const std::vector<std::pair<RobotAction, Mode>>& script) {
    InteractionTrace t;
    t.variant = m.variant();
    t.initial_state = m.initial_state();
    t.initial_belief = m.prior();
    auto x = t.initial_state;
    for (const auto& [a, h] : script) {
        TraceStep s;
        s.index = t.steps.size();
        s.before = x;
        s.robot_action = a;
        s.human_action = {h};
        s.after = world_transition(m, x, a, {h});
        x = s.after;
        t.steps.push_back(s);
    }
    return t;
}

std::vector<std::pair<RobotAction, Mode>> repeat(RobotAction a, Mode h, int n) {
    return std::vector<std::pair<RobotAction, Mode>>(n, {a, h});
}

}  // namespace

TEST(Learning, AdaptabilityExamples) {
    MomdpModel m(fixtures::plain(Variant::baseline));
    auto g1 = RobotAction::task(kGoal1);
    auto script = repeat(g1, kGoal2, 3);
    script.push_back({g1, kGoal1});
    EXPECT_DOUBLE_EQ(estimate_adaptability(scripted(m, script)), 0.25);
    EXPECT_DOUBLE_EQ(estimate_adaptability(scripted(m, {{g1, kGoal1}})), 1.0);
    EXPECT_DOUBLE_EQ(estimate_adaptability(scripted(m, repeat(g1, kGoal2, 6))), 0.0);
    EXPECT_THROW(estimate_adaptability(scripted(m, {})), NoEvidence);
}

TEST(Learning, ComplianceExamples) {
    MomdpModel m(fixtures::plain(Variant::compliance));
    auto cmd = RobotAction::command(kGoal1);
    auto t = RobotAction::task(kGoal1);
    EXPECT_DOUBLE_EQ(estimate_compliance(scripted(m, {{cmd, kGoal2}, {t, kGoal1}})), 1.0);
    EXPECT_NEAR(estimate_compliance(scripted(m, {{cmd, kGoal2}, {cmd, kGoal2}, {cmd, kGoal2}, {t, kGoal1}})),
                1.0 / 3, 1e-15);
    std::vector<std::pair<RobotAction, Mode>> ignore_all(4, {cmd, kGoal2});
    ignore_all.push_back({t, kGoal2});
    EXPECT_DOUBLE_EQ(estimate_compliance(scripted(m, ignore_all)), 0.0);
    EXPECT_EQ(count_compliance(scripted(m, ignore_all)).opportunities, 4u);
    EXPECT_THROW(estimate_compliance(scripted(m, {{t, kGoal2}})), NoEvidence);
}

TEST(Learning, CommandStepsAreNotAdaptabilityEvidence) {
    MomdpModel m(fixtures::plain(Variant::compliance));
    auto t = scripted(m, {{RobotAction::command(kGoal1), kGoal2}, {RobotAction::task(kGoal1), kGoal2}});
    // Only the first step (no pending command) counts.
    EXPECT_EQ(count_adaptability(t).opportunities, 1u);
}

TEST(Learning, ConveyingStepsAreSkipped) {
    MomdpModel m(fixtures::plain(Variant::state_conveying));
    auto t = scripted(m, {{RobotAction::task(kGoal1), kGoal2},
                          {RobotAction::conveying(), kGoal2},
                          {RobotAction::task(kGoal1), kGoal1}});
    EXPECT_EQ(count_adaptability(t).opportunities, 2u);
    auto after = count_adaptability(t, true);
    EXPECT_EQ(after.opportunities, 1u);
    EXPECT_EQ(after.switches, 1u);
}

TEST(Learning, AgreementStepsDoNotChangeEstimates) {
    MomdpModel m(fixtures::plain(Variant::compliance));
    auto cmd = RobotAction::command(kGoal1);
    auto g1 = RobotAction::task(kGoal1);
    auto t = scripted(m, {{g1, kGoal2}, {g1, kGoal2}, {cmd, kGoal2}, {g1, kGoal1}, {g1, kGoal1}});
    const double a = estimate_adaptability(t), c = estimate_compliance(t);
    auto padded = t;
    TraceStep agree;
    agree.before = fixtures::make_state(-10, kGoal1, kGoal1);
    agree.robot_action = g1;
    agree.human_action = {kGoal1};
    agree.after = world_transition(m, agree.before, g1, {kGoal1});
    for (std::size_t at : {std::size_t{0}, std::size_t{2}, std::size_t{4}, padded.steps.size()})
        padded.steps.insert(padded.steps.begin() + static_cast<long>(std::min(at, padded.steps.size())), agree);
    EXPECT_EQ(estimate_adaptability(padded), a);
    EXPECT_EQ(estimate_compliance(padded), c);
}

TEST(Learning, BuildPriorExamples) {
    const std::vector<double> est{1.0, 1.0, 0.5, 0.0};
    EXPECT_EQ(build_prior(est, kGrid), (std::vector<double>{0.25, 0, 0.25, 0, 0.5}));
    const std::vector<double> same{0.75, 0.75, 0.75};
    EXPECT_EQ(build_prior(same, kGrid), (std::vector<double>{0, 0, 0, 1, 0}));
    EXPECT_EQ(round_to_grid(0.30, kGrid), 1u);
    EXPECT_EQ(round_to_grid(0.375, kGrid), 2u);
    EXPECT_EQ(round_to_grid(0.125, kGrid), 1u);
    EXPECT_THROW(build_prior(std::vector<double>{}, kGrid), DomainError);
}

TEST(Learning, TransitionExamples) {
    const std::vector<std::pair<double, double>> pairs{{0.5, 1.0}, {0.75, 1.0}, {0.5, 1.0}};
    auto T = estimate_transition_alpha(pairs, kGrid);
    EXPECT_EQ(T.row(2), (std::vector<double>{0, 0, 0, 0, 1}));
    // No user within 0.25 of alpha = 0: identity row.
    EXPECT_EQ(T.row(0), (std::vector<double>{1, 0, 0, 0, 0}));
    const std::vector<std::pair<double, double>> single{{0.0, 0.0}};
    EXPECT_EQ(estimate_transition_alpha(single, kGrid).row(0), (std::vector<double>{1, 0, 0, 0, 0}));
    EXPECT_THROW(estimate_transition_alpha(std::vector<std::pair<double, double>>{}, kGrid), DomainError);
    const std::vector<std::pair<double, double>> off{{0.3, 1.0}};
    EXPECT_THROW(estimate_transition_alpha(off, kGrid), DomainError);
}

TEST(Learning, RandomCorporaMatchCountingOracles) {
    MomdpModel cm(fixtures::plain(Variant::compliance));
    MomdpModel sm(fixtures::plain(Variant::state_conveying));
    std::mt19937_64 rng(2024);
    for (int corpus = 0; corpus < 100; ++corpus) {
        std::vector<InteractionTrace> round1, paired;
        const int users = 3 + static_cast<int>(rng() % 20);
        for (int u = 0; u < users; ++u) {
            SimulatedHuman h{{kGrid[rng() % 5], kGrid[rng() % 5], (rng() % 2) ? kGoal2 : kGoal1}};
            EpisodeOptions eo;
            eo.seed = rng();
            eo.max_steps = 4 + rng() % 30;
            eo.user_id = "u" + std::to_string(u);
            auto t1 = run_episode(cm, fixtures::random_controller(cm, rng()), h, eo);
            round1.push_back(t1);
            eo.round = 1;
            auto r1 = run_episode(sm, fixtures::random_controller(sm, rng()), h, eo);
            eo.round = 2;
            auto r2 = run_episode(sm, fixtures::random_controller(sm, rng()), h, eo);
            paired.push_back(r1);
            paired.push_back(r2);
        }

        std::vector<double> a_est, c_est;
        for (const auto& t : round1) {
            const auto oa = oracle_alpha(t);
            const auto oc = oracle_c(t);
            const auto la = count_adaptability(t);
            const auto lc = count_compliance(t);
            ASSERT_EQ(la.opportunities, oa.n);
            ASSERT_EQ(la.switches, oa.k);
            ASSERT_EQ(lc.opportunities, oc.n);
            ASSERT_EQ(lc.switches, oc.k);
            if (oa.n) {
                a_est.push_back(static_cast<double>(oa.k) / oa.n);
                EXPECT_EQ(estimate_adaptability(t), a_est.back());
            }
            if (oc.n) {
                c_est.push_back(static_cast<double>(oc.k) / oc.n);
                EXPECT_EQ(estimate_compliance(t), c_est.back());
            }
        }
        if (a_est.empty() && c_est.empty()) continue;
        const auto learned = learn_priors(round1, kGrid, kGrid, false);
        for (auto [est, prior] : {std::pair{&a_est, &learned.alpha_prior}, std::pair{&c_est, &learned.compliance_prior}}) {
            if (est->empty()) continue;
            std::vector<double> hist(5, 0.0);
            for (double e : *est) hist[oracle_bin(e)] += 1;
            for (double& v : hist) v /= static_cast<double>(est->size());
            EXPECT_EQ(*prior, hist);
        }

        std::vector<std::pair<double, double>> pairs;
        for (std::size_t i = 0; i < paired.size(); i += 2) {
            const auto before = oracle_alpha(paired[i]);
            const auto after = oracle_alpha(paired[i + 1], true);
            if (!before.n || !after.n) continue;
            pairs.emplace_back(kGrid[oracle_bin(static_cast<double>(before.k) / before.n)],
                               kGrid[oracle_bin(static_cast<double>(after.k) / after.n)]);
        }
        if (pairs.empty()) {
            EXPECT_THROW(adaptability_pairs(paired, kGrid), NoEvidence);
            continue;
        }
        const auto lib_pairs = adaptability_pairs(paired, kGrid);
        ASSERT_EQ(lib_pairs.size(), pairs.size());
        // Users are keyed by id; compare as multisets.
        auto sorted = pairs, lib_sorted = lib_pairs;
        std::sort(sorted.begin(), sorted.end());
        std::sort(lib_sorted.begin(), lib_sorted.end());
        EXPECT_EQ(lib_sorted, sorted);
        for (double delta : {0.0, 0.25, 0.5}) {
            const auto T = estimate_transition_alpha(lib_pairs, kGrid, delta);
            EXPECT_EQ(T.rows(), oracle_transition(sorted, delta));
            for (const auto& row : T.rows()) {
                double s = 0;
                for (double v : row) s += v;
                EXPECT_NEAR(s, 1.0, 1e-12);
            }
        }
    }
}

TEST(Learning, PoolingMergesCountsPerUser) {
    MomdpModel m(fixtures::plain(Variant::baseline));
    auto g1 = RobotAction::task(kGoal1);
    auto a = scripted(m, {{g1, kGoal1}});
    auto b = scripted(m, repeat(g1, kGoal2, 3));
    a.user_id = b.user_id = "same";
    const std::vector<InteractionTrace> traces{a, b};
    EXPECT_EQ(learn_priors(traces, kGrid, kGrid, false).alpha_estimates, (std::vector<double>{1.0, 0.0}));
    EXPECT_EQ(learn_priors(traces, kGrid, kGrid, true).alpha_estimates, (std::vector<double>{0.25}));
    EXPECT_THROW(learn_priors({scripted(m, {})}, kGrid, kGrid, false), NoEvidence);
}

TEST(Learning, RoundTripRecoversAlpha) {
    MomdpModel m(fixtures::plain(Variant::baseline));
    for (double alpha : kGrid) {
        int hits = 0;
        for (std::uint64_t rep = 0; rep < 200; ++rep) {
            EpisodeOptions eo;
            eo.seed = 1000 * rep + static_cast<std::uint64_t>(alpha * 4);
            eo.max_steps = 1000;
            auto t = run_episode(m, opposing_controller(), SimulatedHuman{{alpha, 0.0, kGoal2}}, eo);
            const auto counts = count_adaptability(t);
            ASSERT_GE(counts.opportunities, 20u);
            hits += std::abs(estimate_adaptability(counts) - alpha) <= 0.05;
        }
        EXPECT_GE(hits, 190) << "alpha " << alpha;
    }
}

TEST(Learning, ShippedTablesComeFromTheCohort) {
    std::ifstream in(std::string(MUTADAPT_TEST_DATA_DIR) + "/cohort.json");
    const auto j = nlohmann::json::parse(in);
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> round1;
    for (const auto& p : j.at("alpha_pairs")) {
        pairs.emplace_back(p[0].get<double>(), p[1].get<double>());
        round1.push_back(p[0].get<double>());
    }
    const auto c_est = j.at("compliance_estimates").get<std::vector<double>>();
    const auto cfg = fixtures::table_carry(Variant::state_conveying);
    const auto T = estimate_transition_alpha(pairs, kGrid, j.at("delta").get<double>());
    ASSERT_TRUE(cfg.t_alpha.has_value());
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR((*cfg.t_alpha)(i, k), T(i, k), 1e-15);
    const auto ap = build_prior(round1, kGrid);
    const auto cp = build_prior(c_est, kGrid);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_NEAR(cfg.alpha_prior[i], ap[i], 1e-15);
        EXPECT_NEAR(cfg.compliance_prior[i], cp[i], 1e-15);
    }
    // Adaptable users become very adaptable; compliance mass sits at 1.0.
    for (std::size_t i = 2; i < 5; ++i) EXPECT_GE(T(i, 4), 0.7);
    EXPECT_GE(cp[4], 0.8);
}
