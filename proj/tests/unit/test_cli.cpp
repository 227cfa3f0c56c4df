#include <gtest/gtest.h>

#include <regex>
#include <thread>

#include "fixtures.hpp"
#include "httplib.h"
#include "json.hpp"
#include "mutadapt/config.hpp"
#include "mutadapt/learning.hpp"
#include "mutadapt/trace.hpp"
#include "process.hpp"

using namespace mutadapt;
using proc::run;
using proc::slurp;

namespace {

class CliTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir = fixtures::temp_dir("cli").string();
        for (const char* v : {"baseline", "compliance", "state_conveying"}) {
            auto r = run({"solve", "--config", fixtures::config_path().string(), "--variant", v, "--out",
                          dir + "/pol/" + v + ".json"});
            ASSERT_EQ(r.code, 0) << v;
        }
    }
    static void TearDownTestSuite() { std::filesystem::remove_all(dir); }
    static std::string pol(const std::string& v) { return dir + "/pol/" + v + ".json"; }

    static inline std::string dir;
};

std::string field(const std::string& out, const std::string& key) {
    std::smatch m;
    if (std::regex_search(out, m, std::regex("(^|\n)" + key + " +([^\n]*)"))) return m[2];
    return {};
}

}  // namespace

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"solve", "--config", fixtures::config_path().string()}).code, 1);
    EXPECT_EQ(run({"solve", "--config", fixtures::config_path().string(), "--out", dir + "/x.json", "--epsilon", "0"})
                  .code,
              1);
    EXPECT_EQ(run({"experiment", "--policy", pol("baseline"), "--n", "0"}).code, 1);
    EXPECT_EQ(run({"serve", "--policies", dir + "/pol", "--port", "70000"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, ValidationErrors) {
    EXPECT_EQ(run({"solve", "--config", dir + "/missing.json", "--out", dir + "/x.json"}).code, 2);
    {
        std::ofstream(dir + "/bad.json") << "{\"schema\":\"mutadapt.model/1\",\"gamma\":3}";
    }
    EXPECT_EQ(run({"solve", "--config", dir + "/bad.json", "--out", dir + "/x.json"}).code, 2);
    EXPECT_EQ(run({"simulate", "--policy", dir + "/missing.json"}).code, 2);
    std::filesystem::create_directories(dir + "/empty");
    EXPECT_EQ(run({"learn", "--traces", dir + "/empty", "--out", dir + "/l.json"}).code, 2);
    EXPECT_EQ(run({"learn", "--traces", dir + "/nowhere", "--out", dir + "/l.json"}).code, 2);
}

TEST_F(CliTest, SolveReportsCoverageAndIsDeterministic) {
    const auto cfg = fixtures::config_path().string();
    auto a = run({"solve", "--config", cfg, "--out", dir + "/s1.json", "--seed", "4"});
    auto b = run({"solve", "--config", cfg, "--out", dir + "/s1.json", "--seed", "4"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(field(a.out, "states"), "40 (40 covered)");
    EXPECT_EQ(field(a.out, "seed"), "4");
    EXPECT_EQ(field(a.out, "converged"), "yes");
    const auto first = slurp(dir + "/s1.json");
    auto c = run({"solve", "--config", cfg, "--out", dir + "/s2.json", "--seed", "4"});
    EXPECT_EQ(slurp(dir + "/s2.json"), first);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(field(run({"solve", "--config", cfg, "--variant", "compliance", "--out", dir + "/s3.json"}).out, "states"),
              "80 (80 covered)");
}

TEST_F(CliTest, SimulateGoldenOutcomes) {
    struct Case {
        std::string variant, alpha, c, goal;
        bool conveyed;
    };
    for (const auto& k : {Case{"compliance", "1", "1", "goal1", false}, Case{"compliance", "0", "0", "goal2", false},
                          Case{"compliance", "0", "1", "goal1", false}, Case{"state_conveying", "0", "1", "goal1", true},
                          Case{"baseline", "0", "0", "goal2", false}}) {
        std::vector<std::string> args{"simulate", "--policy", pol(k.variant), "--alpha", k.alpha, "--c", k.c, "--seed", "1"};
        if (k.conveyed) args.insert(args.end(), {"--conveyed-alpha", "1"});
        auto r = run(args);
        ASSERT_EQ(r.code, 0);
        EXPECT_EQ(field(r.out, "goal"), k.goal) << k.variant << " " << k.alpha << " " << k.c;
    }
}

TEST_F(CliTest, SimulateTraceAndStepsTable) {
    const auto t1 = dir + "/sim/a.ndjson", t2 = dir + "/sim/b.ndjson";
    auto a = run({"simulate", "--policy", pol("compliance"), "--alpha", "1", "--c", "1", "--seed", "3", "--trace-out", t1,
                  "--steps-table"});
    auto b = run({"simulate", "--policy", pol("compliance"), "--alpha", "1", "--c", "1", "--seed", "3", "--trace-out", t2,
                  "--steps-table"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(slurp(t1), slurp(t2));
    EXPECT_EQ(field(a.out, "orientations"), "10 -10 -30 -50 -70 -90");
    EXPECT_NE(a.out.find("step  theta"), std::string::npos);
    EXPECT_EQ(load_trace(t1).steps.size(), 5u);
    EXPECT_EQ(run({"replay", "--trace", t1, "--policy", pol("compliance")}).code, 0);
    EXPECT_EQ(run({"replay", "--trace", t1, "--config", fixtures::config_path().string()}).code, 0);
    auto tampered = load_trace(t1);
    tampered.steps[1].reward = 3;
    save_trace(dir + "/sim/bad.ndjson", tampered);
    auto bad = run({"replay", "--trace", dir + "/sim/bad.ndjson", "--policy", pol("compliance")});
    EXPECT_EQ(bad.code, 2);
    EXPECT_EQ(field(bad.out, "consistent"), "no");
}

TEST_F(CliTest, ExperimentCsv) {
    auto r = run({"experiment", "--policy", pol("baseline"), "--policy", pol("compliance"), "--policy",
                  pol("state_conveying"), "--n", "200", "--seed", "5", "--csv", dir + "/exp.csv"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(slurp(dir + "/exp.csv"), r.out);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
    EXPECT_NE(r.out.find("\nbaseline,baseline,200,"), std::string::npos);
    auto coop = run({"experiment", "--policy", pol("baseline"), "--policy", pol("compliance"), "--prior", "point:1,1",
                     "--n", "50"});
    ASSERT_EQ(coop.code, 0);
    std::istringstream in(coop.out);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) EXPECT_NE(line.find(",50,50,1.000000,"), std::string::npos) << line;
    EXPECT_EQ(run({"experiment", "--policy", pol("baseline"), "--n", "200", "--seed", "5", "--threads", "3"}).out,
              run({"experiment", "--policy", pol("baseline"), "--n", "200", "--seed", "5"}).out);
}

TEST_F(CliTest, LearnPriorsMatchesLibrary) {
    const auto tdir = dir + "/learn";
    const char* users[][3] = {{"0", "1", "u1"}, {"0.5", "0", "u2"}, {"1", "0.5", "u3"}, {"0.25", "1", "u4"}};
    for (auto& u : users)
        ASSERT_EQ(run({"simulate", "--policy", pol("compliance"), "--alpha", u[0], "--c", u[1], "--user", u[2], "--seed",
                       "2", "--trace-out", tdir + "/" + u[2] + ".ndjson"})
                      .code,
                  0);
    ASSERT_EQ(run({"learn", "--traces", tdir, "--mode", "priors", "--config", fixtures::config_path().string(), "--out",
                   dir + "/learned.json"})
                  .code,
              0);
    const auto learned = load_model_config(dir + "/learned.json");
    const auto direct = learn_priors(load_trace_directory(tdir), learned.alpha_grid, learned.compliance_grid, false);
    if (!direct.alpha_estimates.empty()) EXPECT_EQ(learned.alpha_prior, direct.alpha_prior);
    if (!direct.compliance_estimates.empty()) EXPECT_EQ(learned.compliance_prior, direct.compliance_prior);
}

TEST_F(CliTest, LearnTransitionFromPairedRounds) {
    const auto tdir = dir + "/paired";
    // Both rounds are played against the state-conveying policy.
    for (int u = 0; u < 6; ++u)
        for (int round : {1, 2}) {
            const std::string id = "p" + std::to_string(u);
            ASSERT_EQ(run({"simulate", "--policy", pol("state_conveying"), "--alpha", u % 2 ? "0.5" : "0", "--c", "1",
                           "--user", id, "--round", std::to_string(round), "--seed", std::to_string(10 * u + round),
                           "--trace-out", tdir + "/" + id + "-" + std::to_string(round) + ".ndjson"})
                          .code,
                      0);
        }
    auto r = run({"learn", "--traces", tdir, "--mode", "talpha", "--out", dir + "/ta.json"});
    ASSERT_EQ(r.code, 0);
    const auto cfg = load_model_config(dir + "/ta.json");
    ASSERT_TRUE(cfg.t_alpha.has_value());
    EXPECT_NO_THROW(cfg.t_alpha->validate(5, 1e-12));
}

TEST_F(CliTest, ServeAnswersAndFlushesOnSigterm) {
    const auto data = dir + "/served";
    proc::Child child({"serve", "--policies", dir + "/pol", "--port", "0", "--data", data});
    const auto line = child.read_line();
    std::smatch m;
    ASSERT_TRUE(std::regex_search(line, m, std::regex(":(\\d+) ")));
    const int port = std::stoi(m[1]);
    httplib::Client cli("127.0.0.1", port);
    auto pols = cli.Get("/policies");
    ASSERT_TRUE(pols);
    EXPECT_EQ(pols->status, 200);
    EXPECT_EQ(nlohmann::json::parse(pols->body)["policies"].size(), 3u);
    auto s = cli.Post("/sessions", R"({"policy":"compliance"})", "application/json");
    ASSERT_TRUE(s);
    const std::string id = nlohmann::json::parse(s->body)["id"];
    auto step = cli.Post("/sessions/" + id + "/action", R"({"direction":"goal2"})", "application/json");
    ASSERT_TRUE(step);
    EXPECT_EQ(child.terminate(SIGTERM), 0);
    const auto trace = load_trace(data + "/sessions/" + id + ".ndjson");
    EXPECT_EQ(trace.steps.size(), 1u);
}
