#include <benchmark/benchmark.h>

#include "mutadapt/belief.hpp"
#include "mutadapt/config.hpp"
#include "mutadapt/sim.hpp"
#include "mutadapt/solver.hpp"

using namespace mutadapt;

namespace {

MomdpModel model_for(Variant v) {
    auto cfg = load_model_config(MUTADAPT_CONFIG_DIR "/table_carry.json");
    cfg.variant = v;
    return MomdpModel(std::move(cfg));
}

// Start state with the robot's task action and an insisting human.
void BM_BeliefUpdate(benchmark::State& state) {
    const auto m = model_for(static_cast<Variant>(state.range(0)));
    const auto x = m.initial_state();
    const auto a = RobotAction::task(kGoal1);
    const auto xn = world_transition(m, x, a, {kGoal2});
    for (auto _ : state) benchmark::DoNotOptimize(update_belief(m, m.prior(), x, a, xn));
}
BENCHMARK(BM_BeliefUpdate)->DenseRange(0, 2);

void BM_Backup(benchmark::State& state) {
    const auto m = model_for(static_cast<Variant>(state.range(0)));
    const auto policy = solve(m, m.prior()).policy;
    for (auto _ : state)
        benchmark::DoNotOptimize(backup(m, m.initial_state(), m.prior(), policy.vectors()));
}
BENCHMARK(BM_Backup)->DenseRange(0, 2);

void BM_Solve(benchmark::State& state) {
    const auto m = model_for(static_cast<Variant>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve(m, m.prior()));
}
BENCHMARK(BM_Solve)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_Expectimax(benchmark::State& state) {
    const auto m = model_for(static_cast<Variant>(state.range(0)));
    const int h = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(expectimax(m, m.initial_state(), m.prior(), h));
}
BENCHMARK(BM_Expectimax)->ArgsProduct({{0, 1, 2}, {20, 79}})->Unit(benchmark::kMillisecond);

void BM_Population(benchmark::State& state) {
    const auto m = model_for(Variant::compliance);
    const auto policy = solve(m, m.prior()).policy;
    PopulationOptions o;
    o.users = static_cast<std::size_t>(state.range(0));
    o.seed = 7;
    for (auto _ : state) benchmark::DoNotOptimize(run_population(policy, m, m.prior(), o));
}
BENCHMARK(BM_Population)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
