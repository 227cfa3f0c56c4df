#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>

#include "mutadapt/config.hpp"
#include "mutadapt/model.hpp"
#include "mutadapt/sim.hpp"
#include "mutadapt/solver.hpp"

namespace fixtures {

using namespace mutadapt;

inline std::filesystem::path config_path() { return std::filesystem::path(MUTADAPT_CONFIG_DIR) / "table_carry.json"; }

inline ModelConfig table_carry(Variant v) {
    ModelConfig c = load_model_config(config_path());
    c.variant = v;
    return c;
}

// Uniform priors and identity latent transitions.
inline ModelConfig plain(Variant v) {
    ModelConfig c;
    c.variant = v;
    return c;
}

struct Solved {
    MomdpModel model;
    Policy policy;
    SolveStats stats;
};

/// Learned-config policies, solved once per process.
inline const Solved& solved(Variant v) {
    static std::map<Variant, Solved> cache;
    auto it = cache.find(v);
    if (it == cache.end()) {
        MomdpModel m(table_carry(v));
        auto r = solve(m, m.prior(), SolveOptions{});
        it = cache.emplace(v, Solved{m, r.policy, r.stats}).first;
    }
    return it->second;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
    std::random_device rd;
    auto p = std::filesystem::temp_directory_path() / ("mutadapt-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(p);
    return p;
}

inline ObservableState make_state(int orientation, Mode human, Mode robot, bool flag = false) {
    ObservableState x;
    x.world.orientation = orientation;
    x.human_modes = {human};
    x.robot_modes = {robot};
    x.verbal_flag = flag;
    return x;
}

/// Picks uniformly among the model's actions, independent of the state.
inline RobotController random_controller(const MomdpModel& m, std::uint64_t seed) {
    auto rng = std::make_shared<Rng>(seed);
    auto actions = m.actions();
    return [rng, actions](const ObservableState&, const Belief&, std::size_t) {
        return actions[rng->next() % actions.size()];
    };
}

inline Mode other(Mode m) { return m == kGoal1 ? kGoal2 : kGoal1; }

}  // namespace fixtures
