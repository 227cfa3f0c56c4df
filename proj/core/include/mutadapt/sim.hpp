#pragma once

// Closed-loop episodes between a robot controller and a simulated BAM human,
// and population experiments over humans drawn from a prior.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mutadapt/belief.hpp"
#include "mutadapt/human.hpp"
#include "mutadapt/model.hpp"
#include "mutadapt/solver.hpp"
#include "mutadapt/trace.hpp"

namespace mutadapt {

/// Chooses the robot action from the observable state, the current belief and the step index.
using RobotController =
    std::function<RobotAction(const ObservableState&, const Belief&, std::size_t step)>;

RobotController policy_controller(const Policy& policy);

/// Scripted controller that always opposes the human's last mode with a task
/// action, so every step is a switching opportunity. Used to collect
/// adaptability data.
RobotController opposing_controller();

/// Scripted controller that pushes toward `mode`, optionally opening with a
/// state-conveying action (the second round of transition-learning data).
RobotController fixed_mode_controller(Mode mode, bool open_with_conveying = false);

struct SimulatedHuman {
    HumanParams params;
    /// True response of the human's adaptability to a state-conveying action;
    /// defaults to the model's own table.
    std::optional<LatentTransition> alpha_response;
    std::optional<LatentTransition> compliance_response;
};

struct EpisodeOptions {
    std::uint64_t seed = 0;
    std::size_t max_steps = 20;
    std::string episode_id;
    std::string user_id;
    int round = 1;
    std::optional<Belief> initial_belief;  // defaults to the model prior
};

/// Alternates controller action, sampled human action, world transition and
/// belief update until a goal or max_steps. Deterministic given the seed.
InteractionTrace run_episode(const MomdpModel& model, const RobotController& robot,
                             const SimulatedHuman& human, const EpisodeOptions& options);

InteractionTrace run_episode(const Policy& policy, const MomdpModel& model,
                             const SimulatedHuman& human, const EpisodeOptions& options);

/// True iff the episode ended at the robot-optimal goal (timeouts count as false).
bool adaptation_metric(const InteractionTrace& trace);

struct PopulationStats {
    std::string label;
    Variant variant = Variant::baseline;
    std::size_t users = 0;
    std::size_t adapted = 0;
    double adaptation_rate = 0.0;
    double ci_low = 0.0;   // Wilson 95% interval on the rate
    double ci_high = 0.0;
    double mean_return = 0.0;
    double mean_verbal_actions = 0.0;
    std::size_t timed_out = 0;
    std::uint64_t seed = 0;
};

struct PopulationOptions {
    std::size_t users = 1000;
    std::uint64_t seed = 0;
    std::size_t max_steps = 20;
    std::size_t threads = 1;
};

/// Samples users' (alpha, c) from `prior`, runs one episode each. Results do
/// not depend on the thread count.
PopulationStats run_population(const Policy& policy, const MomdpModel& model, const Belief& prior,
                               const PopulationOptions& options);

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

void write_population_csv(std::ostream& out, const std::vector<PopulationStats>& rows);

}  // namespace mutadapt
