#pragma once

// Bounded-memory adaptation model of the human, with the compliance branch:
// after a verbal command the human follows it with probability c, otherwise
// a disagreement makes them switch to the robot's mode with probability alpha.

#include <array>
#include <utility>

#include "mutadapt/model.hpp"
#include "mutadapt/random.hpp"

namespace mutadapt {

struct HumanParams {
    double alpha = 0.0;
    double compliance = 0.0;
    Mode current_mode = kGoal2;

    bool operator==(const HumanParams&) const = default;
};

/// Robot mode as perceived over the bounded history: majority vote,
/// ties resolved by the most recent entry.
Mode infer_robot_mode(const ObservableState& x);

/// Distribution over the human's next action, indexed by mode id.
std::array<double, kNumModes> human_action_distribution(const ObservableState& x, double alpha,
                                                        double compliance);

double human_policy(const ObservableState& x, double alpha, double compliance,
                    const HumanAction& a_h);

/// Distribution over the human's action in response to a_r. During a
/// state-conveying step the human keeps their own mode with certainty: the
/// utterance acts on the latent state, not on the action branch.
std::array<double, kNumModes> human_response(const ObservableState& x, const RobotAction& a_r,
                                             double alpha, double compliance);

/// Draws the next action. On a switch the returned params carry the new mode.
std::pair<HumanAction, HumanParams> sample_human_action(const ObservableState& x,
                                                        HumanParams params, Rng& rng);

/// Same, drawing from human_response for the robot's action of this step.
std::pair<HumanAction, HumanParams> sample_human_action(const ObservableState& x, const RobotAction& a_r,
                                                        HumanParams params, Rng& rng);

}  // namespace mutadapt
