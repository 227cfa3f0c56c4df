#include "mutadapt/human.hpp"

#include "mutadapt/errors.hpp"

namespace mutadapt {

Mode infer_robot_mode(const ObservableState& x) {
    if (x.robot_modes.empty()) throw DomainError("robot mode history is empty");
    std::array<std::size_t, kNumModes> counts{};
    for (Mode m : x.robot_modes) ++counts[m.id];
    const Mode recent = x.robot_modes.back();
    Mode best = recent;
    for (std::uint8_t m = 0; m < kNumModes; ++m)
        if (counts[m] > counts[best.id]) best = Mode{m};
    return best;
}

std::array<double, kNumModes> human_action_distribution(const ObservableState& x, double alpha,
                                                        double compliance) {
    std::array<double, kNumModes> dist{};
    const Mode own = x.last_human_mode();
    // A verbal command names its mode explicitly; otherwise the human reads it off the history.
    const Mode robot = x.verbal_flag ? x.last_robot_mode() : infer_robot_mode(x);
    if (own == robot) {
        dist[own.id] = 1.0;
        return dist;
    }
    const double p_switch = x.verbal_flag ? compliance : alpha;
    dist[robot.id] = p_switch;
    dist[own.id] = 1.0 - p_switch;
    return dist;
}

double human_policy(const ObservableState& x, double alpha, double compliance,
                    const HumanAction& a_h) {
    if (a_h.mode.id >= kNumModes) throw DomainError("invalid human mode");
    return human_action_distribution(x, alpha, compliance)[a_h.mode.id];
}

std::array<double, kNumModes> human_response(const ObservableState& x, const RobotAction& a_r,
                                             double alpha, double compliance) {
    if (a_r.kind == RobotAction::Kind::state_conveying) {
        std::array<double, kNumModes> dist{};
        dist[x.last_human_mode().id] = 1.0;
        return dist;
    }
    return human_action_distribution(x, alpha, compliance);
}

namespace {

std::pair<HumanAction, HumanParams> draw(const ObservableState& x, const std::array<double, kNumModes>& dist,
                                         HumanParams params, Rng& rng) {
    if (x.terminal()) throw DomainError("sample_human_action called on a terminal state");
    const Mode chosen{static_cast<std::uint8_t>(sample_index(dist, rng))};
    params.current_mode = chosen;
    return {HumanAction{chosen}, params};
}

}  // namespace

std::pair<HumanAction, HumanParams> sample_human_action(const ObservableState& x,
                                                        HumanParams params, Rng& rng) {
    return draw(x, human_action_distribution(x, params.alpha, params.compliance), params, rng);
}

std::pair<HumanAction, HumanParams> sample_human_action(const ObservableState& x, const RobotAction& a_r,
                                                        HumanParams params, Rng& rng) {
    return draw(x, human_response(x, a_r, params.alpha, params.compliance), params, rng);
}

}  // namespace mutadapt
