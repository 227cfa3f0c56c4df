#include "mutadapt/model.hpp"

#include <algorithm>
#include <cmath>

#include "mutadapt/belief.hpp"
#include "mutadapt/config.hpp"
#include "mutadapt/errors.hpp"

namespace mutadapt {

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::baseline: return "baseline";
        case Variant::compliance: return "compliance";
        case Variant::state_conveying: return "state_conveying";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name) {
    if (name == "baseline") return Variant::baseline;
    if (name == "compliance") return Variant::compliance;
    if (name == "state_conveying" || name == "state-conveying") return Variant::state_conveying;
    throw ValidationError("unknown variant '" + std::string(name) + "'");
}

std::string_view to_string(Mode m) { return m == kGoal1 ? "goal1" : "goal2"; }

Mode parse_mode(std::string_view name) {
    if (name == "goal1") return kGoal1;
    if (name == "goal2") return kGoal2;
    throw ValidationError("unknown mode '" + std::string(name) + "'");
}

int rotation_of(Mode m) { return m == kGoal1 ? -kOrientationStep : kOrientationStep; }

bool is_valid_orientation(int degrees) {
    return degrees >= kGoal1Orientation && degrees <= kGoal2Orientation &&
           (degrees - kGoal1Orientation) % kOrientationStep == 0;
}

std::size_t orientation_index(int degrees) {
    if (!is_valid_orientation(degrees))
        throw DomainError("orientation " + std::to_string(degrees) + " is off the grid");
    return static_cast<std::size_t>((degrees - kGoal1Orientation) / kOrientationStep);
}

int orientation_at(std::size_t index) {
    return kGoal1Orientation + static_cast<int>(index) * kOrientationStep;
}

std::string to_string(const RobotAction& a) {
    switch (a.kind) {
        case RobotAction::Kind::task: return "task:" + std::string(to_string(a.mode));
        case RobotAction::Kind::verbal_command: return "command:" + std::string(to_string(a.mode));
        case RobotAction::Kind::state_conveying: return "conveying";
    }
    return "unknown";
}

LatentTransition::LatentTransition(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {}

LatentTransition LatentTransition::identity(std::size_t n) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) rows[i][i] = 1.0;
    return LatentTransition(std::move(rows));
}

bool LatentTransition::is_identity() const {
    for (std::size_t i = 0; i < rows_.size(); ++i)
        for (std::size_t j = 0; j < rows_[i].size(); ++j)
            if (rows_[i][j] != (i == j ? 1.0 : 0.0)) return false;
    return true;
}

void LatentTransition::validate(std::size_t expected_size, double tol) const {
    if (rows_.size() != expected_size)
        throw ValidationError("latent transition has " + std::to_string(rows_.size()) +
                              " rows, expected " + std::to_string(expected_size));
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].size() != expected_size)
            throw ValidationError("latent transition row " + std::to_string(i) + " has wrong width");
        double sum = 0.0;
        for (double p : rows_[i]) {
            if (!(p >= 0.0) || !std::isfinite(p))
                throw ValidationError("latent transition row " + std::to_string(i) +
                                      " has a negative or non-finite entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol)
            throw ValidationError("latent transition row " + std::to_string(i) + " sums to " +
                                  std::to_string(sum));
    }
}

namespace {

void validate_grid(const std::vector<double>& grid, const char* name) {
    if (grid.empty()) throw ValidationError(std::string(name) + " grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && grid[i] <= 1.0))
            throw ValidationError(std::string(name) + " grid values must lie in [0, 1]");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw ValidationError(std::string(name) + " grid must be strictly increasing");
    }
}

std::vector<double> checked_marginal(const std::vector<double>& given, std::size_t n,
                                     const char* name) {
    if (given.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
    if (given.size() != n)
        throw ValidationError(std::string(name) + " prior length does not match its grid");
    double sum = 0.0;
    for (double p : given) {
        if (!(p >= 0.0)) throw ValidationError(std::string(name) + " prior has a negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError(std::string(name) + " prior does not sum to 1");
    return given;
}

std::vector<Mode> decode_history(std::size_t code, std::size_t k) {
    std::vector<Mode> modes(k);
    for (std::size_t i = 0; i < k; ++i) {
        modes[i] = Mode{static_cast<std::uint8_t>(code % kNumModes)};
        code /= kNumModes;
    }
    return modes;
}

std::size_t encode_history(const std::vector<Mode>& modes) {
    std::size_t code = 0;
    for (std::size_t i = modes.size(); i-- > 0;) code = code * kNumModes + modes[i].id;
    return code;
}

std::size_t history_count(std::size_t k) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < k; ++i) n *= kNumModes;
    return n;
}

}  // namespace

MomdpModel::MomdpModel(ModelConfig config) : config_(std::move(config)) {
    const auto& c = config_;
    if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw ValidationError("gamma must lie in [0, 1)");
    if (c.history_length < 1 || c.history_length > 8)
        throw ValidationError("history_length must lie in [1, 8]");
    validate_grid(c.alpha_grid, "alpha");
    validate_grid(c.compliance_grid, "compliance");
    if (!is_valid_orientation(c.initial_orientation) ||
        c.initial_orientation == kGoal1Orientation || c.initial_orientation == kGoal2Orientation)
        throw ValidationError("initial orientation must be a non-terminal grid orientation");
    if (c.initial_robot_mode.id >= kNumModes || c.initial_human_mode.id >= kNumModes)
        throw ValidationError("initial modes must be valid mode ids");
    if (!std::isfinite(c.rewards.optimal) || !std::isfinite(c.rewards.suboptimal) ||
        !std::isfinite(c.rewards.other) || !std::isfinite(c.rewards.verbal_cost))
        throw ValidationError("rewards must be finite");

    config_.alpha_prior = checked_marginal(c.alpha_prior, c.alpha_grid.size(), "alpha");
    config_.compliance_prior =
        checked_marginal(c.compliance_prior, c.compliance_grid.size(), "compliance");

    t_alpha_ = c.t_alpha ? *c.t_alpha : LatentTransition::identity(alpha_count());
    t_compliance_ = c.t_compliance ? *c.t_compliance : LatentTransition::identity(compliance_count());
    t_alpha_.validate(alpha_count());
    t_compliance_.validate(compliance_count());

    for (std::uint8_t m = 0; m < kNumModes; ++m) actions_.push_back(RobotAction::task(Mode{m}));
    if (c.variant == Variant::compliance)
        for (std::uint8_t m = 0; m < kNumModes; ++m)
            actions_.push_back(RobotAction::command(Mode{m}));
    if (c.variant == Variant::state_conveying) actions_.push_back(RobotAction::conveying());

    states_ = enumerate_observable_states(*this);
    hash_ = model_config_hash(config_);
}

double MomdpModel::alpha_value(std::size_t latent) const {
    return config_.alpha_grid[alpha_index(latent)];
}

double MomdpModel::compliance_value(std::size_t latent) const {
    return config_.compliance_grid[compliance_index(latent)];
}

bool MomdpModel::allows(const RobotAction& a) const {
    return std::find(actions_.begin(), actions_.end(), a) != actions_.end();
}

std::size_t MomdpModel::action_index(const RobotAction& a) const {
    auto it = std::find(actions_.begin(), actions_.end(), a);
    if (it == actions_.end())
        throw DomainError("action " + to_string(a) + " is not available in the " +
                          std::string(to_string(variant())) + " variant");
    return static_cast<std::size_t>(it - actions_.begin());
}

bool MomdpModel::is_valid_state(const ObservableState& x) const {
    if (!is_valid_orientation(x.world.orientation)) return false;
    if (x.human_modes.size() != history_length() || x.robot_modes.size() != history_length())
        return false;
    for (Mode m : x.human_modes)
        if (m.id >= kNumModes) return false;
    for (Mode m : x.robot_modes)
        if (m.id >= kNumModes) return false;
    if (x.verbal_flag && !uses_verbal_flag()) return false;
    return true;
}

std::size_t MomdpModel::state_index(const ObservableState& x) const {
    if (!is_valid_state(x)) throw DomainError("observable state does not belong to this model");
    const std::size_t histories = history_count(history_length());
    const std::size_t flags = uses_verbal_flag() ? 2 : 1;
    std::size_t idx = orientation_index(x.world.orientation);
    idx = idx * histories + encode_history(x.human_modes);
    idx = idx * histories + encode_history(x.robot_modes);
    idx = idx * flags + (x.verbal_flag ? 1 : 0);
    return idx;
}

ObservableState MomdpModel::initial_state(std::optional<Mode> human_mode) const {
    ObservableState x;
    x.world.orientation = config_.initial_orientation;
    x.human_modes.assign(history_length(), human_mode.value_or(config_.initial_human_mode));
    x.robot_modes.assign(history_length(), config_.initial_robot_mode);
    x.verbal_flag = false;
    return x;
}

Belief MomdpModel::prior() const {
    return Belief::product(config_.alpha_prior, config_.compliance_prior);
}

std::vector<ObservableState> enumerate_observable_states(const MomdpModel& model) {
    const std::size_t k = model.history_length();
    const std::size_t histories = history_count(k);
    const std::size_t flags = model.uses_verbal_flag() ? 2 : 1;
    std::vector<ObservableState> out;
    out.reserve(kNumOrientations * histories * histories * flags);
    for (std::size_t o = 0; o < kNumOrientations; ++o)
        for (std::size_t h = 0; h < histories; ++h)
            for (std::size_t r = 0; r < histories; ++r)
                for (std::size_t f = 0; f < flags; ++f) {
                    ObservableState x;
                    x.world.orientation = orientation_at(o);
                    x.human_modes = decode_history(h, k);
                    x.robot_modes = decode_history(r, k);
                    x.verbal_flag = f == 1;
                    out.push_back(std::move(x));
                }
    return out;
}

Mode robot_step_mode(const ObservableState& x, const RobotAction& a_r) {
    if (a_r.kind == RobotAction::Kind::state_conveying) return x.last_robot_mode();
    return a_r.mode;
}

ObservableState world_transition(const MomdpModel& model, const ObservableState& x,
                                 const RobotAction& a_r, const HumanAction& a_h) {
    if (x.terminal()) throw DomainError("world_transition called on a terminal state");
    if (!model.allows(a_r))
        throw DomainError("action " + to_string(a_r) + " is not available in the " +
                          std::string(to_string(model.variant())) + " variant");
    if (a_h.mode.id >= kNumModes) throw DomainError("invalid human mode");

    ObservableState next = x;
    if (a_r.kind == RobotAction::Kind::task && a_r.mode == a_h.mode)
        next.world.orientation += rotation_of(a_h.mode);

    auto push = [](std::vector<Mode>& history, Mode m) {
        std::rotate(history.begin(), history.begin() + 1, history.end());
        history.back() = m;
    };
    push(next.human_modes, a_h.mode);
    push(next.robot_modes, robot_step_mode(x, a_r));
    next.verbal_flag =
        model.uses_verbal_flag() && a_r.kind == RobotAction::Kind::verbal_command;
    return next;
}

double reward(const MomdpModel& model, const ObservableState& x, const RobotAction& a_r,
              const HumanAction& /*a_h*/, const ObservableState& x_next) {
    const auto& r = model.rewards();
    double value = r.other;
    if (!x.terminal()) {
        if (x_next.world.orientation == kGoal1Orientation) value = r.optimal;
        else if (x_next.world.orientation == kGoal2Orientation) value = r.suboptimal;
    }
    if (a_r.is_verbal()) value -= r.verbal_cost;
    return value;
}

}  // namespace mutadapt
