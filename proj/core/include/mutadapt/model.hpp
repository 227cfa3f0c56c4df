#pragma once

// Factored MOMDP for the human-robot table-carrying task.
//
// The observable state x holds the table orientation, the last k human and
// robot modes and (for the compliance variant) a flag telling whether the
// last robot action was a verbal command. The latent state y = (alpha, c)
// lives on a discrete grid; beliefs are maintained over y only.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mutadapt {

enum class Variant { baseline, compliance, state_conveying };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

/// Modal policy index. Table-carry has two: toward Goal 1 (clockwise, -90)
/// and toward Goal 2 (counterclockwise, +90).
struct Mode {
    std::uint8_t id = 0;
    auto operator<=>(const Mode&) const = default;
};

inline constexpr Mode kGoal1{0};
inline constexpr Mode kGoal2{1};
inline constexpr std::size_t kNumModes = 2;

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view name);

/// Orientation change in degrees for one agreed step in mode m.
int rotation_of(Mode m);

inline constexpr int kOrientationStep = 20;
inline constexpr int kGoal1Orientation = -90;
inline constexpr int kGoal2Orientation = 90;
inline constexpr std::size_t kNumOrientations = 10;

bool is_valid_orientation(int degrees);
std::size_t orientation_index(int degrees);
int orientation_at(std::size_t index);

struct WorldState {
    int orientation = 10;

    bool terminal() const {
        return orientation == kGoal1Orientation || orientation == kGoal2Orientation;
    }
    auto operator<=>(const WorldState&) const = default;
};

struct ObservableState {
    WorldState world;
    std::vector<Mode> human_modes;  // oldest first, size k
    std::vector<Mode> robot_modes;  // oldest first, size k
    bool verbal_flag = false;

    bool terminal() const { return world.terminal(); }
    Mode last_human_mode() const { return human_modes.back(); }
    Mode last_robot_mode() const { return robot_modes.back(); }

    auto operator<=>(const ObservableState&) const = default;
};

struct RobotAction {
    enum class Kind : std::uint8_t { task = 0, verbal_command = 1, state_conveying = 2 };

    Kind kind = Kind::task;
    Mode mode{};  // rotation direction or commanded mode; unused for state_conveying

    static RobotAction task(Mode m) { return {Kind::task, m}; }
    static RobotAction command(Mode m) { return {Kind::verbal_command, m}; }
    static RobotAction conveying() { return {Kind::state_conveying, Mode{}}; }

    bool is_verbal() const { return kind != Kind::task; }

    // Fixed ordering used for tie-breaking: task < command < conveying, then mode.
    auto operator<=>(const RobotAction&) const = default;
};

std::string to_string(const RobotAction& a);

struct HumanAction {
    Mode mode{};
    auto operator<=>(const HumanAction&) const = default;
};

/// Row-stochastic table over a latent grid: rows index the value before a
/// state-conveying action, columns the value after.
class LatentTransition {
public:
    LatentTransition() = default;
    explicit LatentTransition(std::vector<std::vector<double>> rows);

    static LatentTransition identity(std::size_t n);

    std::size_t size() const { return rows_.size(); }
    double operator()(std::size_t from, std::size_t to) const { return rows_[from][to]; }
    const std::vector<double>& row(std::size_t from) const { return rows_[from]; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }
    bool is_identity() const;

    /// Throws ValidationError unless square, nonnegative and each row sums to 1 within tol.
    void validate(std::size_t expected_size, double tol = 1e-9) const;

    bool operator==(const LatentTransition&) const = default;

private:
    std::vector<std::vector<double>> rows_;
};

struct Rewards {
    double optimal = 20.0;
    double suboptimal = 15.0;
    double other = 0.0;
    double verbal_cost = 0.0;

    bool operator==(const Rewards&) const = default;
};

/// Declarative description of a model, as read from a config file.
struct ModelConfig {
    Variant variant = Variant::baseline;
    std::size_t history_length = 1;
    double gamma = 0.9;
    Rewards rewards;
    std::vector<double> alpha_grid{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> compliance_grid{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> alpha_prior;       // empty = uniform
    std::vector<double> compliance_prior;  // empty = uniform
    std::optional<LatentTransition> t_alpha;       // absent = identity
    std::optional<LatentTransition> t_compliance;  // absent = identity
    int initial_orientation = 10;
    Mode initial_robot_mode = kGoal1;
    Mode initial_human_mode = kGoal2;
};

class Belief;

/// Validated, immutable model. Safe to share across threads.
class MomdpModel {
public:
    explicit MomdpModel(ModelConfig config);

    const ModelConfig& config() const { return config_; }
    Variant variant() const { return config_.variant; }
    std::size_t history_length() const { return config_.history_length; }
    double gamma() const { return config_.gamma; }
    const Rewards& rewards() const { return config_.rewards; }
    bool uses_verbal_flag() const { return config_.variant == Variant::compliance; }

    std::size_t alpha_count() const { return config_.alpha_grid.size(); }
    std::size_t compliance_count() const { return config_.compliance_grid.size(); }
    std::size_t latent_count() const { return alpha_count() * compliance_count(); }
    double alpha_value(std::size_t latent) const;
    double compliance_value(std::size_t latent) const;
    std::size_t alpha_index(std::size_t latent) const { return latent / compliance_count(); }
    std::size_t compliance_index(std::size_t latent) const { return latent % compliance_count(); }

    const LatentTransition& t_alpha() const { return t_alpha_; }
    const LatentTransition& t_compliance() const { return t_compliance_; }

    /// Robot actions available in this variant, in tie-breaking order.
    const std::vector<RobotAction>& actions() const { return actions_; }
    bool allows(const RobotAction& a) const;
    std::size_t action_index(const RobotAction& a) const;

    const std::vector<ObservableState>& states() const { return states_; }
    std::size_t state_index(const ObservableState& x) const;
    bool is_valid_state(const ObservableState& x) const;

    /// Start of an episode: table at the configured orientation with the
    /// config's robot mode and the given human mode as the previous step.
    ObservableState initial_state(std::optional<Mode> human_mode = std::nullopt) const;

    /// Joint prior over (alpha, c): the product of the two marginals.
    Belief prior() const;

    /// Short hex digest of the canonical config, used to tie policies to models.
    const std::string& hash() const { return hash_; }

private:
    ModelConfig config_;
    LatentTransition t_alpha_;
    LatentTransition t_compliance_;
    std::vector<RobotAction> actions_;
    std::vector<ObservableState> states_;
    std::string hash_;
};

/// Deterministic table-carry dynamics T_x. Throws DomainError on terminal x.
ObservableState world_transition(const MomdpModel& model, const ObservableState& x,
                                 const RobotAction& a_r, const HumanAction& a_h);

/// Mode the robot's step contributes to the history.
Mode robot_step_mode(const ObservableState& x, const RobotAction& a_r);

/// Reward of the step x -> x_next; goal rewards are paid on first arrival.
double reward(const MomdpModel& model, const ObservableState& x, const RobotAction& a_r,
              const HumanAction& a_h, const ObservableState& x_next);

std::vector<ObservableState> enumerate_observable_states(const MomdpModel& model);

}  // namespace mutadapt
