#pragma once

// Index-based view of a MomdpModel shared by the planners.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mutadapt/belief.hpp"
#include "mutadapt/model.hpp"

namespace mutadapt::detail {

struct Outcome {
    std::size_t mode = 0;
    double probability = 0.0;
    std::size_t next = 0;
    double reward = 0.0;
    Belief posterior;
};

class Tabular {
public:
    explicit Tabular(const MomdpModel& model);

    const MomdpModel& model() const { return *model_; }
    std::size_t state_count() const { return states_; }
    std::size_t action_count() const { return actions_; }
    std::size_t latent_count() const { return latents_; }
    double gamma() const { return gamma_; }

    bool terminal(std::size_t s) const { return terminal_[s] != 0; }
    std::size_t next(std::size_t s, std::size_t a, std::size_t m) const {
        return next_[(s * actions_ + a) * kNumModes + m];
    }
    double reward(std::size_t s, std::size_t a, std::size_t m) const {
        return reward_[(s * actions_ + a) * kNumModes + m];
    }
    /// P(human mode m | s, y) in response to robot action a.
    double human(std::size_t s, std::size_t a, std::size_t y, std::size_t m) const {
        if (conveying(a)) return own_mode_[s] == m ? 1.0 : 0.0;
        return human_[(s * latents_ + y) * kNumModes + m];
    }
    bool conveying(std::size_t a) const { return conveying_[a] != 0; }
    const RobotAction& action(std::size_t a) const { return model_->actions()[a]; }

    /// Latent transition applied to a vector over y': out(y) = sum_y' T(y, a, y') v(y').
    std::vector<double> pull_back(std::size_t a, const std::vector<double>& v) const;
    /// T(y, a, y') for the joint latent grid.
    double latent_transition(std::size_t a, std::size_t y, std::size_t y_next) const;

    /// Outcomes of taking a at (s, b), one per human action with positive probability.
    void expand(std::size_t s, const Belief& b, std::size_t a, std::vector<Outcome>& out) const;

private:
    const MomdpModel* model_;
    std::size_t states_, actions_, latents_;
    double gamma_;
    std::vector<std::uint8_t> terminal_;
    std::vector<std::size_t> next_;
    std::vector<double> reward_;
    std::vector<double> human_;
    std::vector<std::uint8_t> conveying_;
    std::vector<std::size_t> own_mode_;
};

/// Byte key identifying a belief up to ~1e-12 per cell.
std::string belief_key(std::size_t s, const Belief& b, std::int64_t extra = 0);

}  // namespace mutadapt::detail
