#include "mutadapt/learning.hpp"

#include <cmath>
#include <map>

#include "mutadapt/errors.hpp"
#include "mutadapt/human.hpp"

namespace mutadapt {

SwitchCounts count_adaptability(const InteractionTrace& trace, bool after_conveying) {
    SwitchCounts counts;
    bool active = !after_conveying;
    for (const auto& s : trace.steps) {
        const bool conveying = s.robot_action.kind == RobotAction::Kind::state_conveying;
        if (active && !conveying && !s.before.verbal_flag) {
            const Mode robot = infer_robot_mode(s.before);
            if (s.before.last_human_mode() != robot) {
                ++counts.opportunities;
                if (s.human_action.mode == robot) ++counts.switches;
            }
        }
        if (conveying) active = true;
    }
    return counts;
}

SwitchCounts count_compliance(const InteractionTrace& trace) {
    SwitchCounts counts;
    for (const auto& s : trace.steps) {
        if (!s.before.verbal_flag) continue;
        const Mode commanded = s.before.last_robot_mode();
        if (s.before.last_human_mode() == commanded) continue;
        ++counts.opportunities;
        if (s.human_action.mode == commanded) ++counts.switches;
    }
    return counts;
}

double estimate_adaptability(const SwitchCounts& c) {
    if (c.opportunities == 0) throw NoEvidence("trace contains no disagreements");
    return static_cast<double>(c.switches) / static_cast<double>(c.opportunities);
}

double estimate_adaptability(const InteractionTrace& trace) {
    return estimate_adaptability(count_adaptability(trace));
}

double estimate_compliance(const SwitchCounts& c) {
    if (c.opportunities == 0) throw NoEvidence("trace contains no verbal commands");
    return static_cast<double>(c.switches) / static_cast<double>(c.opportunities);
}

double estimate_compliance(const InteractionTrace& trace) {
    return estimate_compliance(count_compliance(trace));
}

std::size_t round_to_grid(double value, std::span<const double> grid) {
    if (grid.empty()) throw DomainError("grid is empty");
    std::size_t best = 0;
    double best_dist = std::abs(value - grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double d = std::abs(value - grid[i]);
        // Grid is increasing, so <= sends exact midpoints upward.
        if (d <= best_dist + 1e-12) {
            best = i;
            best_dist = d;
        }
    }
    return best;
}

std::vector<double> build_prior(std::span<const double> estimates, std::span<const double> grid) {
    if (estimates.empty()) throw DomainError("cannot build a prior from no estimates");
    std::vector<double> hist(grid.size(), 0.0);
    for (double e : estimates) hist[round_to_grid(e, grid)] += 1.0;
    for (double& h : hist) h /= static_cast<double>(estimates.size());
    return hist;
}

LatentTransition estimate_transition_alpha(std::span<const std::pair<double, double>> pairs,
                                           std::span<const double> grid, double delta) {
    if (pairs.empty()) throw DomainError("cannot estimate a transition from no pairs");
    if (!(delta >= 0.0)) throw DomainError("window half-width must be nonnegative");
    constexpr double tol = 1e-9;
    const auto on_grid = [&](double v) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (std::abs(grid[i] - v) < tol) return i;
        throw DomainError("pair value " + std::to_string(v) + " is not on the grid");
    };
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (const auto& [before, after] : pairs) idx.emplace_back(on_grid(before), on_grid(after));

    const std::size_t n = grid.size();
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t in_window = 0;
        for (const auto& [b, a] : idx) {
            if (std::abs(grid[b] - grid[i]) > delta + tol) continue;
            ++in_window;
            rows[i][a] += 1.0;
        }
        if (in_window == 0) {
            rows[i][i] = 1.0;
            continue;
        }
        for (double& v : rows[i]) v /= static_cast<double>(in_window);
    }
    return LatentTransition(std::move(rows));
}

LearnedPriors learn_priors(const std::vector<InteractionTrace>& traces, std::span<const double> alpha_grid,
                           std::span<const double> compliance_grid, bool pool_by_user) {
    LearnedPriors out;
    if (pool_by_user) {
        std::map<std::string, std::pair<SwitchCounts, SwitchCounts>> users;
        for (const auto& t : traces) {
            auto& u = users[t.user_id.empty() ? t.episode_id : t.user_id];
            u.first += count_adaptability(t);
            u.second += count_compliance(t);
        }
        for (const auto& [id, u] : users) {
            if (u.first.opportunities > 0) out.alpha_estimates.push_back(estimate_adaptability(u.first));
            if (u.second.opportunities > 0) out.compliance_estimates.push_back(estimate_compliance(u.second));
        }
    } else {
        for (const auto& t : traces) {
            const auto a = count_adaptability(t);
            const auto c = count_compliance(t);
            if (a.opportunities > 0) out.alpha_estimates.push_back(estimate_adaptability(a));
            if (c.opportunities > 0) out.compliance_estimates.push_back(estimate_compliance(c));
        }
    }
    if (out.alpha_estimates.empty() && out.compliance_estimates.empty())
        throw NoEvidence("no trace contains a disagreement or a verbal command");
    if (!out.alpha_estimates.empty()) out.alpha_prior = build_prior(out.alpha_estimates, alpha_grid);
    if (!out.compliance_estimates.empty())
        out.compliance_prior = build_prior(out.compliance_estimates, compliance_grid);
    return out;
}

std::vector<std::pair<double, double>> adaptability_pairs(const std::vector<InteractionTrace>& traces,
                                                          std::span<const double> grid) {
    std::map<std::string, std::pair<SwitchCounts, SwitchCounts>> users;
    for (const auto& t : traces) {
        if (t.user_id.empty()) throw ValidationError("paired-round traces need a user_id");
        auto& u = users[t.user_id];
        if (t.round == 1) u.first += count_adaptability(t);
        else if (t.round == 2) u.second += count_adaptability(t, true);
    }
    std::vector<std::pair<double, double>> pairs;
    for (const auto& [id, u] : users) {
        if (u.first.opportunities == 0 || u.second.opportunities == 0) continue;
        pairs.emplace_back(grid[round_to_grid(estimate_adaptability(u.first), grid)],
                           grid[round_to_grid(estimate_adaptability(u.second), grid)]);
    }
    if (pairs.empty()) throw NoEvidence("no user has disagreements in both rounds");
    return pairs;
}

}  // namespace mutadapt
