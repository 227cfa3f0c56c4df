#pragma once

// Estimation of per-user adaptability and compliance from interaction traces,
// histogram priors over the latent grids, and the windowed frequency estimate
// of how a state-conveying action moves adaptability.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mutadapt/model.hpp"
#include "mutadapt/trace.hpp"

namespace mutadapt {

struct SwitchCounts {
    std::size_t opportunities = 0;  // disagreements (or commands) the human could react to
    std::size_t switches = 0;

    SwitchCounts& operator+=(const SwitchCounts& o) {
        opportunities += o.opportunities;
        switches += o.switches;
        return *this;
    }
};

/// Steps whose prior state shows a mode disagreement with no pending command,
/// except state-conveying steps (the human cannot switch during the utterance).
/// A switch is the human taking the robot's mode.
/// With `after_conveying`, only steps after the first state-conveying action count.
SwitchCounts count_adaptability(const InteractionTrace& trace, bool after_conveying = false);

/// Steps following a verbal command that named a mode other than the human's.
SwitchCounts count_compliance(const InteractionTrace& trace);

/// switches / disagreements. Throws NoEvidence without disagreements.
double estimate_adaptability(const InteractionTrace& trace);
double estimate_adaptability(const SwitchCounts& counts);

/// switches / commands. Throws NoEvidence without commands.
double estimate_compliance(const InteractionTrace& trace);
double estimate_compliance(const SwitchCounts& counts);

/// Nearest grid value; midpoints go to the larger value.
std::size_t round_to_grid(double value, std::span<const double> grid);

/// Normalized histogram of rounded estimates. Throws DomainError when empty.
std::vector<double> build_prior(std::span<const double> estimates, std::span<const double> grid);

/// T(a, a') = #{u : est_u in [a - delta, a + delta], est'_u = a'} / #{u : est_u in [a - delta, a + delta]},
/// with identity rows where the window holds no user. Pairs must be on the grid.
LatentTransition estimate_transition_alpha(std::span<const std::pair<double, double>> pairs,
                                           std::span<const double> grid, double delta = 0.25);

struct LearnedPriors {
    std::vector<double> alpha_prior;
    std::vector<double> compliance_prior;
    std::vector<double> alpha_estimates;
    std::vector<double> compliance_estimates;
};

/// Per-trace estimates, or per-user pooled counts when `pool_by_user` is set.
/// Traces without evidence for a quantity are skipped for that quantity.
LearnedPriors learn_priors(const std::vector<InteractionTrace>& traces, std::span<const double> alpha_grid,
                           std::span<const double> compliance_grid, bool pool_by_user);

/// Pairs each user's round-1 adaptability with their round-2 adaptability
/// measured after the opening state-conveying action; both rounded to the grid.
std::vector<std::pair<double, double>> adaptability_pairs(const std::vector<InteractionTrace>& traces,
                                                          std::span<const double> grid);

}  // namespace mutadapt
