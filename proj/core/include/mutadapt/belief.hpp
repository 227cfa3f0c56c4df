#pragma once

// Exact Bayesian tracking of the latent (alpha, c) grid.

#include <cstddef>
#include <span>
#include <vector>

#include "mutadapt/model.hpp"

namespace mutadapt {

/// Probability table over A x C, stored row-major in (alpha, c) order.
class Belief {
public:
    Belief() = default;
    Belief(std::size_t alpha_count, std::size_t compliance_count, std::vector<double> table);

    static Belief uniform(std::size_t alpha_count, std::size_t compliance_count);
    static Belief point(std::size_t alpha_count, std::size_t compliance_count, std::size_t alpha_index,
                        std::size_t compliance_index);
    static Belief product(std::span<const double> alpha_marginal,
                          std::span<const double> compliance_marginal);

    std::size_t alpha_count() const { return alpha_count_; }
    std::size_t compliance_count() const { return compliance_count_; }
    std::size_t size() const { return table_.size(); }

    double operator[](std::size_t latent) const { return table_[latent]; }
    double at(std::size_t alpha_index, std::size_t compliance_index) const {
        return table_[alpha_index * compliance_count_ + compliance_index];
    }
    const std::vector<double>& table() const { return table_; }

    std::vector<double> alpha_marginal() const;
    std::vector<double> compliance_marginal() const;

    /// Throws ValidationError unless nonnegative with unit mass within tol.
    void validate(double tol = 1e-9) const;

    bool operator==(const Belief&) const = default;

private:
    std::size_t alpha_count_ = 0;
    std::size_t compliance_count_ = 0;
    std::vector<double> table_;
};

double mean_alpha(const MomdpModel& model, const Belief& b);
double mean_compliance(const MomdpModel& model, const Belief& b);

/// P(x_next | x, a_r, y) for every latent cell y: the probability mass of the
/// human actions that lead from x to x_next.
std::vector<double> observation_likelihood(const MomdpModel& model, const ObservableState& x,
                                           const RobotAction& a_r,
                                           const ObservableState& x_next,
                                           bool compliance_branch);

/// b'(y') = eta * sum_y T(y, a_r, y') L(y) b(y). Latent transitions apply only
/// to state-conveying actions. Throws InconsistentObservation on zero mass.
Belief posterior(const MomdpModel& model, const Belief& b, std::span<const double> likelihood,
                 const RobotAction& a_r);

/// Adaptability-only update (c untouched). Task actions only.
Belief update_baseline(const MomdpModel& model, const Belief& b, const ObservableState& x,
                       const RobotAction& a_r, const ObservableState& x_next);

/// Adaptability/compliance update; the verbal flag of x selects the branch.
Belief update_compliance(const MomdpModel& model, const Belief& b, const ObservableState& x,
                         const RobotAction& a_r, const ObservableState& x_next);

/// Update with latent transitions induced by state-conveying actions.
Belief update_state_conveying(const MomdpModel& model, const Belief& b,
                              const ObservableState& x, const RobotAction& a_r,
                              const ObservableState& x_next);

/// Dispatches on the model's variant.
Belief update_belief(const MomdpModel& model, const Belief& b, const ObservableState& x,
                     const RobotAction& a_r, const ObservableState& x_next);

}  // namespace mutadapt
