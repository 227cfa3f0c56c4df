#include "mutadapt/belief.hpp"

#include <cmath>

#include "mutadapt/errors.hpp"
#include "mutadapt/human.hpp"

namespace mutadapt {

Belief::Belief(std::size_t alpha_count, std::size_t compliance_count, std::vector<double> table)
    : alpha_count_(alpha_count), compliance_count_(compliance_count), table_(std::move(table)) {
    if (table_.size() != alpha_count_ * compliance_count_)
        throw ValidationError("belief table size does not match the latent grid");
}

Belief Belief::uniform(std::size_t na, std::size_t nc) {
    return Belief(na, nc, std::vector<double>(na * nc, 1.0 / static_cast<double>(na * nc)));
}

Belief Belief::point(std::size_t na, std::size_t nc, std::size_t ia, std::size_t ic) {
    if (ia >= na || ic >= nc) throw DomainError("point belief index is off the grid");
    std::vector<double> t(na * nc, 0.0);
    t[ia * nc + ic] = 1.0;
    return Belief(na, nc, std::move(t));
}

Belief Belief::product(std::span<const double> a, std::span<const double> c) {
    std::vector<double> t(a.size() * c.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j) t[i * c.size() + j] = a[i] * c[j];
    return Belief(a.size(), c.size(), std::move(t));
}

std::vector<double> Belief::alpha_marginal() const {
    std::vector<double> m(alpha_count_, 0.0);
    for (std::size_t i = 0; i < alpha_count_; ++i)
        for (std::size_t j = 0; j < compliance_count_; ++j) m[i] += at(i, j);
    return m;
}

std::vector<double> Belief::compliance_marginal() const {
    std::vector<double> m(compliance_count_, 0.0);
    for (std::size_t i = 0; i < alpha_count_; ++i)
        for (std::size_t j = 0; j < compliance_count_; ++j) m[j] += at(i, j);
    return m;
}

void Belief::validate(double tol) const {
    double sum = 0.0;
    for (double p : table_) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("belief has a negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol) throw ValidationError("belief does not sum to 1");
}

double mean_alpha(const MomdpModel& model, const Belief& b) {
    double m = 0.0;
    for (std::size_t y = 0; y < b.size(); ++y) m += b[y] * model.alpha_value(y);
    return m;
}

double mean_compliance(const MomdpModel& model, const Belief& b) {
    double m = 0.0;
    for (std::size_t y = 0; y < b.size(); ++y) m += b[y] * model.compliance_value(y);
    return m;
}

std::vector<double> observation_likelihood(const MomdpModel& model, const ObservableState& x,
                                           const RobotAction& a_r,
                                           const ObservableState& x_next,
                                           bool compliance_branch) {
    ObservableState from = x;
    if (!compliance_branch) from.verbal_flag = false;

    // Human actions consistent with the observed successor.
    std::array<bool, kNumModes> consistent{};
    for (std::uint8_t m = 0; m < kNumModes; ++m)
        consistent[m] = world_transition(model, x, a_r, HumanAction{Mode{m}}) == x_next;

    std::vector<double> lik(model.latent_count(), 0.0);
    for (std::size_t y = 0; y < lik.size(); ++y) {
        const auto dist =
            human_response(from, a_r, model.alpha_value(y), model.compliance_value(y));
        for (std::uint8_t m = 0; m < kNumModes; ++m)
            if (consistent[m]) lik[y] += dist[m];
    }
    return lik;
}

Belief posterior(const MomdpModel& model, const Belief& b, std::span<const double> likelihood,
                 const RobotAction& a_r) {
    const std::size_t na = model.alpha_count();
    const std::size_t nc = model.compliance_count();
    if (b.alpha_count() != na || b.compliance_count() != nc)
        throw DomainError("belief grid does not match the model");

    std::vector<double> weighted(b.size());
    for (std::size_t y = 0; y < b.size(); ++y) weighted[y] = likelihood[y] * b[y];

    std::vector<double> out;
    if (a_r.kind == RobotAction::Kind::state_conveying) {
        const auto& ta = model.t_alpha();
        const auto& tc = model.t_compliance();
        out.assign(b.size(), 0.0);
        for (std::size_t ia = 0; ia < na; ++ia)
            for (std::size_t ic = 0; ic < nc; ++ic) {
                const double w = weighted[ia * nc + ic];
                if (w == 0.0) continue;
                for (std::size_t ja = 0; ja < na; ++ja) {
                    const double pa = ta(ia, ja);
                    if (pa == 0.0) continue;
                    for (std::size_t jc = 0; jc < nc; ++jc)
                        out[ja * nc + jc] += w * pa * tc(ic, jc);
                }
            }
    } else {
        out = std::move(weighted);
    }

    double total = 0.0;
    for (double p : out) total += p;
    if (!(total > 0.0))
        throw InconsistentObservation("observed transition has zero probability under the belief");
    for (double& p : out) p /= total;
    return Belief(na, nc, std::move(out));
}

namespace {

void require_kind(const RobotAction& a_r, bool allow_command, bool allow_conveying,
                  const char* update) {
    using Kind = RobotAction::Kind;
    if ((a_r.kind == Kind::verbal_command && !allow_command) ||
        (a_r.kind == Kind::state_conveying && !allow_conveying))
        throw DomainError(std::string(update) + " does not accept action " + to_string(a_r));
}

}  // namespace

Belief update_baseline(const MomdpModel& model, const Belief& b, const ObservableState& x,
                       const RobotAction& a_r, const ObservableState& x_next) {
    require_kind(a_r, false, false, "update_baseline");
    const auto lik = observation_likelihood(model, x, a_r, x_next, false);
    return posterior(model, b, lik, a_r);
}

Belief update_compliance(const MomdpModel& model, const Belief& b, const ObservableState& x,
                         const RobotAction& a_r, const ObservableState& x_next) {
    require_kind(a_r, true, false, "update_compliance");
    const auto lik = observation_likelihood(model, x, a_r, x_next, true);
    return posterior(model, b, lik, a_r);
}

Belief update_state_conveying(const MomdpModel& model, const Belief& b,
                              const ObservableState& x, const RobotAction& a_r,
                              const ObservableState& x_next) {
    require_kind(a_r, false, true, "update_state_conveying");
    const auto lik = observation_likelihood(model, x, a_r, x_next, false);
    return posterior(model, b, lik, a_r);
}

Belief update_belief(const MomdpModel& model, const Belief& b, const ObservableState& x,
                     const RobotAction& a_r, const ObservableState& x_next) {
    switch (model.variant()) {
        case Variant::baseline: return update_baseline(model, b, x, a_r, x_next);
        case Variant::compliance: return update_compliance(model, b, x, a_r, x_next);
        case Variant::state_conveying: return update_state_conveying(model, b, x, a_r, x_next);
    }
    throw DomainError("unknown variant");
}

}  // namespace mutadapt
