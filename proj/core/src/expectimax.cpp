#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "mutadapt/errors.hpp"
#include "mutadapt/solver.hpp"
#include "tabular.hpp"

namespace mutadapt {
namespace {

// Depth-first expectimax with memoization and branch-and-bound. The bound is
// a finite-horizon fast informed bound, which can only overestimate the value
// under uncertainty.
class Expectimax {
public:
    Expectimax(const MomdpModel& model, int horizon) : tab_(model), horizon_(horizon) {
        const std::size_t S = tab_.state_count(), A = tab_.action_count(), Y = tab_.latent_count();
        q_bound_.assign(static_cast<std::size_t>(horizon + 1), std::vector<double>(S * A * Y, 0.0));
        // Fast informed bound: the robot may pick its next action knowing the
        // pre-transition latent state, but not the post-transition one.
        for (int h = 1; h <= horizon; ++h) {
            const auto& prev = q_bound_[static_cast<std::size_t>(h - 1)];
            auto& q = q_bound_[static_cast<std::size_t>(h)];
            for (std::size_t s = 0; s < S; ++s) {
                if (tab_.terminal(s)) continue;
                for (std::size_t a = 0; a < A; ++a)
                    for (std::size_t y = 0; y < Y; ++y) {
                        double acc = 0.0;
                        for (std::size_t m = 0; m < kNumModes; ++m) {
                            const double p = tab_.human(s, a, y, m);
                            if (p == 0.0) continue;
                            const std::size_t n = tab_.next(s, a, m);
                            double future = 0.0;
                            if (!tab_.terminal(n)) {
                                future = -std::numeric_limits<double>::infinity();
                                for (std::size_t an = 0; an < A; ++an) {
                                    double e = 0.0;
                                    for (std::size_t yn = 0; yn < Y; ++yn) {
                                        const double t = tab_.latent_transition(a, y, yn);
                                        if (t != 0.0) e += t * prev[(n * A + an) * Y + yn];
                                    }
                                    future = std::max(future, e);
                                }
                            }
                            acc += p * tab_.gamma() * (tab_.reward(s, a, m) + future);
                        }
                        q[(s * A + a) * Y + y] = acc;
                    }
            }
        }
    }

    ExpectimaxResult run(std::size_t s, const Belief& b) {
        ExpectimaxResult result;
        std::optional<std::size_t> action;
        result.value = value(s, b, horizon_, &action);
        if (action) result.action = tab_.action(*action);
        result.nodes = nodes_;
        return result;
    }

private:
    double bound(std::size_t s, const Belief& b, int h, std::size_t a) const {
        const std::size_t A = tab_.action_count(), Y = tab_.latent_count();
        const auto& q = q_bound_[static_cast<std::size_t>(h)];
        double acc = 0.0;
        for (std::size_t y = 0; y < Y; ++y) acc += b[y] * q[(s * A + a) * Y + y];
        return acc;
    }

    double value(std::size_t s, const Belief& b, int h, std::optional<std::size_t>* best_action) {
        if (h == 0 || tab_.terminal(s)) return 0.0;
        std::string key;
        if (!best_action) {
            key = detail::belief_key(s, b, h);
            if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        }
        ++nodes_;
        // Most promising actions first so the bound prunes the rest.
        const std::size_t A = tab_.action_count();
        std::vector<std::pair<double, std::size_t>> order;
        for (std::size_t a = 0; a < A; ++a) order.emplace_back(bound(s, b, h, a), a);
        std::sort(order.begin(), order.end(), [](const auto& l, const auto& r) {
            return l.first != r.first ? l.first > r.first : l.second < r.second;
        });
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_a = 0;
        std::vector<detail::Outcome> outcomes;
        for (const auto& [ub, a] : order) {
            if (std::isfinite(best) && ub < best - 1e-12 * std::abs(best)) break;
            tab_.expand(s, b, a, outcomes);
            const auto local = outcomes;
            double q = 0.0;
            for (const auto& o : local)
                q += o.probability * tab_.gamma() * (o.reward + value(o.next, o.posterior, h - 1, nullptr));
            const double tol = 1e-12 * std::abs(best);
            if (!std::isfinite(best) || q > best + tol || (q >= best - tol && a < best_a)) {
                best = std::max(best, q);
                best_a = a;
            }
        }
        if (best_action) *best_action = best_a;
        else memo_.emplace(std::move(key), best);
        return best;
    }

    detail::Tabular tab_;
    int horizon_;
    std::vector<std::vector<double>> q_bound_;
    std::unordered_map<std::string, double> memo_;
    std::size_t nodes_ = 0;
};

}  // namespace

ExpectimaxResult expectimax(const MomdpModel& model, const ObservableState& x, const Belief& b,
                            int horizon) {
    if (horizon < 0) throw DomainError("horizon must be nonnegative");
    if (horizon == 0 || x.terminal()) return {};
    Expectimax search(model, horizon);
    return search.run(model.state_index(x), b);
}

}  // namespace mutadapt
