#include "mutadapt/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_set>

#include "mutadapt/errors.hpp"
#include "mutadapt/random.hpp"
#include "tabular.hpp"

namespace mutadapt {

double AlphaVector::dot(const Belief& b) const {
    double v = 0.0;
    for (std::size_t y = 0; y < values.size(); ++y) v += values[y] * b[y];
    return v;
}

const std::vector<AlphaVector>& Policy::vectors_at(const ObservableState& x) const {
    auto it = vectors_.find(x);
    if (it == vectors_.end()) throw DomainError("policy does not cover the observable state");
    return it->second;
}

bool Policy::covers(const ObservableState& x) const { return vectors_.count(x) != 0; }

double Policy::value(const ObservableState& x, const Belief& b) const {
    if (x.terminal()) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vectors_at(x)) best = std::max(best, v.dot(b));
    return best;
}

namespace {

bool strictly_better(double candidate, double incumbent) {
    if (!std::isfinite(incumbent)) return candidate > incumbent;
    return candidate > incumbent + 1e-12 * std::abs(incumbent);
}

}  // namespace

RobotAction best_action(const Policy& policy, const ObservableState& x, const Belief& b) {
    const auto& vs = policy.vectors_at(x);
    if (vs.empty()) throw DomainError("policy has no vectors at the observable state");
    // Best value first, then the lowest-ordered action among near-ties.
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vs) best = std::max(best, v.dot(b));
    std::optional<RobotAction> chosen;
    for (const auto& v : vs) {
        if (strictly_better(best, v.dot(b))) continue;
        if (!chosen || v.action < *chosen) chosen = v.action;
    }
    return *chosen;
}

int effective_horizon(const MomdpModel& model, double bound) {
    const auto& r = model.rewards();
    const double scale = std::max({std::abs(r.optimal), std::abs(r.suboptimal),
                                   std::abs(r.other), std::abs(r.other - r.verbal_cost)});
    if (scale == 0.0 || model.gamma() == 0.0) return 1;
    int h = 0;
    double g = 1.0;
    while (g * scale >= bound) {
        g *= model.gamma();
        ++h;
    }
    return h;
}

namespace detail {
namespace {

struct Vec {
    std::vector<double> values;
    std::size_t action = 0;
};

double dot(const std::vector<double>& v, const Belief& b) {
    double acc = 0.0;
    for (std::size_t y = 0; y < v.size(); ++y) acc += v[y] * b[y];
    return acc;
}

/// Bellman backup at (s, b). `successor` returns the vector set for a
/// non-terminal successor state.
template <typename Lookup>
Vec backup_vector(const Tabular& tab, std::size_t s, const Belief& b, Lookup&& successor) {
    const std::size_t Y = tab.latent_count();
    Vec best;
    best.values.assign(Y, 0.0);
    if (tab.terminal(s)) return best;

    double best_value = -std::numeric_limits<double>::infinity();
    std::vector<Outcome> outcomes;
    for (std::size_t a = 0; a < tab.action_count(); ++a) {
        std::vector<double> g(Y, 0.0);
        tab.expand(s, b, a, outcomes);
        for (std::size_t m = 0; m < kNumModes; ++m) {
            const std::size_t next = tab.next(s, a, m);
            std::vector<double> future(Y, 0.0);
            if (!tab.terminal(next)) {
                const std::vector<Vec>& set = successor(next);
                if (set.empty()) throw DomainError("no vectors cover a successor state");
                const Outcome* hit = nullptr;
                for (const auto& o : outcomes)
                    if (o.mode == m) hit = &o;
                const Vec* arg = &set.front();
                double arg_value = -std::numeric_limits<double>::infinity();
                for (const auto& v : set) {
                    double val;
                    if (hit) {
                        val = dot(v.values, hit->posterior);
                    } else {
                        // Outcome impossible under b; any vector keeps the bound valid.
                        val = 0.0;
                        for (std::size_t y = 0; y < Y; ++y) val += tab.human(s, a, y, m) * v.values[y];
                    }
                    if (val > arg_value) {
                        arg_value = val;
                        arg = &v;
                    }
                }
                future = tab.pull_back(a, arg->values);
            }
            const double r = tab.reward(s, a, m);
            for (std::size_t y = 0; y < Y; ++y) {
                const double p = tab.human(s, a, y, m);
                if (p != 0.0) g[y] += p * tab.gamma() * (r + future[y]);
            }
        }
        const double value = dot(g, b);
        if (strictly_better(value, best_value)) {
            best_value = value;
            best.values = std::move(g);
            best.action = a;
        }
    }
    return best;
}

struct UbPoint {
    Belief belief;
    double value = 0.0;
    double corner_value = 0.0;
};

class PointSolver {
public:
    PointSolver(const MomdpModel& model, const SolveOptions& options)
        : tab_(model), options_(options), Y_(model.latent_count()) {
        lower_.resize(tab_.state_count());
        corner_.assign(tab_.state_count(), std::vector<double>(Y_, 0.0));
        upper_.resize(tab_.state_count());
        init_upper();
        init_lower();
        start_ = std::chrono::steady_clock::now();
    }

    SolveResult run(std::size_t root, const Belief& prior) {
        SolveStats stats;
        seed_points(root, prior, stats);
        while (gap(root, prior) > options_.epsilon && !out_of_time()) {
            explore(root, prior, 0, stats);
            ++stats.trials;
        }
        refine(root, prior, stats);
        stats.lower_bound = lower_value(root, prior);
        stats.upper_bound = upper_value(root, prior);
        stats.converged = stats.upper_bound - stats.lower_bound <= options_.epsilon;

        std::map<ObservableState, std::vector<AlphaVector>> vectors;
        const auto& model = tab_.model();
        for (std::size_t s = 0; s < tab_.state_count(); ++s) {
            auto& out = vectors[model.states()[s]];
            if (tab_.terminal(s)) {
                // Goal states end the episode; a zero vector keeps the file total.
                out.push_back({std::vector<double>(Y_, 0.0), model.actions().front()});
                continue;
            }
            for (const auto& v : lower_[s]) out.push_back({v.values, tab_.action(v.action)});
            stats.vectors += lower_[s].size();
        }
        PolicyMetadata meta{model.variant(), model.hash(), options_.epsilon, options_.max_depth,
                            options_.seed};
        return {Policy(std::move(meta), std::move(vectors)), stats};
    }

private:
    bool out_of_time() const {
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
        return elapsed.count() > options_.max_time_seconds;
    }

    // Fully observable latent state: an upper bound on every belief.
    void init_upper() {
        const std::size_t S = tab_.state_count();
        for (int iter = 0; iter < 100000; ++iter) {
            double delta = 0.0;
            for (std::size_t s = 0; s < S; ++s) {
                if (tab_.terminal(s)) continue;
                for (std::size_t y = 0; y < Y_; ++y) {
                    double best = -std::numeric_limits<double>::infinity();
                    for (std::size_t a = 0; a < tab_.action_count(); ++a) {
                        double q = 0.0;
                        for (std::size_t m = 0; m < kNumModes; ++m) {
                            const double p = tab_.human(s, a, y, m);
                            if (p == 0.0) continue;
                            const std::size_t n = tab_.next(s, a, m);
                            double future = 0.0;
                            for (std::size_t yn = 0; yn < Y_; ++yn) {
                                const double t = tab_.latent_transition(a, y, yn);
                                if (t != 0.0) future += t * corner_[n][yn];
                            }
                            q += p * tab_.gamma() * (tab_.reward(s, a, m) + future);
                        }
                        best = std::max(best, q);
                    }
                    delta = std::max(delta, std::abs(best - corner_[s][y]));
                    corner_[s][y] = best;
                }
            }
            if (delta < 1e-12) break;
        }
    }

    // Values of the blind policies that always push one direction.
    void init_lower() {
        const std::size_t S = tab_.state_count();
        for (std::size_t a = 0; a < tab_.action_count(); ++a) {
            if (tab_.action(a).kind != RobotAction::Kind::task) continue;
            std::vector<std::vector<double>> v(S, std::vector<double>(Y_, 0.0));
            for (int iter = 0; iter < 100000; ++iter) {
                double delta = 0.0;
                for (std::size_t s = 0; s < S; ++s) {
                    if (tab_.terminal(s)) continue;
                    for (std::size_t y = 0; y < Y_; ++y) {
                        double q = 0.0;
                        for (std::size_t m = 0; m < kNumModes; ++m) {
                            const double p = tab_.human(s, a, y, m);
                            if (p == 0.0) continue;
                            const std::size_t n = tab_.next(s, a, m);
                            q += p * tab_.gamma() * (tab_.reward(s, a, m) + v[n][y]);
                        }
                        delta = std::max(delta, std::abs(q - v[s][y]));
                        v[s][y] = q;
                    }
                }
                if (delta < 1e-12) break;
            }
            for (std::size_t s = 0; s < S; ++s)
                if (!tab_.terminal(s)) add_lower(s, Vec{v[s], a});
        }
    }

    double lower_value(std::size_t s, const Belief& b) const {
        if (tab_.terminal(s)) return 0.0;
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& v : lower_[s]) best = std::max(best, dot(v.values, b));
        return best;
    }

    double upper_value(std::size_t s, const Belief& b) const {
        if (tab_.terminal(s)) return 0.0;
        const double corner = dot(corner_[s], b);
        double best = corner;
        for (const auto& pt : upper_[s]) {
            double ratio = std::numeric_limits<double>::infinity();
            for (std::size_t y = 0; y < Y_; ++y)
                if (pt.belief[y] > 0.0) ratio = std::min(ratio, b[y] / pt.belief[y]);
            best = std::min(best, corner + ratio * (pt.value - pt.corner_value));
        }
        return best;
    }

    double gap(std::size_t s, const Belief& b) const { return upper_value(s, b) - lower_value(s, b); }

    double upper_q(std::size_t s, const Belief& b, std::size_t a,
                   std::vector<Outcome>& outcomes) const {
        tab_.expand(s, b, a, outcomes);
        double q = 0.0;
        for (const auto& o : outcomes)
            q += o.probability * tab_.gamma() * (o.reward + upper_value(o.next, o.posterior));
        return q;
    }

    void add_lower(std::size_t s, Vec v) {
        auto& set = lower_[s];
        const auto dominates = [](const std::vector<double>& a, const std::vector<double>& b) {
            for (std::size_t y = 0; y < a.size(); ++y)
                if (a[y] < b[y] - 1e-12) return false;
            return true;
        };
        for (const auto& w : set)
            if (dominates(w.values, v.values)) return;
        std::erase_if(set, [&](const Vec& w) { return dominates(v.values, w.values); });
        set.push_back(std::move(v));
    }

    /// Backs up both bounds at (s, b); returns the lower-bound improvement.
    double update(std::size_t s, const Belief& b, SolveStats& stats) {
        if (tab_.terminal(s)) return 0.0;
        ++stats.backups;
        const double before = lower_value(s, b);
        Vec v = backup_vector(tab_, s, b, [this](std::size_t n) -> const std::vector<Vec>& {
            return lower_[n];
        });
        const double after = dot(v.values, b);
        if (after > before + 1e-13) add_lower(s, std::move(v));

        std::vector<Outcome> outcomes;
        double ub = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < tab_.action_count(); ++a) ub = std::max(ub, upper_q(s, b, a, outcomes));
        if (ub < upper_value(s, b) - 1e-13) {
            std::size_t support = 0, cell = 0;
            for (std::size_t y = 0; y < Y_; ++y)
                if (b[y] > 0.0) {
                    ++support;
                    cell = y;
                }
            if (support == 1) {
                corner_[s][cell] = std::min(corner_[s][cell], ub);
                for (auto& pt : upper_[s]) pt.corner_value = dot(corner_[s], pt.belief);
            } else {
                upper_[s].push_back({b, ub, dot(corner_[s], b)});
            }
        }
        return std::max(0.0, after - before);
    }

    void explore(std::size_t s, const Belief& b, std::size_t depth, SolveStats& stats) {
        if (tab_.terminal(s) || depth >= options_.max_depth || out_of_time()) return;
        const double threshold = options_.epsilon * std::pow(tab_.gamma(), -static_cast<double>(depth));
        if (gap(s, b) <= threshold) return;

        std::vector<Outcome> outcomes;
        std::size_t best_a = 0;
        double best_q = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < tab_.action_count(); ++a) {
            const double q = upper_q(s, b, a, outcomes);
            if (strictly_better(q, best_q)) {
                best_q = q;
                best_a = a;
            }
        }
        tab_.expand(s, b, best_a, outcomes);
        const double next_threshold = threshold / tab_.gamma();
        const Outcome* pick = nullptr;
        double pick_score = -std::numeric_limits<double>::infinity();
        for (const auto& o : outcomes) {
            const double score = o.probability * (gap(o.next, o.posterior) - next_threshold);
            if (score > pick_score) {
                pick_score = score;
                pick = &o;
            }
        }
        if (pick && pick_score > 0.0) {
            const Outcome chosen = *pick;
            explore(chosen.next, chosen.posterior, depth + 1, stats);
        }
        update(s, b, stats);
    }

    // Seeded random rollouts from the prior, backed up deepest first.
    void seed_points(std::size_t root, const Belief& prior, SolveStats& stats) {
        Rng rng(options_.seed);
        std::vector<Outcome> outcomes;
        for (std::size_t r = 0; r < options_.sample_rollouts; ++r) {
            std::vector<std::pair<std::size_t, Belief>> path;
            std::size_t s = root;
            Belief b = prior;
            for (std::size_t d = 0; d < options_.max_depth && !tab_.terminal(s); ++d) {
                path.emplace_back(s, b);
                const std::size_t a = static_cast<std::size_t>(rng.next() % tab_.action_count());
                tab_.expand(s, b, a, outcomes);
                std::vector<double> probs;
                for (const auto& o : outcomes) probs.push_back(o.probability);
                const auto& o = outcomes[sample_index(probs, rng)];
                s = o.next;
                b = o.posterior;
            }
            for (auto it = path.rbegin(); it != path.rend(); ++it) update(it->first, it->second, stats);
        }
    }

    // Sweeps over every belief the greedy policy can reach, until stable.
    void refine(std::size_t root, const Belief& prior, SolveStats& stats) {
        constexpr std::size_t kMaxPoints = 50000;
        std::vector<Outcome> outcomes;
        for (std::size_t sweep = 0; sweep < 100 && !out_of_time(); ++sweep) {
            std::vector<std::pair<std::size_t, Belief>> order;
            std::unordered_set<std::string> seen;
            std::deque<std::tuple<std::size_t, Belief, std::size_t>> queue;
            queue.emplace_back(root, prior, 0);
            seen.insert(belief_key(root, prior));
            while (!queue.empty() && order.size() < kMaxPoints) {
                auto [s, b, depth] = std::move(queue.front());
                queue.pop_front();
                if (tab_.terminal(s)) continue;
                order.emplace_back(s, b);
                if (depth + 1 >= options_.max_depth) continue;
                const std::size_t a = greedy_action(s, b);
                tab_.expand(s, b, a, outcomes);
                for (auto& o : outcomes) {
                    if (o.probability < 1e-12 || tab_.terminal(o.next)) continue;
                    if (seen.insert(belief_key(o.next, o.posterior)).second)
                        queue.emplace_back(o.next, std::move(o.posterior), depth + 1);
                }
            }
            double improvement = 0.0;
            for (auto it = order.rbegin(); it != order.rend(); ++it)
                improvement = std::max(improvement, update(it->first, it->second, stats));
            ++stats.refinement_sweeps;
            if (improvement < 1e-10) break;
        }
    }

    std::size_t greedy_action(std::size_t s, const Belief& b) const {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& v : lower_[s]) best = std::max(best, dot(v.values, b));
        std::size_t chosen = std::numeric_limits<std::size_t>::max();
        for (const auto& v : lower_[s]) {
            if (strictly_better(best, dot(v.values, b))) continue;
            chosen = std::min(chosen, v.action);
        }
        return chosen;
    }

    Tabular tab_;
    SolveOptions options_;
    std::size_t Y_;
    std::vector<std::vector<Vec>> lower_;
    std::vector<std::vector<double>> corner_;
    std::vector<std::vector<UbPoint>> upper_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace
}  // namespace detail

SolveResult solve(const MomdpModel& model, const Belief& prior, const SolveOptions& options) {
    return solve(model, model.initial_state(), prior, options);
}

SolveResult solve(const MomdpModel& model, const ObservableState& start, const Belief& prior,
                  const SolveOptions& options) {
    if (!(options.epsilon > 0.0)) throw DomainError("epsilon must be positive");
    if (prior.alpha_count() != model.alpha_count() ||
        prior.compliance_count() != model.compliance_count())
        throw ValidationError("prior does not match the latent grid");
    prior.validate();
    model.t_alpha().validate(model.alpha_count());
    model.t_compliance().validate(model.compliance_count());
    detail::PointSolver solver(model, options);
    return solver.run(model.state_index(start), prior);
}

AlphaVector backup(const MomdpModel& model, const ObservableState& x, const Belief& b,
                   const std::map<ObservableState, std::vector<AlphaVector>>& vectors) {
    const detail::Tabular tab(model);
    std::map<std::size_t, std::vector<detail::Vec>> converted;
    const auto lookup = [&](std::size_t n) -> const std::vector<detail::Vec>& {
        auto it = converted.find(n);
        if (it != converted.end()) return it->second;
        auto src = vectors.find(model.states()[n]);
        if (src == vectors.end()) throw DomainError("no vectors cover a successor state");
        auto& out = converted[n];
        for (const auto& v : src->second) out.push_back({v.values, model.action_index(v.action)});
        return out;
    };
    const auto v = detail::backup_vector(tab, model.state_index(x), b, lookup);
    return {v.values, x.terminal() ? model.actions().front() : tab.action(v.action)};
}

}  // namespace mutadapt
