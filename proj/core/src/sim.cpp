#include "mutadapt/sim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "mutadapt/errors.hpp"
#include "mutadapt/random.hpp"

namespace mutadapt {

RobotController policy_controller(const Policy& policy) {
    return [&policy](const ObservableState& x, const Belief& b, std::size_t) {
        return best_action(policy, x, b);
    };
}

RobotController opposing_controller() {
    return [](const ObservableState& x, const Belief&, std::size_t) {
        const Mode own = x.last_human_mode();
        return RobotAction::task(own == kGoal1 ? kGoal2 : kGoal1);
    };
}

RobotController fixed_mode_controller(Mode mode, bool open_with_conveying) {
    return [mode, open_with_conveying](const ObservableState&, const Belief&, std::size_t step) {
        if (open_with_conveying && step == 0) return RobotAction::conveying();
        return RobotAction::task(mode);
    };
}

namespace {

std::size_t grid_index(const std::vector<double>& grid, double v) {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i] - v) < 1e-9) return i;
    throw DomainError("value " + std::to_string(v) + " is not on the latent grid");
}

}  // namespace

InteractionTrace run_episode(const MomdpModel& model, const RobotController& robot,
                             const SimulatedHuman& human, const EpisodeOptions& options) {
    Rng rng(options.seed);
    InteractionTrace trace;
    trace.episode_id = options.episode_id.empty() ? "sim-" + std::to_string(options.seed) : options.episode_id;
    trace.variant = model.variant();
    trace.seed = options.seed;
    trace.model_hash = model.hash();
    trace.gamma = model.gamma();
    trace.user_id = options.user_id;
    trace.round = options.round;
    trace.human = human.params;
    trace.initial_state = model.initial_state(human.params.current_mode);
    trace.initial_belief = options.initial_belief.value_or(model.prior());

    const auto& alpha_grid = model.config().alpha_grid;
    const auto& c_grid = model.config().compliance_grid;
    const LatentTransition& alpha_response = human.alpha_response ? *human.alpha_response : model.t_alpha();
    const LatentTransition& c_response =
        human.compliance_response ? *human.compliance_response : model.t_compliance();

    HumanParams params = human.params;
    ObservableState x = trace.initial_state;
    Belief b = trace.initial_belief;
    for (std::size_t t = 0; t < options.max_steps && !x.terminal(); ++t) {
        const RobotAction a_r = robot(x, b, t);
        auto [a_h, updated] = sample_human_action(x, a_r, params, rng);
        params = updated;
        if (a_r.kind == RobotAction::Kind::state_conveying) {
            // The utterance shifts the latent state after this step's action.
            params.alpha = alpha_grid[sample_index(alpha_response.row(grid_index(alpha_grid, params.alpha)), rng)];
            params.compliance = c_grid[sample_index(c_response.row(grid_index(c_grid, params.compliance)), rng)];
        }
        const ObservableState next = world_transition(model, x, a_r, a_h);
        TraceStep step;
        step.index = t;
        step.before = x;
        step.robot_action = a_r;
        step.human_action = a_h;
        step.after = next;
        step.reward = reward(model, x, a_r, a_h, next);
        step.disagreement = a_r.kind == RobotAction::Kind::task && a_r.mode != a_h.mode;
        b = update_belief(model, b, x, a_r, next);
        step.belief = b;
        trace.steps.push_back(std::move(step));
        x = next;
    }
    trace.outcome = summarize(trace, !x.terminal());
    return trace;
}

InteractionTrace run_episode(const Policy& policy, const MomdpModel& model,
                             const SimulatedHuman& human, const EpisodeOptions& options) {
    if (policy.metadata().variant != model.variant())
        throw ValidationError("policy variant does not match the model");
    if (policy.metadata().model_hash != model.hash())
        throw ValidationError("policy was solved for a different model");
    return run_episode(model, policy_controller(policy), human, options);
}

bool adaptation_metric(const InteractionTrace& trace) {
    if (!trace.outcome || trace.outcome->timed_out) return false;
    return trace.outcome->goal == Goal::goal1;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

PopulationStats run_population(const Policy& policy, const MomdpModel& model, const Belief& prior,
                               const PopulationOptions& options) {
    if (options.users == 0) throw DomainError("population needs at least one user");
    prior.validate();
    struct Result {
        bool adapted = false;
        bool timed_out = false;
        double ret = 0.0;
        std::size_t verbal = 0;
    };
    std::vector<Result> results(options.users);
    const auto run_one = [&](std::size_t i) {
        const std::uint64_t user_seed = splitmix64(options.seed ^ splitmix64(i + 1));
        Rng rng(user_seed);
        const std::size_t y = sample_index(prior.table(), rng);
        SimulatedHuman human;
        human.params = HumanParams{model.alpha_value(y), model.compliance_value(y),
                                   model.config().initial_human_mode};
        EpisodeOptions eo;
        eo.seed = rng.next();
        eo.max_steps = options.max_steps;
        const auto trace = run_episode(policy, model, human, eo);
        results[i] = {adaptation_metric(trace), trace.outcome->timed_out,
                      trace.outcome->discounted_return, trace.outcome->verbal_actions};
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, options.users));
    if (threads == 1) {
        for (std::size_t i = 0; i < options.users; ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < options.users; i += threads) run_one(i);
            });
        for (auto& t : pool) t.join();
    }

    PopulationStats stats;
    stats.variant = model.variant();
    stats.label = std::string(to_string(model.variant()));
    stats.users = options.users;
    stats.seed = options.seed;
    double ret = 0.0, verbal = 0.0;
    for (const auto& r : results) {
        stats.adapted += r.adapted;
        stats.timed_out += r.timed_out;
        ret += r.ret;
        verbal += static_cast<double>(r.verbal);
    }
    const double n = static_cast<double>(options.users);
    stats.adaptation_rate = static_cast<double>(stats.adapted) / n;
    std::tie(stats.ci_low, stats.ci_high) = wilson_interval(stats.adapted, options.users);
    stats.mean_return = ret / n;
    stats.mean_verbal_actions = verbal / n;
    return stats;
}

void write_population_csv(std::ostream& out, const std::vector<PopulationStats>& rows) {
    out << "label,variant,users,adapted,adaptation_rate,ci_low,ci_high,mean_return,mean_verbal_actions,"
           "timed_out,seed\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%zu,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%zu,%llu\n", r.label.c_str(),
                      std::string(to_string(r.variant)).c_str(), r.users, r.adapted, r.adaptation_rate,
                      r.ci_low, r.ci_high, r.mean_return, r.mean_verbal_actions, r.timed_out,
                      static_cast<unsigned long long>(r.seed));
        out << buf;
    }
}

}  // namespace mutadapt
