// mutadapt: solve, simulate, experiment, learn, replay and serve.
//
// Exit codes: 0 success, 1 usage, 2 validation, 3 runtime.

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mutadapt/config.hpp"
#include "mutadapt/errors.hpp"
#include "mutadapt/learning.hpp"
#include "mutadapt/policy_io.hpp"
#include "mutadapt/service.hpp"
#include "mutadapt/sim.hpp"
#include "mutadapt/solver.hpp"

namespace {

using namespace mutadapt;

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt(v[i], 4);
    return out;
}

double grid_value(const std::vector<double>& grid, double v, const char* name) {
    for (double g : grid)
        if (std::abs(g - v) < 1e-9) return g;
    throw UsageError(std::string(name) + " must be one of the latent grid values");
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
    std::string config;
    std::string variant;
    std::string out;
    double epsilon = 0.01;
    double max_time = 60.0;
    std::uint64_t seed = 0;
};

int run_solve(const SolveArgs& a) {
    if (!(a.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
    if (!(a.max_time > 0.0)) throw UsageError("--max-time must be positive");
    ModelConfig config = load_model_config(a.config);
    if (!a.variant.empty()) config.variant = parse_variant(a.variant);
    const MomdpModel model(config);

    SolveOptions options;
    options.epsilon = a.epsilon;
    options.max_time_seconds = a.max_time;
    options.seed = a.seed;
    const SolveResult result = solve(model, model.prior(), options);
    save_policy(a.out, result.policy, model);

    const auto& s = result.stats;
    std::size_t covered = 0;
    for (const auto& x : model.states())
        if (result.policy.covers(x)) ++covered;
    std::cout << "variant        " << to_string(model.variant()) << '\n'
              << "model_hash     " << model.hash() << '\n'
              << "seed           " << a.seed << '\n'
              << "states         " << model.states().size() << " (" << covered << " covered)\n"
              << "value          " << fmt(result.policy.value(model.initial_state(), model.prior())) << '\n'
              << "lower_bound    " << fmt(s.lower_bound) << '\n'
              << "upper_bound    " << fmt(s.upper_bound) << '\n'
              << "gap            " << fmt(std::max(0.0, s.upper_bound - s.lower_bound)) << '\n'
              << "converged      " << (s.converged ? "yes" : "no") << '\n'
              << "trials         " << s.trials << '\n'
              << "backups        " << s.backups << '\n'
              << "vectors        " << s.vectors << '\n'
              << "policy         " << a.out << '\n';
    if (!s.converged) std::cerr << "warning: gap above epsilon when the time limit was reached\n";
    return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string policy;
    double alpha = 1.0;
    double compliance = 1.0;
    std::uint64_t seed = 0;
    std::string trace_out;
    std::string initial_mode = "goal2";
    std::size_t max_steps = 20;
    std::optional<double> conveyed_alpha;
    std::string user_id;
    int round = 1;
    bool steps_table = false;
};

void print_steps_table(std::ostream& out, const MomdpModel& model, const InteractionTrace& t) {
    out << "step  theta  robot           human  disagree  E[alpha]  E[c]\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%4s  %5d\n", "-", t.initial_state.world.orientation);
    out << buf;
    for (const auto& s : t.steps) {
        std::snprintf(buf, sizeof buf, "%4zu  %5d  %-14s  %-5s  %-8s  %8.4f  %6.4f\n", s.index, s.after.world.orientation,
                      to_string(s.robot_action).c_str(), std::string(to_string(s.human_action.mode)).c_str(),
                      s.disagreement ? "yes" : "no", mean_alpha(model, s.belief), mean_compliance(model, s.belief));
        out << buf;
    }
}

int run_simulate(const SimulateArgs& a) {
    if (a.max_steps == 0) throw UsageError("--max-steps must be at least 1");
    const LoadedPolicy loaded = load_policy(a.policy);
    const MomdpModel& model = loaded.model;
    SimulatedHuman human;
    human.params.alpha = grid_value(model.config().alpha_grid, a.alpha, "--alpha");
    human.params.compliance = grid_value(model.config().compliance_grid, a.compliance, "--c");
    human.params.current_mode = parse_mode(a.initial_mode);
    if (a.conveyed_alpha) {
        const double target = grid_value(model.config().alpha_grid, *a.conveyed_alpha, "--conveyed-alpha");
        const std::size_t n = model.alpha_count();
        std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (model.config().alpha_grid[j] == target) rows[i][j] = 1.0;
        human.alpha_response = LatentTransition(std::move(rows));
    }
    EpisodeOptions options;
    options.seed = a.seed;
    options.max_steps = a.max_steps;
    options.user_id = a.user_id;
    options.round = a.round;
    const InteractionTrace trace = run_episode(loaded.policy, model, human, options);
    if (!a.trace_out.empty()) save_trace(a.trace_out, trace);

    const auto& o = *trace.outcome;
    std::string orientations = std::to_string(trace.initial_state.world.orientation);
    for (const auto& s : trace.steps) orientations += " " + std::to_string(s.after.world.orientation);
    std::cout << "variant          " << to_string(model.variant()) << '\n'
              << "seed             " << a.seed << '\n'
              << "human            alpha=" << fmt(human.params.alpha, 2) << " c=" << fmt(human.params.compliance, 2)
              << " mode=" << to_string(human.params.current_mode) << '\n'
              << "orientations     " << orientations << '\n'
              << "goal             " << to_string(o.goal) << '\n'
              << "adapted          " << (adaptation_metric(trace) ? "yes" : "no") << '\n'
              << "timed_out        " << (o.timed_out ? "yes" : "no") << '\n'
              << "steps            " << o.steps << '\n'
              << "verbal_actions   " << o.verbal_actions << '\n'
              << "return           " << fmt(o.discounted_return) << '\n';
    if (a.steps_table) print_steps_table(std::cout, model, trace);
    return 0;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
    std::vector<std::string> policies;
    std::string prior;
    std::size_t users = 1000;
    std::uint64_t seed = 0;
    std::string csv;
    std::size_t threads = 1;
    std::size_t max_steps = 20;
};

// "point:ALPHA,C" or a model config whose priors are used.
Belief experiment_prior(const std::string& arg, const MomdpModel& model) {
    if (arg.empty()) return model.prior();
    if (arg.rfind("point:", 0) == 0) {
        double alpha = 0, c = 0;
        char comma = 0;
        std::istringstream in(arg.substr(6));
        if (!(in >> alpha >> comma >> c) || comma != ',') throw UsageError("--prior point:ALPHA,C expected");
        const auto& ag = model.config().alpha_grid;
        const auto& cg = model.config().compliance_grid;
        const double av = grid_value(ag, alpha, "--prior alpha"), cv = grid_value(cg, c, "--prior c");
        std::size_t ai = 0, ci = 0;
        while (ag[ai] != av) ++ai;
        while (cg[ci] != cv) ++ci;
        return Belief::point(model.alpha_count(), model.compliance_count(), ai, ci);
    }
    ModelConfig config = load_model_config(arg);
    config.variant = model.variant();
    return MomdpModel(config).prior();
}

int run_experiment(const ExperimentArgs& a) {
    if (a.users == 0) throw UsageError("--n must be at least 1");
    if (a.threads == 0) throw UsageError("--threads must be at least 1");
    std::vector<PopulationStats> rows;
    for (const auto& path : a.policies) {
        const LoadedPolicy loaded = load_policy(path);
        PopulationOptions options;
        options.users = a.users;
        options.seed = a.seed;
        options.threads = a.threads;
        options.max_steps = a.max_steps;
        auto stats = run_population(loaded.policy, loaded.model, experiment_prior(a.prior, loaded.model), options);
        stats.label = std::filesystem::path(path).stem().string();
        rows.push_back(std::move(stats));
    }
    if (!a.csv.empty()) {
        std::ostringstream out;
        write_population_csv(out, rows);
        write_file(a.csv, out.str());
    }
    write_population_csv(std::cout, rows);
    return 0;
}

// ---------------------------------------------------------------- learn

struct LearnArgs {
    std::string traces;
    std::string mode = "priors";
    std::string out;
    std::string config;
    bool pool = false;
    double delta = 0.25;
};

int run_learn(const LearnArgs& a) {
    if (!(a.delta >= 0.0)) throw UsageError("--delta must be nonnegative");
    if (!std::filesystem::is_directory(a.traces))
        throw ValidationError("trace directory " + a.traces + " does not exist");
    ModelConfig config = a.config.empty() ? ModelConfig{} : load_model_config(a.config);
    const auto traces = load_trace_directory(a.traces);
    if (traces.empty()) throw ValidationError("no trace files in " + a.traces);

    if (a.mode == "priors") {
        const auto learned = learn_priors(traces, config.alpha_grid, config.compliance_grid, a.pool);
        if (!learned.alpha_prior.empty()) config.alpha_prior = learned.alpha_prior;
        if (!learned.compliance_prior.empty()) config.compliance_prior = learned.compliance_prior;
        std::cout << "traces                " << traces.size() << '\n'
                  << "alpha_estimates       " << learned.alpha_estimates.size() << '\n'
                  << "compliance_estimates  " << learned.compliance_estimates.size() << '\n'
                  << "alpha_prior           " << join(config.alpha_prior) << '\n'
                  << "compliance_prior      " << join(config.compliance_prior) << '\n';
    } else if (a.mode == "talpha") {
        const auto pairs = adaptability_pairs(traces, config.alpha_grid);
        config.t_alpha = estimate_transition_alpha(pairs, config.alpha_grid, a.delta);
        std::cout << "traces   " << traces.size() << '\n' << "users    " << pairs.size() << '\n' << "t_alpha\n";
        for (const auto& row : config.t_alpha->rows()) std::cout << "  " << join(row) << '\n';
    } else {
        throw UsageError("--mode must be priors or talpha");
    }
    write_file(a.out, dump_model_config(config) + "\n");
    return 0;
}

// ---------------------------------------------------------------- replay

struct ReplayArgs {
    std::string trace;
    std::string policy;
    std::string config;
};

int run_replay(const ReplayArgs& a) {
    if (a.policy.empty() == a.config.empty()) throw UsageError("give exactly one of --policy or --config");
    const InteractionTrace trace = load_trace(a.trace);
    std::optional<MomdpModel> model;
    if (!a.policy.empty()) {
        model.emplace(load_policy(a.policy).model);
    } else {
        ModelConfig config = load_model_config(a.config);
        config.variant = trace.variant;
        model.emplace(config);
    }
    const ReplayReport report = verify_replay(*model, trace);
    std::cout << "steps        " << trace.steps.size() << '\n'
              << "consistent   " << (report.consistent ? "yes" : "no") << '\n';
    for (const auto& p : report.problems) std::cout << "  " << p << '\n';
    return report.consistent ? 0 : kExitValidation;
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
    std::string policies;
    std::string data = "data";
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t max_steps = 20;
};

int run_serve(const ServeArgs& a) {
    if (a.port < 0 || a.port > 65535) throw UsageError("--port must be in [0, 65535]");
    ServiceOptions options;
    options.policies_dir = a.policies;
    options.data_dir = a.data;
    options.max_steps = a.max_steps;

    // Signals are taken synchronously by this thread; the server thread never sees them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    SessionService service(options);
    HttpServer server(service);
    const int port = server.bind(a.host, a.port);
    if (port < 0) throw Error("cannot bind " + a.host + ":" + std::to_string(a.port));
    std::cout << "listening on http://" << a.host << ":" << port << " with " << service.policy_ids().size()
              << " policies" << std::endl;

    std::thread worker([&] { server.listen(); });
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
    worker.join();
    service.flush();
    std::cout << "stopped; sessions flushed to " << a.data << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human-robot mutual adaptation planner"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "mutadapt 0.1.0");

    SolveArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "Solve a policy for a model config");
    solve_cmd->add_option("--config", solve_args.config, "Model config JSON")->required();
    solve_cmd->add_option("--variant", solve_args.variant, "baseline | compliance | state_conveying (overrides config)");
    solve_cmd->add_option("--out", solve_args.out, "Policy output path")->required();
    solve_cmd->add_option("--epsilon", solve_args.epsilon, "Target bound gap at the initial belief");
    solve_cmd->add_option("--max-time", solve_args.max_time, "Time limit in seconds");
    solve_cmd->add_option("--seed", solve_args.seed, "Seed for point sampling");

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Run one episode against a simulated human");
    sim_cmd->add_option("--policy", sim_args.policy, "Policy file")->required();
    sim_cmd->add_option("--alpha", sim_args.alpha, "Human adaptability");
    sim_cmd->add_option("--c", sim_args.compliance, "Human compliance");
    sim_cmd->add_option("--seed", sim_args.seed, "Episode seed");
    sim_cmd->add_option("--trace-out", sim_args.trace_out, "Write the trace (NDJSON)");
    sim_cmd->add_option("--initial-mode", sim_args.initial_mode, "Human's preferred mode: goal1 | goal2");
    sim_cmd->add_option("--max-steps", sim_args.max_steps, "Step limit");
    sim_cmd->add_option("--conveyed-alpha", sim_args.conveyed_alpha,
                        "Adaptability the human moves to after a state-conveying action");
    sim_cmd->add_option("--user", sim_args.user_id, "User id recorded in the trace");
    sim_cmd->add_option("--round", sim_args.round, "Round number recorded in the trace");
    sim_cmd->add_flag("--steps-table", sim_args.steps_table, "Print the frame-by-frame table");

    ExperimentArgs exp_args;
    auto* exp_cmd = app.add_subcommand("experiment", "Adaptation rates over a simulated population");
    exp_cmd->add_option("--policy", exp_args.policies, "Policy file (repeatable)")->required();
    exp_cmd->add_option("--prior", exp_args.prior, "Model config with priors, or point:ALPHA,C");
    exp_cmd->add_option("--n", exp_args.users, "Number of simulated users");
    exp_cmd->add_option("--seed", exp_args.seed, "Population seed");
    exp_cmd->add_option("--csv", exp_args.csv, "Also write the table to this file");
    exp_cmd->add_option("--threads", exp_args.threads, "Worker threads");
    exp_cmd->add_option("--max-steps", exp_args.max_steps, "Step limit per episode");

    LearnArgs learn_args;
    auto* learn_cmd = app.add_subcommand("learn", "Fit priors or the state-conveying transition from traces");
    learn_cmd->add_option("--traces", learn_args.traces, "Directory of trace files")->required();
    learn_cmd->add_option("--mode", learn_args.mode, "priors | talpha");
    learn_cmd->add_option("--out", learn_args.out, "Model config output path")->required();
    learn_cmd->add_option("--config", learn_args.config, "Base model config to update");
    learn_cmd->add_flag("--pool", learn_args.pool, "Pool all traces of a user into one estimate");
    learn_cmd->add_option("--delta", learn_args.delta, "Window half-width for talpha");

    ReplayArgs replay_args;
    auto* replay_cmd = app.add_subcommand("replay", "Check a trace against the model dynamics");
    replay_cmd->add_option("--trace", replay_args.trace, "Trace file")->required();
    replay_cmd->add_option("--policy", replay_args.policy, "Policy whose embedded model is used");
    replay_cmd->add_option("--config", replay_args.config, "Model config (variant taken from the trace)");

    ServeArgs serve_args;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the session HTTP API");
    serve_cmd->add_option("--policies", serve_args.policies, "Directory of policy files")->required();
    serve_cmd->add_option("--port", serve_args.port, "TCP port (0 picks a free one)");
    serve_cmd->add_option("--host", serve_args.host, "Bind address");
    serve_cmd->add_option("--data", serve_args.data, "Session storage directory");
    serve_cmd->add_option("--max-steps", serve_args.max_steps, "Step limit per session");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*solve_cmd) return run_solve(solve_args);
        if (*sim_cmd) return run_simulate(sim_args);
        if (*exp_cmd) return run_experiment(exp_args);
        if (*learn_cmd) return run_learn(learn_args);
        if (*replay_cmd) return run_replay(replay_args);
        if (*serve_cmd) return run_serve(serve_args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NoEvidence& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
