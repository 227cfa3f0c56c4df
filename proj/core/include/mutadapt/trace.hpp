#pragma once

// Interaction traces: the unit of persistence, learning input and replay.
// On disk a trace is newline-delimited JSON: one header record, one record
// per step, and a footer once the episode has finished.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mutadapt/belief.hpp"
#include "mutadapt/human.hpp"
#include "mutadapt/model.hpp"

namespace mutadapt {

inline constexpr const char* kTraceSchema = "mutadapt.trace/1";

struct TraceStep {
    std::size_t index = 0;
    ObservableState before;
    RobotAction robot_action;
    HumanAction human_action;
    ObservableState after;
    double reward = 0.0;
    bool disagreement = false;
    Belief belief;  // robot belief after the update

    bool operator==(const TraceStep&) const = default;
};

enum class Goal { none, goal1, goal2 };

std::string_view to_string(Goal g);
Goal goal_of(const ObservableState& x);

struct TraceOutcome {
    Goal goal = Goal::none;
    double discounted_return = 0.0;
    std::size_t verbal_actions = 0;
    std::size_t steps = 0;
    bool timed_out = false;

    bool operator==(const TraceOutcome&) const = default;
};

struct InteractionTrace {
    std::string episode_id;
    Variant variant = Variant::baseline;
    std::uint64_t seed = 0;
    std::string model_hash;
    double gamma = 0.9;
    std::string user_id;  // groups traces of one person across rounds
    int round = 1;
    std::optional<HumanParams> human;  // present for simulated humans
    ObservableState initial_state;
    Belief initial_belief;
    std::vector<TraceStep> steps;
    std::optional<TraceOutcome> outcome;

    bool operator==(const InteractionTrace&) const = default;
};

/// Sum of gamma^(t+1) r_t: rewards are credited to the state they lead into.
double discounted_return(const std::vector<TraceStep>& steps, double gamma);

/// Outcome implied by the step records.
TraceOutcome summarize(const InteractionTrace& trace, bool timed_out);

void write_trace(std::ostream& out, const InteractionTrace& trace);
std::string serialize_trace(const InteractionTrace& trace);
void save_trace(const std::filesystem::path& path, const InteractionTrace& trace);

InteractionTrace parse_trace(std::istream& in);
InteractionTrace parse_trace(const std::string& text);
InteractionTrace load_trace(const std::filesystem::path& path);

/// All *.ndjson / *.jsonl files of a directory, sorted by file name.
std::vector<InteractionTrace> load_trace_directory(const std::filesystem::path& dir);

struct ReplayReport {
    bool consistent = true;
    std::vector<std::string> problems;
};

/// Checks contiguity, the world dynamics, rewards, the outcome and that each
/// stored belief equals the variant update recomputed from the previous one.
ReplayReport verify_replay(const MomdpModel& model, const InteractionTrace& trace,
                           double tol = 1e-10);

}  // namespace mutadapt
