#include "mutadapt/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json_codec.hpp"

namespace mutadapt {

using nlohmann::json;

std::string_view to_string(Goal g) {
    switch (g) {
        case Goal::none: return "none";
        case Goal::goal1: return "goal1";
        case Goal::goal2: return "goal2";
    }
    return "none";
}

namespace {

Goal parse_goal(const std::string& s) {
    if (s == "goal1") return Goal::goal1;
    if (s == "goal2") return Goal::goal2;
    if (s == "none") return Goal::none;
    throw ValidationError("unknown goal '" + s + "'");
}

json human_json(const HumanParams& h) {
    return {{"alpha", h.alpha}, {"compliance", h.compliance},
            {"initial_mode", std::string(to_string(h.current_mode))}};
}

}  // namespace

Goal goal_of(const ObservableState& x) {
    if (x.world.orientation == kGoal1Orientation) return Goal::goal1;
    if (x.world.orientation == kGoal2Orientation) return Goal::goal2;
    return Goal::none;
}

double discounted_return(const std::vector<TraceStep>& steps, double gamma) {
    double total = 0.0;
    double discount = gamma;
    for (const auto& s : steps) {
        total += discount * s.reward;
        discount *= gamma;
    }
    return total;
}

TraceOutcome summarize(const InteractionTrace& trace, bool timed_out) {
    TraceOutcome out;
    const ObservableState& last = trace.steps.empty() ? trace.initial_state : trace.steps.back().after;
    out.goal = goal_of(last);
    out.discounted_return = discounted_return(trace.steps, trace.gamma);
    out.verbal_actions = static_cast<std::size_t>(std::count_if(
        trace.steps.begin(), trace.steps.end(), [](const TraceStep& s) { return s.robot_action.is_verbal(); }));
    out.steps = trace.steps.size();
    out.timed_out = timed_out;
    return out;
}

void write_trace(std::ostream& out, const InteractionTrace& t) {
    json header{{"record", "header"},
                {"schema", kTraceSchema},
                {"episode_id", t.episode_id},
                {"variant", std::string(to_string(t.variant))},
                {"seed", t.seed},
                {"model_hash", t.model_hash},
                {"gamma", t.gamma},
                {"user_id", t.user_id},
                {"round", t.round},
                {"alpha_count", t.initial_belief.alpha_count()},
                {"compliance_count", t.initial_belief.compliance_count()},
                {"initial_state", codec::state_json(t.initial_state)},
                {"initial_belief", codec::belief_json(t.initial_belief)}};
    header["human"] = t.human ? human_json(*t.human) : json(nullptr);
    out << header.dump() << '\n';
    for (const auto& s : t.steps) {
        json step{{"record", "step"},
                  {"step", s.index},
                  {"before", codec::state_json(s.before)},
                  {"robot_action", codec::action_json(s.robot_action)},
                  {"human_action", std::string(to_string(s.human_action.mode))},
                  {"after", codec::state_json(s.after)},
                  {"reward", s.reward},
                  {"disagreement", s.disagreement},
                  {"belief", codec::belief_json(s.belief)}};
        out << step.dump() << '\n';
    }
    if (t.outcome) {
        const auto& o = *t.outcome;
        json footer{{"record", "footer"},
                    {"goal", std::string(to_string(o.goal))},
                    {"discounted_return", o.discounted_return},
                    {"verbal_actions", o.verbal_actions},
                    {"steps", o.steps},
                    {"timed_out", o.timed_out}};
        out << footer.dump() << '\n';
    }
}

std::string serialize_trace(const InteractionTrace& trace) {
    std::ostringstream ss;
    write_trace(ss, trace);
    return ss.str();
}

void save_trace(const std::filesystem::path& path, const InteractionTrace& trace) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write trace file " + path.string());
        write_trace(out, trace);
        if (!out) throw Error("failed writing trace file " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

InteractionTrace parse_trace(std::istream& in) {
    InteractionTrace t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t na = 0, nc = 0;
    try {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const json j = json::parse(line);
            const auto record = j.at("record").get<std::string>();
            if (record == "header") {
                if (have_header) throw ValidationError("trace has two header records");
                if (j.at("schema").get<std::string>() != kTraceSchema)
                    throw ValidationError("unsupported trace schema");
                t.episode_id = j.at("episode_id").get<std::string>();
                t.variant = parse_variant(j.at("variant").get<std::string>());
                t.seed = j.at("seed").get<std::uint64_t>();
                t.model_hash = j.at("model_hash").get<std::string>();
                t.gamma = j.at("gamma").get<double>();
                t.user_id = j.value("user_id", std::string());
                t.round = j.value("round", 1);
                na = j.at("alpha_count").get<std::size_t>();
                nc = j.at("compliance_count").get<std::size_t>();
                t.initial_state = codec::state_from(j.at("initial_state"));
                t.initial_belief = codec::belief_from(j.at("initial_belief"), na, nc);
                if (const auto& h = j.at("human"); !h.is_null())
                    t.human = HumanParams{h.at("alpha").get<double>(), h.at("compliance").get<double>(),
                                          parse_mode(h.at("initial_mode").get<std::string>())};
                have_header = true;
            } else if (record == "step") {
                if (!have_header) throw ValidationError("trace step before header");
                if (t.outcome) throw ValidationError("trace step after footer");
                TraceStep s;
                s.index = j.at("step").get<std::size_t>();
                s.before = codec::state_from(j.at("before"));
                s.robot_action = codec::action_from(j.at("robot_action"));
                s.human_action = HumanAction{parse_mode(j.at("human_action").get<std::string>())};
                s.after = codec::state_from(j.at("after"));
                s.reward = j.at("reward").get<double>();
                s.disagreement = j.at("disagreement").get<bool>();
                s.belief = codec::belief_from(j.at("belief"), na, nc);
                t.steps.push_back(std::move(s));
            } else if (record == "footer") {
                if (!have_header) throw ValidationError("trace footer before header");
                TraceOutcome o;
                o.goal = parse_goal(j.at("goal").get<std::string>());
                o.discounted_return = j.at("discounted_return").get<double>();
                o.verbal_actions = j.at("verbal_actions").get<std::size_t>();
                o.steps = j.at("steps").get<std::size_t>();
                o.timed_out = j.at("timed_out").get<bool>();
                t.outcome = o;
            } else {
                throw ValidationError("unknown trace record '" + record + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError("malformed trace at line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) throw ValidationError("trace has no header record");
    return t;
}

InteractionTrace parse_trace(const std::string& text) {
    std::istringstream ss(text);
    return parse_trace(ss);
}

InteractionTrace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open trace file " + path.string());
    return parse_trace(in);
}

std::vector<InteractionTrace> load_trace_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ValidationError(dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".ndjson" || ext == ".jsonl")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<InteractionTrace> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_trace(f));
    return out;
}

ReplayReport verify_replay(const MomdpModel& model, const InteractionTrace& trace, double tol) {
    ReplayReport report;
    const auto fail = [&report](std::string msg) {
        report.consistent = false;
        report.problems.push_back(std::move(msg));
    };
    if (trace.variant != model.variant()) fail("trace variant does not match the model");
    ObservableState x = trace.initial_state;
    Belief b = trace.initial_belief;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& s = trace.steps[i];
        const std::string at = "step " + std::to_string(i) + ": ";
        if (s.index != i) fail(at + "step indices are not contiguous");
        if (s.before != x) fail(at + "state does not continue from the previous step");
        try {
            const auto next = world_transition(model, s.before, s.robot_action, s.human_action);
            if (next != s.after) fail(at + "recorded successor disagrees with the dynamics");
            const double r = reward(model, s.before, s.robot_action, s.human_action, s.after);
            if (std::abs(r - s.reward) > tol) fail(at + "recorded reward disagrees with the model");
            b = update_belief(model, b, s.before, s.robot_action, s.after);
        } catch (const Error& e) {
            fail(at + e.what());
            return report;
        }
        for (std::size_t y = 0; y < b.size(); ++y)
            if (std::abs(b[y] - s.belief[y]) > tol) {
                fail(at + "stored belief differs from the recomputed update");
                break;
            }
        b = s.belief;
        x = s.after;
    }
    if (trace.outcome) {
        const auto& o = *trace.outcome;
        if (o.goal != goal_of(x)) fail("outcome goal does not match the final orientation");
        if (std::abs(o.discounted_return - discounted_return(trace.steps, trace.gamma)) > 1e-9)
            fail("outcome return is not recomputable from the steps");
        if (o.steps != trace.steps.size()) fail("outcome step count is wrong");
    }
    return report;
}

}  // namespace mutadapt
