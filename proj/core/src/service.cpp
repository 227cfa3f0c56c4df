#include "mutadapt/service.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "json_codec.hpp"
#include "mutadapt/errors.hpp"
#include "mutadapt/sim.hpp"

namespace mutadapt {

using nlohmann::json;

std::string utterance_for(const RobotAction& a) {
    switch (a.kind) {
        case RobotAction::Kind::task: return {};
        case RobotAction::Kind::verbal_command:
            return a.mode == kGoal1 ? kUtteranceClockwise : kUtteranceCounterclockwise;
        case RobotAction::Kind::state_conveying: return kUtteranceConveying;
    }
    return {};
}

struct SessionService::PolicyEntry {
    std::string id;
    LoadedPolicy loaded;
};

struct SessionService::Session {
    std::mutex mutex;  // one in-flight step per session
    std::string id;
    std::shared_ptr<const PolicyEntry> policy;
    ObservableState state;
    Belief belief;
    std::string last_utterance;
    InteractionTrace trace;
    bool finished = false;

    SessionView view() const {
        return {id, policy->id, trace.variant, finished, state, belief, last_utterance,
                trace.steps.size(), trace.outcome};
    }
};

namespace {

std::string random_token() {
    std::random_device rd;
    std::uniform_int_distribution<unsigned> dist(0, 15);
    std::string out;
    for (int i = 0; i < 24; ++i) out.push_back("0123456789abcdef"[dist(rd)]);
    return out;
}

json capabilities(Variant v) {
    return {{"verbal_commands", v == Variant::compliance}, {"state_conveying", v == Variant::state_conveying}};
}

Mode parse_direction(const std::string& s) {
    if (s == "goal1" || s == "clockwise") return kGoal1;
    if (s == "goal2" || s == "counterclockwise") return kGoal2;
    throw ValidationError("direction must be goal1, goal2, clockwise or counterclockwise");
}

HttpResponse error_response(int status, const std::string& message) {
    return {status, json{{"error", message}}.dump()};
}

bool valid_id(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') return false;
    return true;
}

}  // namespace

SessionService::SessionService(ServiceOptions options) : options_(std::move(options)) {
    if (!std::filesystem::is_directory(options_.policies_dir))
        throw ValidationError("policies directory " + options_.policies_dir.string() + " does not exist");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(options_.policies_dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto entry = std::make_shared<PolicyEntry>(PolicyEntry{f.stem().string(), load_policy(f)});
        policies_.emplace(entry->id, std::move(entry));
    }
    if (!options_.data_dir.empty()) {
        std::filesystem::create_directories(options_.data_dir / "sessions");
        restore_sessions();
    }
}

SessionService::~SessionService() = default;

std::vector<std::string> SessionService::policy_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, p] : policies_) ids.push_back(id);
    return ids;
}

std::shared_ptr<SessionService::Session> SessionService::find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
    return it->second;
}

void SessionService::persist(const Session& s) const {
    if (options_.data_dir.empty()) return;
    const auto dir = options_.data_dir / "sessions";
    json meta{{"schema", kSessionSchema}, {"id", s.id}, {"policy", s.policy->id},
              {"last_utterance", s.last_utterance}};
    {
        std::ofstream out(dir / (s.id + ".session.json"), std::ios::binary);
        out << meta.dump() << '\n';
    }
    save_trace(dir / (s.id + ".ndjson"), s.trace);
}

void SessionService::restore_sessions() {
    const auto dir = options_.data_dir / "sessions";
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        const std::string suffix = ".session.json";
        if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
            continue;
        try {
            std::ifstream in(e.path());
            const json meta = json::parse(in);
            const auto id = meta.at("id").get<std::string>();
            auto pit = policies_.find(meta.at("policy").get<std::string>());
            if (pit == policies_.end()) continue;
            auto s = std::make_shared<Session>();
            s->id = id;
            s->policy = pit->second;
            s->trace = load_trace(dir / (id + ".ndjson"));
            s->last_utterance = meta.value("last_utterance", std::string());
            s->state = s->trace.steps.empty() ? s->trace.initial_state : s->trace.steps.back().after;
            s->belief = s->trace.steps.empty() ? s->trace.initial_belief : s->trace.steps.back().belief;
            s->finished = s->trace.outcome.has_value();
            sessions_.emplace(id, std::move(s));
        } catch (const std::exception&) {
            // A damaged session file is skipped; the others stay available.
        }
    }
}

SessionView SessionService::create_session(const SessionRequest& request) {
    auto pit = policies_.find(request.policy_id);
    if (pit == policies_.end()) throw NotFound("unknown policy '" + request.policy_id + "'");
    const auto& policy = pit->second;
    const auto& model = policy->loaded.model;
    if (request.variant && *request.variant != model.variant())
        throw ValidationError("policy '" + request.policy_id + "' is a " + std::string(to_string(model.variant())) +
                              " policy");

    auto s = std::make_shared<Session>();
    s->policy = policy;
    s->state = model.initial_state(request.preferred_goal);
    s->belief = model.prior();
    auto& t = s->trace;
    t.variant = model.variant();
    t.model_hash = model.hash();
    t.gamma = model.gamma();
    t.user_id = request.user_id;
    t.round = request.round;
    t.initial_state = s->state;
    t.initial_belief = s->belief;
    {
        std::unique_lock lock(sessions_mutex_);
        do {
            s->id = random_token();
        } while (sessions_.count(s->id));
        t.episode_id = s->id;
        sessions_.emplace(s->id, s);
    }
    std::lock_guard guard(s->mutex);
    persist(*s);
    return s->view();
}

StepResult SessionService::submit_human_action(const std::string& session_id, Mode direction) {
    auto s = find(session_id);
    std::lock_guard guard(s->mutex);
    if (s->finished) throw Conflict("session '" + session_id + "' has finished");
    const auto& model = s->policy->loaded.model;
    const auto& policy = s->policy->loaded.policy;

    // The robot commits to its action using the belief from the previous step.
    const RobotAction a_r = best_action(policy, s->state, s->belief);
    const HumanAction a_h{direction};
    const ObservableState next = world_transition(model, s->state, a_r, a_h);
    Belief b = update_belief(model, s->belief, s->state, a_r, next);

    TraceStep step;
    step.index = s->trace.steps.size();
    step.before = s->state;
    step.robot_action = a_r;
    step.human_action = a_h;
    step.after = next;
    step.reward = reward(model, s->state, a_r, a_h, next);
    step.disagreement = a_r.kind == RobotAction::Kind::task && a_r.mode != a_h.mode;
    step.belief = b;

    StepResult r;
    r.step = step.index;
    r.robot_action = a_r;
    r.utterance = utterance_for(a_r);
    r.orientation = next.world.orientation;
    r.disagreement = step.disagreement;
    r.belief = b;
    r.reward = step.reward;
    r.terminal = next.terminal();
    r.goal = goal_of(next);

    s->trace.steps.push_back(std::move(step));
    s->state = next;
    s->belief = std::move(b);
    s->last_utterance = r.utterance;
    if (next.terminal() || s->trace.steps.size() >= options_.max_steps) {
        s->finished = true;
        s->trace.outcome = summarize(s->trace, !next.terminal());
    }
    r.finished = s->finished;
    persist(*s);
    return r;
}

SessionView SessionService::get_session(const std::string& session_id) const {
    auto s = find(session_id);
    std::lock_guard guard(s->mutex);
    return s->view();
}

InteractionTrace SessionService::get_session_trace(const std::string& session_id) const {
    auto s = find(session_id);
    std::lock_guard guard(s->mutex);
    return s->trace;
}

void SessionService::flush() const {
    std::shared_lock lock(sessions_mutex_);
    for (const auto& [id, s] : sessions_) {
        std::lock_guard guard(s->mutex);
        persist(*s);
    }
}

std::string session_json(const SessionView& v) {
    json j{{"schema", kSessionSchema},
           {"id", v.id},
           {"policy", v.policy_id},
           {"variant", std::string(to_string(v.variant))},
           {"status", v.finished ? "finished" : "active"},
           {"orientation", v.state.world.orientation},
           {"state", codec::state_json(v.state)},
           {"belief", codec::belief_json(v.belief)},
           {"utterance", v.last_utterance},
           {"steps", v.steps},
           {"capabilities", capabilities(v.variant)}};
    if (v.outcome)
        j["outcome"] = {{"goal", std::string(to_string(v.outcome->goal))},
                        {"discounted_return", v.outcome->discounted_return},
                        {"verbal_actions", v.outcome->verbal_actions},
                        {"timed_out", v.outcome->timed_out}};
    return j.dump();
}

std::string step_json(const StepResult& r) {
    json j{{"schema", kStepSchema},
           {"step", r.step},
           {"robot_action", codec::action_json(r.robot_action)},
           {"utterance", r.utterance},
           {"orientation", r.orientation},
           {"disagreement", r.disagreement},
           {"belief", codec::belief_json(r.belief)},
           {"reward", r.reward},
           {"terminal", r.terminal},
           {"goal", std::string(to_string(r.goal))},
           {"status", r.finished ? "finished" : "active"}};
    return j.dump();
}

HttpResponse SessionService::handle(const std::string& method, const std::string& path, const std::string& body) {
    std::vector<std::string> parts;
    {
        std::string seg;
        std::istringstream ss(path.substr(0, path.find('?')));
        while (std::getline(ss, seg, '/'))
            if (!seg.empty()) parts.push_back(seg);
    }
    try {
        if (parts.size() == 1 && parts[0] == "policies") {
            if (method != "GET") return error_response(405, "method not allowed");
            json list = json::array();
            for (const auto& [id, p] : policies_) {
                const auto& m = p->loaded.model;
                list.push_back({{"id", id},
                                {"variant", std::string(to_string(m.variant()))},
                                {"model_hash", m.hash()},
                                {"capabilities", capabilities(m.variant())}});
            }
            return {200, json{{"schema", kPolicyListSchema}, {"policies", list}}.dump()};
        }
        if (parts.empty() || parts[0] != "sessions") return error_response(404, "no such endpoint");
        if (parts.size() == 1) {
            if (method != "POST") return error_response(405, "method not allowed");
            json req;
            try {
                req = json::parse(body.empty() ? "{}" : body);
            } catch (const json::parse_error&) {
                return error_response(400, "request body is not valid JSON");
            }
            SessionRequest r;
            try {
                r.policy_id = req.at("policy").get<std::string>();
                if (req.contains("variant")) r.variant = parse_variant(req.at("variant").get<std::string>());
                if (req.contains("preferred_goal"))
                    r.preferred_goal = parse_direction(req.at("preferred_goal").get<std::string>());
                r.user_id = req.value("user_id", std::string());
                r.round = req.value("round", 1);
            } catch (const json::exception& e) {
                return error_response(400, std::string("malformed session request: ") + e.what());
            }
            return {201, session_json(create_session(r))};
        }
        const std::string& id = parts[1];
        if (!valid_id(id)) return error_response(404, "unknown session");
        if (parts.size() == 2) {
            if (method != "GET") return error_response(405, "method not allowed");
            return {200, session_json(get_session(id))};
        }
        if (parts.size() == 3 && parts[2] == "action") {
            if (method != "POST") return error_response(405, "method not allowed");
            Mode direction;
            try {
                direction = parse_direction(json::parse(body).at("direction").get<std::string>());
            } catch (const json::exception&) {
                return error_response(400, "body must be {\"direction\": ...}");
            }
            return {200, step_json(submit_human_action(id, direction))};
        }
        if (parts.size() == 3 && parts[2] == "trace") {
            if (method != "GET") return error_response(405, "method not allowed");
            return {200, serialize_trace(get_session_trace(id)), "application/x-ndjson"};
        }
        return error_response(404, "no such endpoint");
    } catch (const NotFound& e) {
        return error_response(404, e.what());
    } catch (const Conflict& e) {
        return error_response(409, e.what());
    } catch (const ValidationError& e) {
        return error_response(400, e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

}  // namespace mutadapt
