#pragma once

// Session service: a human plays the table-carrying task turn by turn against
// a solved policy. Transport-independent core plus a small HTTP front end.
//
//   POST /sessions               {"policy": id, "preferred_goal": "goal2", ...}
//   POST /sessions/{id}/action   {"direction": "goal1" | "goal2" | "clockwise" | "counterclockwise"}
//   GET  /sessions/{id}
//   GET  /sessions/{id}/trace    newline-delimited trace records
//   GET  /policies

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "mutadapt/policy_io.hpp"
#include "mutadapt/trace.hpp"

namespace mutadapt {

inline constexpr const char* kSessionSchema = "mutadapt.session/1";
inline constexpr const char* kStepSchema = "mutadapt.step/1";
inline constexpr const char* kPolicyListSchema = "mutadapt.policies/1";

inline constexpr const char* kUtteranceClockwise = "Let's rotate the table clockwise";
inline constexpr const char* kUtteranceCounterclockwise = "Let's rotate the table counterclockwise";
inline constexpr const char* kUtteranceConveying = "I think I know the best way of doing the task";

/// Fixed text spoken for a robot action; empty for task actions.
std::string utterance_for(const RobotAction& a);

struct ServiceOptions {
    std::filesystem::path policies_dir;
    std::filesystem::path data_dir;  // sessions persisted under data_dir/sessions
    std::size_t max_steps = 20;
};

struct SessionRequest {
    std::string policy_id;
    std::optional<Variant> variant;  // when given, must match the policy
    Mode preferred_goal = kGoal2;
    std::string user_id;
    int round = 1;
};

struct SessionView {
    std::string id;
    std::string policy_id;
    Variant variant = Variant::baseline;
    bool finished = false;
    ObservableState state;
    Belief belief;
    std::string last_utterance;
    std::size_t steps = 0;
    std::optional<TraceOutcome> outcome;
};

struct StepResult {
    std::size_t step = 0;
    RobotAction robot_action;
    std::string utterance;
    int orientation = 0;
    bool disagreement = false;
    Belief belief;
    double reward = 0.0;
    bool terminal = false;
    Goal goal = Goal::none;
    bool finished = false;
};

struct HttpResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

class SessionService {
public:
    /// Loads every *.json policy of the policies directory; the file stem is its id.
    explicit SessionService(ServiceOptions options);
    ~SessionService();

    SessionService(const SessionService&) = delete;
    SessionService& operator=(const SessionService&) = delete;

    std::vector<std::string> policy_ids() const;

    SessionView create_session(const SessionRequest& request);
    StepResult submit_human_action(const std::string& session_id, Mode direction);
    SessionView get_session(const std::string& session_id) const;
    InteractionTrace get_session_trace(const std::string& session_id) const;

    /// Writes every session trace to disk.
    void flush() const;

    /// Routes one HTTP request to the operations above.
    HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

private:
    struct Session;
    struct PolicyEntry;

    std::shared_ptr<Session> find(const std::string& id) const;
    void persist(const Session& s) const;
    void restore_sessions();

    ServiceOptions options_;
    std::map<std::string, std::shared_ptr<const PolicyEntry>> policies_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

std::string session_json(const SessionView& view);
std::string step_json(const StepResult& r);

/// Blocking HTTP server around a SessionService.
class HttpServer {
public:
    explicit HttpServer(SessionService& service);
    ~HttpServer();

    /// Binds to host:port (port 0 picks a free port). Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called.
    bool listen();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mutadapt
