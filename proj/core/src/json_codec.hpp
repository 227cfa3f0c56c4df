#pragma once

// JSON encodings of the domain types shared by the policy, trace and session formats.

#include "json.hpp"
#include "mutadapt/belief.hpp"
#include "mutadapt/errors.hpp"
#include "mutadapt/model.hpp"

namespace mutadapt::codec {

using nlohmann::json;

inline json modes_json(const std::vector<Mode>& modes) {
    json out = json::array();
    for (Mode m : modes) out.push_back(std::string(to_string(m)));
    return out;
}

inline std::vector<Mode> modes_from(const json& j) {
    std::vector<Mode> out;
    for (const auto& m : j) out.push_back(parse_mode(m.get<std::string>()));
    return out;
}

inline json state_json(const ObservableState& x) {
    return {{"orientation", x.world.orientation},
            {"human_modes", modes_json(x.human_modes)},
            {"robot_modes", modes_json(x.robot_modes)},
            {"verbal_flag", x.verbal_flag}};
}

inline ObservableState state_from(const json& j) {
    ObservableState x;
    x.world.orientation = j.at("orientation").get<int>();
    x.human_modes = modes_from(j.at("human_modes"));
    x.robot_modes = modes_from(j.at("robot_modes"));
    x.verbal_flag = j.value("verbal_flag", false);
    return x;
}

inline std::string_view kind_name(RobotAction::Kind k) {
    switch (k) {
        case RobotAction::Kind::task: return "task";
        case RobotAction::Kind::verbal_command: return "command";
        case RobotAction::Kind::state_conveying: return "conveying";
    }
    return "task";
}

inline json action_json(const RobotAction& a) {
    json j{{"kind", std::string(kind_name(a.kind))}};
    if (a.kind != RobotAction::Kind::state_conveying) j["mode"] = std::string(to_string(a.mode));
    return j;
}

inline RobotAction action_from(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "task") return RobotAction::task(parse_mode(j.at("mode").get<std::string>()));
    if (kind == "command") return RobotAction::command(parse_mode(j.at("mode").get<std::string>()));
    if (kind == "conveying") return RobotAction::conveying();
    throw ValidationError("unknown robot action kind '" + kind + "'");
}

inline json belief_json(const Belief& b) { return json(b.table()); }

inline Belief belief_from(const json& j, std::size_t na, std::size_t nc) {
    return Belief(na, nc, j.get<std::vector<double>>());
}

}  // namespace mutadapt::codec
