#include "mutadapt/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mutadapt/errors.hpp"

namespace mutadapt {

using nlohmann::json;

namespace {

std::vector<std::vector<double>> read_matrix(const json& j, const char* name) {
    if (!j.is_array()) throw ValidationError(std::string(name) + " must be an array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& row : j) {
        if (!row.is_array()) throw ValidationError(std::string(name) + " rows must be arrays");
        rows.push_back(row.get<std::vector<double>>());
    }
    return rows;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

json matrix_json(const LatentTransition& t) { return json(t.rows()); }

}  // namespace

ModelConfig parse_model_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");

    ModelConfig c;
    try {
        if (auto it = j.find("schema"); it != j.end() && it->get<std::string>() != kModelSchema)
            throw ValidationError("unsupported config schema '" + it->get<std::string>() + "'");
        c.variant = parse_variant(get_or<std::string>(j, "variant", "baseline"));
        c.history_length = get_or<std::size_t>(j, "history_length", c.history_length);
        c.gamma = get_or<double>(j, "gamma", c.gamma);
        if (auto it = j.find("rewards"); it != j.end()) {
            c.rewards.optimal = get_or<double>(*it, "optimal", c.rewards.optimal);
            c.rewards.suboptimal = get_or<double>(*it, "suboptimal", c.rewards.suboptimal);
            c.rewards.other = get_or<double>(*it, "other", c.rewards.other);
            c.rewards.verbal_cost = get_or<double>(*it, "verbal_cost", c.rewards.verbal_cost);
        }
        c.alpha_grid = get_or<std::vector<double>>(j, "alpha_grid", c.alpha_grid);
        c.compliance_grid = get_or<std::vector<double>>(j, "compliance_grid", c.compliance_grid);
        c.alpha_prior = get_or<std::vector<double>>(j, "alpha_prior", {});
        c.compliance_prior = get_or<std::vector<double>>(j, "compliance_prior", {});
        if (auto it = j.find("t_alpha"); it != j.end() && !it->is_null())
            c.t_alpha = LatentTransition(read_matrix(*it, "t_alpha"));
        if (auto it = j.find("t_compliance"); it != j.end() && !it->is_null())
            c.t_compliance = LatentTransition(read_matrix(*it, "t_compliance"));
        c.initial_orientation = get_or<int>(j, "initial_orientation", c.initial_orientation);
        c.initial_robot_mode =
            parse_mode(get_or<std::string>(j, "initial_robot_mode", "goal1"));
        c.initial_human_mode =
            parse_mode(get_or<std::string>(j, "initial_human_mode", "goal2"));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config field has the wrong type: ") + e.what());
    }
    return c;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_config(ss.str());
}

std::string dump_model_config(const ModelConfig& c, int indent) {
    const std::size_t na = c.alpha_grid.size();
    const std::size_t nc = c.compliance_grid.size();
    json j;
    j["schema"] = kModelSchema;
    j["variant"] = std::string(to_string(c.variant));
    j["history_length"] = c.history_length;
    j["gamma"] = c.gamma;
    j["rewards"] = {{"optimal", c.rewards.optimal},
                    {"suboptimal", c.rewards.suboptimal},
                    {"other", c.rewards.other},
                    {"verbal_cost", c.rewards.verbal_cost}};
    j["alpha_grid"] = c.alpha_grid;
    j["compliance_grid"] = c.compliance_grid;
    j["alpha_prior"] =
        c.alpha_prior.empty() ? std::vector<double>(na, 1.0 / static_cast<double>(na)) : c.alpha_prior;
    j["compliance_prior"] = c.compliance_prior.empty()
                                ? std::vector<double>(nc, 1.0 / static_cast<double>(nc))
                                : c.compliance_prior;
    j["t_alpha"] = matrix_json(c.t_alpha ? *c.t_alpha : LatentTransition::identity(na));
    j["t_compliance"] =
        matrix_json(c.t_compliance ? *c.t_compliance : LatentTransition::identity(nc));
    j["initial_orientation"] = c.initial_orientation;
    j["initial_robot_mode"] = std::string(to_string(c.initial_robot_mode));
    j["initial_human_mode"] = std::string(to_string(c.initial_human_mode));
    return j.dump(indent);
}

std::string model_config_hash(const ModelConfig& config) {
    const std::string canonical = dump_model_config(config, -1);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mutadapt
