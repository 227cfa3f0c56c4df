#include "mutadapt/policy_io.hpp"

#include <fstream>
#include <sstream>

#include "json_codec.hpp"
#include "mutadapt/config.hpp"

namespace mutadapt {

using nlohmann::json;

std::string serialize_policy(const Policy& policy, const MomdpModel& model) {
    const auto& meta = policy.metadata();
    json j;
    j["schema"] = kPolicySchema;
    j["model_hash"] = meta.model_hash;
    j["variant"] = std::string(to_string(meta.variant));
    j["epsilon"] = meta.epsilon;
    j["horizon"] = meta.horizon;
    j["seed"] = meta.seed;
    j["alpha_grid"] = model.config().alpha_grid;
    j["compliance_grid"] = model.config().compliance_grid;
    j["model"] = json::parse(dump_model_config(model.config(), -1));
    json states = json::array();
    for (const auto& [x, vs] : policy.vectors()) {
        json entry;
        entry["state"] = codec::state_json(x);
        json arr = json::array();
        for (const auto& v : vs) arr.push_back({{"action", codec::action_json(v.action)}, {"values", v.values}});
        entry["vectors"] = std::move(arr);
        states.push_back(std::move(entry));
    }
    j["states"] = std::move(states);
    return j.dump(1);
}

void save_policy(const std::filesystem::path& path, const Policy& policy, const MomdpModel& model) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write policy file " + path.string());
    out << serialize_policy(policy, model) << '\n';
    if (!out) throw Error("failed writing policy file " + path.string());
}

LoadedPolicy parse_policy(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("policy is not valid JSON: ") + e.what());
    }
    try {
        if (j.value("schema", std::string()) != kPolicySchema)
            throw ValidationError("unsupported policy schema");
        MomdpModel model(parse_model_config(j.at("model").dump()));
        const auto hash = j.at("model_hash").get<std::string>();
        if (hash != model.hash())
            throw ValidationError("policy model hash " + hash + " does not match its embedded model (" +
                                  model.hash() + ")");
        PolicyMetadata meta;
        meta.variant = parse_variant(j.at("variant").get<std::string>());
        if (meta.variant != model.variant())
            throw ValidationError("policy variant does not match its embedded model");
        meta.model_hash = hash;
        meta.epsilon = j.at("epsilon").get<double>();
        meta.horizon = j.at("horizon").get<std::size_t>();
        meta.seed = j.at("seed").get<std::uint64_t>();

        std::map<ObservableState, std::vector<AlphaVector>> vectors;
        for (const auto& entry : j.at("states")) {
            auto x = codec::state_from(entry.at("state"));
            if (!model.is_valid_state(x)) throw ValidationError("policy state does not belong to its model");
            auto& out = vectors[x];
            for (const auto& v : entry.at("vectors")) {
                AlphaVector av{v.at("values").get<std::vector<double>>(), codec::action_from(v.at("action"))};
                if (av.values.size() != model.latent_count())
                    throw ValidationError("alpha-vector length does not match the latent grid");
                if (!model.allows(av.action))
                    throw ValidationError("alpha-vector action is not available in the variant");
                out.push_back(std::move(av));
            }
        }
        for (const auto& x : model.states())
            if (!x.terminal() && (vectors.count(x) == 0 || vectors[x].empty()))
                throw ValidationError("policy does not cover every non-terminal state");
        return {std::move(model), Policy(std::move(meta), std::move(vectors))};
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed policy file: ") + e.what());
    }
}

LoadedPolicy load_policy(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open policy file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_policy(ss.str());
}

Policy load_policy_for(const std::filesystem::path& path, const MomdpModel& model) {
    auto loaded = load_policy(path);
    if (loaded.policy.metadata().model_hash != model.hash())
        throw ValidationError("policy was solved for model " + loaded.policy.metadata().model_hash +
                              ", not " + model.hash());
    return std::move(loaded.policy);
}

}  // namespace mutadapt
