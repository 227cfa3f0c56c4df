#pragma once

#include <filesystem>
#include <string>

#include "mutadapt/model.hpp"
#include "mutadapt/solver.hpp"

namespace mutadapt {

inline constexpr const char* kPolicySchema = "mutadapt.policy/1";

/// A policy together with the model it was solved for.
struct LoadedPolicy {
    MomdpModel model;
    Policy policy;
};

/// Versioned JSON: schema, model hash, variant, grids, the embedded model
/// config and the alpha-vectors of every covered observable state.
std::string serialize_policy(const Policy& policy, const MomdpModel& model);
void save_policy(const std::filesystem::path& path, const Policy& policy, const MomdpModel& model);

/// Validates the schema and that the embedded model reproduces the recorded hash.
LoadedPolicy parse_policy(const std::string& text);
LoadedPolicy load_policy(const std::filesystem::path& path);

/// Loads a policy and rejects it unless it was solved for `model`.
Policy load_policy_for(const std::filesystem::path& path, const MomdpModel& model);

}  // namespace mutadapt
