#pragma once

#include <filesystem>
#include <string>

#include "mutadapt/model.hpp"

namespace mutadapt {

inline constexpr const char* kModelSchema = "mutadapt.model/1";

/// Parses a model config document. Missing optional fields take the
/// table-carry defaults. Throws ValidationError on malformed input.
ModelConfig parse_model_config(const std::string& json_text);
ModelConfig load_model_config(const std::filesystem::path& path);

/// Canonical serialization (sorted keys, explicit defaults). Used for hashing.
std::string dump_model_config(const ModelConfig& config, int indent = 2);

/// 16-hex-digit FNV-1a digest of the canonical config.
std::string model_config_hash(const ModelConfig& config);

}  // namespace mutadapt
