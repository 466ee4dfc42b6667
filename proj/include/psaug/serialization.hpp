#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "psaug/engine.hpp"

namespace psaug {

// Engine configuration as a JSON object whose keys mirror EngineConfig.
// Missing keys keep the value from `base`; unknown keys and ill-typed values
// are rejected with StructuralError.
nlohmann::json config_to_json(const EngineConfig& config);
EngineConfig config_from_json(const nlohmann::json& j, const EngineConfig& base = {});
EngineConfig parse_config(std::string_view text, const EngineConfig& base = {});

nlohmann::json trace_to_json(const LossPipelineTrace& trace);
nlohmann::json schedule_to_json(const ScheduleState& state);

// Batch report as JSON Lines: one {"record":"batch",...} header followed by
// one {"record":"sample",...} line per sample, each newline-terminated.
std::string report_to_jsonl(const BatchAugReport& report);
BatchAugReport report_from_jsonl(std::string_view text);

const char* to_string(PolicyKind kind) noexcept;
const char* to_string(Stage stage) noexcept;
const char* to_string(Gate gate) noexcept;
PolicyKind policy_kind_from_string(std::string_view name);
Stage stage_from_string(std::string_view name);

}  // namespace psaug
