#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "softbct/engine.hpp"
#include "softbct/predictor.hpp"

namespace softbct {

/// Versioned model document (schema "softbct-model-v1") embedding the
/// resolved config, gating weights and prior, every node posterior, the
/// tree posterior and the streaming accumulators.
nlohmann::json model_to_json(const FitState& state);
FitState model_from_json(const nlohmann::json& j);

void save_model(const std::string& path, const FitState& state);
FitState load_model(const std::string& path);

nlohmann::json map_report_to_json(const MapModelReport& report);
std::string map_report_to_text(const MapModelReport& report);

/// include_timing adds wall-clock fields, which breaks byte-for-byte
/// reproducibility between runs; off by default.
nlohmann::json mse_report_to_json(const MseReport& report, bool include_timing = false);
std::string mse_report_to_text(const MseReport& report);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace softbct
