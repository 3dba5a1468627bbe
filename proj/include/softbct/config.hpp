#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace softbct {

struct TreePriorConfig {
    enum class Kind { Constant, DepthPower, PerDepth };
    Kind kind = Kind::Constant;
    double value = 0.5;               // Constant
    double base = 2.0;                // DepthPower: g_s = base^{-depth}
    std::vector<double> per_depth;    // PerDepth
};

struct LeafPriorConfig {
    std::vector<double> mu;       // empty => zero vector
    double lambda_scale = 1.0;    // Lambda = scale * I unless a matrix is given
    std::vector<double> lambda;   // row-major (K+1)^2, optional
    double a = 0.1;
    double b = 0.1;
};

struct GatingConfig {
    bool hard = false;          // hard-split baseline (weights frozen)
    bool restricted = false;    // per-depth single active lag d_s + 1
    bool freeze_weights = false;
    std::vector<double> thresholds;  // empty => training quantiles at fit time
    double steepness = 10.0;
    int active_lag = 1;              // 1-based lag the schedule acts on
    std::vector<std::vector<double>> eta;  // explicit prior means, M rows x (J+1)
    double precision = 1.0;          // L = precision * I
    std::vector<double> L;           // row-major (J+1)^2 override, optional
};

/// Everything a fit needs: structure, priors, modes, stopping rules.
struct RunConfig {
    int branching = 2;   // children per split
    int max_depth = 1;
    int gate_lags = 1;   // J
    int ar_lags = 1;     // K
    TreePriorConfig tree_prior;
    LeafPriorConfig leaf_prior;
    GatingConfig gating;
    double tol = 1e-6;
    int max_iters = 100;
    int inner_iters = 3;  // sequential-update refinement passes
    std::uint64_t seed = 0;

    int context_length() const { return gate_lags > ar_lags ? gate_lags : ar_lags; }
};

/// Throws std::invalid_argument on any inconsistent field combination.
void validate(const RunConfig& config);

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);

/// Reads a config file; .toml files go through the bundled TOML-subset
/// reader, everything else is parsed as JSON.
RunConfig load_config(const std::string& path);

/// Minimal TOML reader (tables, scalars, homogeneous arrays, nested arrays)
/// returning the equivalent JSON document.
nlohmann::json toml_to_json(const std::string& text);

}  // namespace softbct
