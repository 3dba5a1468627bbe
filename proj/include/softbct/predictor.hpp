#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "softbct/engine.hpp"

namespace softbct {

/// One-step-ahead posterior-mean forecast.
struct Forecast {
    double value = 0.0;
    std::vector<double> node_values;  // per-node recursion values when traced
};

/// Bottom-up mean recursion over the whole tree:
/// inner s: (1-g'_s) mu'_s.x_ar + g'_s sum_m gate_m * child value;
/// deepest s: mu'_s.x_ar.
Forecast predict(const FitState& state, const Eigen::VectorXd& x_ar,
                 const Eigen::VectorXd& x_gate, bool want_trace = false);

struct SequentialConfig {
    bool enabled = true;
    int inner_iters = -1;  // -1: use config.inner_iters
};

struct MseReport {
    double mse = 0.0;
    int train_n = 0;
    int test_n = 0;
    std::vector<double> predictions;
    std::vector<double> actuals;
    std::vector<double> squared_errors;
    double fit_seconds = 0.0;
    double eval_seconds = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Predict-then-update protocol: fit on the first floor(split * n) points,
/// then walk the test suffix alternating one-step prediction and (when
/// enabled) a sequential posterior update with the revealed value.
MseReport evaluate_mse(const TimeSeriesDataset& data, const RunConfig& config, double split,
                       const SequentialConfig& seq = {});

struct MapLeafReport {
    int node = 0;
    int depth = 0;
    Eigen::VectorXd mu;
    double precision_mean = 0.0;  // a'/b'
};

struct MapInnerReport {
    int node = 0;
    int depth = 0;
    int active_lag = 0;                // 0 when unrestricted
    Eigen::MatrixXd weights;
    std::vector<double> boundaries;    // adjacent-gate crossings, restricted mode only
};

struct MapModelReport {
    Subtree tree;
    std::vector<MapLeafReport> leaves;
    std::vector<MapInnerReport> inners;
};

/// MAP tree plus per-leaf posterior parameters and per-split gate summary.
MapModelReport report_map_model(const FitState& state);

}  // namespace softbct
