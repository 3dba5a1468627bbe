#pragma once

#include <vector>

#include <Eigen/Core>

#include "softbct/tree.hpp"

namespace softbct {

/// Numerically stable softmax (max-subtracted). Throws on non-finite input.
Eigen::VectorXd softmax(const Eigen::VectorXd& v);

/// Componentwise log softmax, same stabilization.
Eigen::VectorXd log_softmax(const Eigen::VectorXd& v);

/// Routing distribution at one node: softmax(W * x_gate).
/// W is M x (J+1), x_gate = [1, x_{t-1}, ..., x_{t-J}].
Eigen::VectorXd gate_probs(const Eigen::MatrixXd& W, const Eigen::VectorXd& x_gate);

Eigen::VectorXd gate_log_probs(const Eigen::MatrixXd& W, const Eigen::VectorXd& x_gate);

/// Hard-split limit of the gate: one-hot at the maximal logit, ties broken
/// toward the lowest child index.
Eigen::VectorXd hard_gate_probs(const Eigen::MatrixXd& W, const Eigen::VectorXd& x_gate);

/// Gaussian prior on the rows of every W_s: w_{s,m} ~ N(eta_m, L^{-1}),
/// shared across nodes.
struct GatingPrior {
    Eigen::MatrixXd eta;  // M x (J+1)
    Eigen::MatrixXd L;    // (J+1) x (J+1) symmetric positive definite
};

/// Per-inner-node weight matrices, indexed by node id in [0, inner_count).
struct GatingParams {
    std::vector<Eigen::MatrixXd> W;
};

/// Builds class means eta_m from thresholds and a steepness constant.
///
/// eta_M = 0; for m < M the slope entry is -C*(M-m) at column active_lag and
/// the intercept makes the logits of classes m and m+1 cross exactly at
/// thresholds[m-1]. All other entries are zero. active_lag is 1-based into
/// the gate regressor (column 0 is the intercept).
Eigen::MatrixXd eta_schedule(const std::vector<double>& thresholds, double steepness,
                             int branching, int gate_lags, int active_lag);

/// Sum of log gate probabilities along the root-to-leaf path.
/// leaf must be a deepest-level node of shape.
double path_log_prob(const TreeShape& shape, const GatingParams& params,
                     const Eigen::VectorXd& x_gate, int leaf);

}  // namespace softbct
