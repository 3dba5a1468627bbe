#include "softbct/gating.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace softbct {

namespace {

Eigen::VectorXd shifted_logits(const Eigen::VectorXd& v) {
    if (!v.allFinite()) throw std::invalid_argument("softmax: non-finite input");
    return v.array() - v.maxCoeff();
}

}  // namespace

Eigen::VectorXd softmax(const Eigen::VectorXd& v) {
    Eigen::VectorXd e = shifted_logits(v).array().exp();
    return e / e.sum();
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& v) {
    Eigen::VectorXd z = shifted_logits(v);
    const double lse = std::log(z.array().exp().sum());
    return z.array() - lse;
}

Eigen::VectorXd gate_probs(const Eigen::MatrixXd& W, const Eigen::VectorXd& x_gate) {
    if (W.cols() != x_gate.size())
        throw std::invalid_argument("gate_probs: weight/regressor dimension mismatch");
    return softmax(W * x_gate);
}

Eigen::VectorXd gate_log_probs(const Eigen::MatrixXd& W, const Eigen::VectorXd& x_gate) {
    if (W.cols() != x_gate.size())
        throw std::invalid_argument("gate_probs: weight/regressor dimension mismatch");
    return log_softmax(W * x_gate);
}

Eigen::VectorXd hard_gate_probs(const Eigen::MatrixXd& W, const Eigen::VectorXd& x_gate) {
    if (W.cols() != x_gate.size())
        throw std::invalid_argument("gate_probs: weight/regressor dimension mismatch");
    const Eigen::VectorXd logits = W * x_gate;
    if (!logits.allFinite()) throw std::invalid_argument("hard_gate_probs: non-finite logits");
    int best = 0;
    for (int m = 1; m < logits.size(); ++m)
        if (logits[m] > logits[best]) best = m;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(logits.size());
    p[best] = 1.0;
    return p;
}

Eigen::MatrixXd eta_schedule(const std::vector<double>& thresholds, double steepness,
                             int branching, int gate_lags, int active_lag) {
    if (!(steepness > 0.0)) throw std::invalid_argument("eta_schedule: steepness must be > 0");
    if (branching < 2) throw std::invalid_argument("eta_schedule: branching must be >= 2");
    if (active_lag < 1 || active_lag > gate_lags)
        throw std::invalid_argument("eta_schedule: active lag out of range");
    if (static_cast<int>(thresholds.size()) != branching - 1)
        throw std::invalid_argument("eta_schedule: need branching-1 thresholds");

    const int M = branching;
    Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(M, gate_lags + 1);
    // slopes: -C*(M-m) for class m < M (1-based), 0 for class M
    for (int m = 1; m < M; ++m) eta(m - 1, active_lag) = -steepness * (M - m);
    // intercepts, top class down: logits of m and m+1 equal at thresholds[m-1]
    for (int m = M - 1; m >= 1; --m) {
        const double slope_gap = eta(m, active_lag) - eta(m - 1, active_lag);
        eta(m - 1, 0) = eta(m, 0) + thresholds[m - 1] * slope_gap;
    }
    return eta;
}

double path_log_prob(const TreeShape& shape, const GatingParams& params,
                     const Eigen::VectorXd& x_gate, int leaf) {
    if (leaf < shape.inner_count() || leaf >= shape.node_count())
        throw std::invalid_argument("path_log_prob: node " + std::to_string(leaf) +
                                    " is not a deepest-level leaf");
    double lp = 0.0;
    for (int s = leaf; s != 0;) {
        const int m = shape.child_index(s);
        s = shape.parent(s);
        lp += gate_log_probs(params.W[s], x_gate)[m];
    }
    return lp;
}

}  // namespace softbct
