#pragma once

#include <vector>

#include <Eigen/Core>

#include "softbct/config.hpp"
#include "softbct/dataset.hpp"
#include "softbct/gating.hpp"
#include "softbct/leaf_model.hpp"
#include "softbct/tree.hpp"

namespace softbct {

/// Per-fit design: y[t-1] = x_t, row t-1 of X_ar is [1, x_{t-1}, ..., x_{t-K}],
/// row t-1 of X_gate is [1, x_{t-1}, ..., x_{t-J}].
struct DesignView {
    Eigen::MatrixXd X_ar;
    Eigen::MatrixXd X_gate;
    Eigen::VectorXd y;
    int n() const { return static_cast<int>(y.size()); }
};

DesignView build_design(const TimeSeriesDataset& data, int ar_lags, int gate_lags);

/// Soft path assignments of every observation:
/// edge[t*nodes + s] is the probability of taking the edge into s from its
/// parent (1 at the root); node_weight[t*nodes + s] is q_{s,t}, the product
/// of edge probabilities along the root-to-s path.
struct Responsibilities {
    int n = 0;
    int nodes = 0;
    std::vector<double> edge;
    std::vector<double> node_weight;

    double edge_prob(int t, int s) const { return edge[static_cast<std::size_t>(t) * nodes + s]; }
    double q(int t, int s) const { return node_weight[static_cast<std::size_t>(t) * nodes + s]; }
};

struct FitDiagnostics {
    int iterations = 0;
    bool converged = false;
    double last_change = 0.0;        // max over the three blocks below
    double change_tree = 0.0;        // g'
    double change_leaf = 0.0;        // posterior means
    double change_gating = 0.0;      // vectorized W
    int newton_stalls = 0;           // backtracking exhausted, step skipped
    int gradient_fallbacks = 0;      // Hessian factorization failed
    bool context_padded = false;
};

/// Full variational state: priors, gating weights, per-node posteriors and
/// accumulated sufficient statistics, tree posterior, last responsibilities.
struct FitState {
    RunConfig config;
    TreeShape shape;
    TreePrior tree_prior;
    LeafPrior leaf_prior;
    Eigen::MatrixXd L;                   // shared gating precision
    Eigen::MatrixXd shared_eta;          // M x (J+1) schedule/override means
    std::vector<Eigen::MatrixXd> eta;    // effective prior means per inner node
    std::vector<int> active_lag;         // per inner node; 0 = all lags free
    GatingParams gating;                 // W per inner node
    std::vector<LeafStats> stats;        // per node
    std::vector<LeafPosterior> posteriors;  // per node
    TreePosterior tree_post;
    Responsibilities resp;
    FitDiagnostics diag;

    explicit FitState(const RunConfig& config);
};

/// Fresh prior state: W = eta, empty statistics, gamma = 1, g' = g.
FitState make_initial_state(const RunConfig& config);

/// Hard-threshold initial responsibilities: each observation is routed down
/// one path by comparing the node's active lag against the configured
/// thresholds.
void init_responsibilities(FitState& state, const DesignView& design);

/// One E-step: the bottom-up rho recursion and top-down normalization,
/// filling state.resp from the current posteriors, tree posterior and
/// gating weights.
void compute_responsibilities(FitState& state, const DesignView& design);

/// One M-step over the model block: refreshes every node's weighted
/// posterior and evidence from state.resp, then the tree posterior.
void update_model_posteriors(FitState& state, const DesignView& design);

/// Rebuilds posteriors, evidences and the tree posterior from the
/// accumulated sufficient statistics (streaming path).
void refresh_from_stats(FitState& state);

/// Regularized gating objective E(w_s) at one inner node under the current
/// responsibilities, and its exact derivatives (full coordinates).
double gating_objective(const FitState& state, const DesignView& design, int node);
Eigen::VectorXd gating_gradient(const FitState& state, const DesignView& design, int node);
Eigen::MatrixXd gating_hessian(const FitState& state, const DesignView& design, int node);

/// Flat coordinate indices the Newton step may move at this node: all of
/// them, or intercept + active lag per row in restricted mode.
std::vector<int> free_gating_coordinates(const FitState& state, int node);

/// Gradient and Hessian of E(w_s) restricted to the free coordinates,
/// assembled in one pass (equals the full derivatives subset; the full
/// versions above stay as the reference implementation).
void newton_system(const FitState& state, const DesignView& design, int node,
                   Eigen::VectorXd& gradient, Eigen::MatrixXd& hessian);

/// One damped Newton step on E(w_s): solve, backtrack by halving until the
/// objective decreases (at most 20 halvings, else leave w unchanged and
/// count a stall). Masked coordinates stay pinned at their prior mean.
/// Returns true if the step was accepted.
bool newton_step_w(FitState& state, const DesignView& design, int node);

/// Full variational loop: init, then sweeps of
/// responsibilities -> posteriors -> Newton (unless frozen) until the
/// largest relative parameter change drops below config.tol.
FitState fit(const TimeSeriesDataset& data, RunConfig config);

/// Responsibility weights q_s of a single observation under the current
/// state (weights, posteriors and tree posterior held fixed).
std::vector<double> point_node_weights(const FitState& state, double y,
                                       const Eigen::VectorXd& x_ar,
                                       const Eigen::VectorXd& x_gate);

/// Adds one observation to the accumulators with the given per-node
/// weights and refreshes the posteriors. Exposed for streaming replays.
void ingest_point(FitState& state, double y, const Eigen::VectorXd& x_ar,
                  const std::vector<double>& node_weights);

/// Streaming update with frozen gating weights: recompute the new point's
/// responsibilities and the posterior refresh inner_iters times (past
/// points keep their accumulated weights), then commit.
void sequential_update(FitState& state, double y, const Eigen::VectorXd& x_ar,
                       const Eigen::VectorXd& x_gate, int inner_iters = -1);

/// Training quantiles m/M used when no thresholds are configured.
std::vector<double> quantile_thresholds(const std::vector<double>& values, int branching);

}  // namespace softbct
