#include "softbct/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "softbct/common.hpp"

namespace softbct {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

TreePrior make_tree_prior(const TreeShape& shape, const TreePriorConfig& cfg) {
    switch (cfg.kind) {
        case TreePriorConfig::Kind::Constant:
            return TreePrior::constant(shape, cfg.value);
        case TreePriorConfig::Kind::DepthPower:
            return TreePrior::depth_power(shape, cfg.base);
        case TreePriorConfig::Kind::PerDepth:
            return TreePrior::per_depth(shape, cfg.per_depth);
    }
    throw std::logic_error("unreachable tree prior kind");
}

LeafPrior make_leaf_prior(const RunConfig& c) {
    const int dim = c.ar_lags + 1;
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(dim);
    if (!c.leaf_prior.mu.empty())
        mu = Eigen::Map<const Eigen::VectorXd>(c.leaf_prior.mu.data(), dim);
    Eigen::MatrixXd lambda;
    if (!c.leaf_prior.lambda.empty())
        lambda = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>(c.leaf_prior.lambda.data(),
                                                                  dim, dim);
    else
        lambda = c.leaf_prior.lambda_scale * Eigen::MatrixXd::Identity(dim, dim);
    return LeafPrior(std::move(mu), std::move(lambda), c.leaf_prior.a, c.leaf_prior.b);
}

Eigen::MatrixXd make_gating_precision(const RunConfig& c) {
    const int dim = c.gate_lags + 1;
    if (!c.gating.L.empty()) {
        if (static_cast<int>(c.gating.L.size()) != dim * dim)
            throw std::invalid_argument("config: gating L must be (gate_lags+1)^2 values");
        return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(c.gating.L.data(), dim, dim);
    }
    return c.gating.precision * Eigen::MatrixXd::Identity(dim, dim);
}

Eigen::MatrixXd make_shared_eta(const RunConfig& c) {
    const int M = c.branching, cols = c.gate_lags + 1;
    if (!c.gating.eta.empty()) {
        Eigen::MatrixXd eta(M, cols);
        for (int m = 0; m < M; ++m)
            for (int j = 0; j < cols; ++j) eta(m, j) = c.gating.eta[m][j];
        return eta;
    }
    if (c.max_depth >= 1 && !c.gating.thresholds.empty())
        return eta_schedule(c.gating.thresholds, c.gating.steepness, M, c.gate_lags,
                            std::max(1, c.gating.active_lag));
    return Eigen::MatrixXd::Zero(M, cols);
}

}  // namespace

FitState::FitState(const RunConfig& cfg)
    : config(cfg),
      shape(cfg.branching, cfg.max_depth),
      tree_prior(make_tree_prior(shape, cfg.tree_prior)),
      leaf_prior(make_leaf_prior(cfg)),
      L(make_gating_precision(cfg)),
      shared_eta(make_shared_eta(cfg)) {
    const int N = shape.node_count();
    const int inner = shape.inner_count();

    eta.resize(inner);
    active_lag.assign(inner, 0);
    for (int s = 0; s < inner; ++s) {
        if (cfg.gating.restricted) {
            const int lag = shape.depth(s) + 1;
            active_lag[s] = lag;
            eta[s] = cfg.gating.thresholds.empty()
                         ? Eigen::MatrixXd::Zero(cfg.branching, cfg.gate_lags + 1)
                         : eta_schedule(cfg.gating.thresholds, cfg.gating.steepness,
                                        cfg.branching, cfg.gate_lags, lag);
        } else {
            eta[s] = shared_eta;
        }
    }
    gating.W = eta;  // initial weights at the prior mean

    stats.assign(N, LeafStats(cfg.ar_lags + 1));
    posteriors.resize(N);
    for (int s = 0; s < N; ++s) posteriors[s] = LeafPosterior(leaf_prior, stats[s]);
    tree_post = update_tree_posterior(shape, tree_prior, std::vector<double>(N, 0.0));
}

FitState make_initial_state(const RunConfig& config) {
    validate(config);
    return FitState(config);
}

DesignView build_design(const TimeSeriesDataset& data, int ar_lags, int gate_lags) {
    DesignView d;
    d.X_ar = data.design_matrix(ar_lags);
    d.X_gate = data.design_matrix(gate_lags);
    d.y = Eigen::Map<const Eigen::VectorXd>(data.values().data(), data.n());
    return d;
}

std::vector<double> quantile_thresholds(const std::vector<double>& values, int branching) {
    if (values.empty()) throw std::invalid_argument("quantile_thresholds: empty series");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double last = static_cast<double>(sorted.size() - 1);
    std::vector<double> h(branching - 1);
    for (int m = 1; m < branching; ++m) {
        const double pos = last * m / branching;
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        h[m - 1] = sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Responsibilities
// ---------------------------------------------------------------------------

namespace {

struct RespScratch {
    std::vector<double> log_rho;    // per node, edge into the node
    std::vector<double> gate_log;   // inner_count x M
    std::vector<double> child_buf;  // M
    Eigen::VectorXd logits;         // M
    Eigen::VectorXd solve_buf;      // K+1
};

// Log gate vectors at every inner node for one observation, written into
// the scratch without temporaries.
void fill_gate_logs(const FitState& st, const Eigen::VectorXd& x_gate, RespScratch& ws) {
    const int M = st.shape.branching();
    ws.gate_log.resize(static_cast<std::size_t>(st.shape.inner_count()) * M);
    ws.logits.resize(M);
    for (int s = 0; s < st.shape.inner_count(); ++s) {
        ws.logits.noalias() = st.gating.W[s] * x_gate;
        if (!ws.logits.allFinite())
            throw NumericError("responsibilities: non-finite gate logits at node " +
                               std::to_string(s));
        double* out = ws.gate_log.data() + static_cast<std::size_t>(s) * M;
        if (st.config.gating.hard) {
            int best = 0;
            for (int m = 1; m < M; ++m)
                if (ws.logits[m] > ws.logits[best]) best = m;
            for (int m = 0; m < M; ++m) out[m] = (m == best) ? 0.0 : kNegInf;
        } else {
            const double mx = ws.logits.maxCoeff();
            double z = 0.0;
            for (int m = 0; m < M; ++m) z += std::exp(ws.logits[m] - mx);
            const double lse = mx + std::log(z);
            for (int m = 0; m < M; ++m) out[m] = ws.logits[m] - lse;
        }
    }
}

// One observation: bottom-up rho, then top-down edge normalization and path
// weights. edge/q must point at node_count doubles each.
void point_responsibilities(const FitState& st, const std::vector<double>& leaf_marg,
                            double y, const Eigen::VectorXd& x_ar,
                            const Eigen::VectorXd& x_gate, RespScratch& ws, double* edge,
                            double* q, int t_label) {
    const TreeShape& sh = st.shape;
    const int N = sh.node_count();
    const int M = sh.branching();

    fill_gate_logs(st, x_gate, ws);
    ws.log_rho.resize(N);
    ws.child_buf.resize(M);

    ws.solve_buf.resize(x_ar.size());
    for (int s = N - 1; s >= 1; --s) {
        const int parent = sh.parent(s);
        const int m = sh.child_index(s);
        double lr = ws.gate_log[static_cast<std::size_t>(parent) * M + m];
        lr += expected_loglik_term(st.posteriors[s], leaf_marg[s], y, x_ar, ws.solve_buf);
        if (sh.is_inner(s)) {
            for (int c = 0; c < M; ++c) ws.child_buf[c] = ws.log_rho[sh.child(s, c)];
            lr += log_sum_exp(ws.child_buf.data(), M);
        }
        if (std::isnan(lr) || lr == std::numeric_limits<double>::infinity())
            throw NumericError("responsibilities: non-finite rho at t=" +
                               std::to_string(t_label) + ", node=" + std::to_string(s));
        ws.log_rho[s] = lr;
    }

    edge[0] = 1.0;
    q[0] = 1.0;
    for (int s = 0; s < sh.inner_count(); ++s) {
        for (int c = 0; c < M; ++c) ws.child_buf[c] = ws.log_rho[sh.child(s, c)];
        const double lse = log_sum_exp(ws.child_buf.data(), M);
        if (!std::isfinite(lse))
            throw NumericError("responsibilities: all-zero edge weights at t=" +
                               std::to_string(t_label) + ", node=" + std::to_string(s));
        for (int c = 0; c < M; ++c) {
            const int child = sh.child(s, c);
            edge[child] = std::exp(ws.child_buf[c] - lse);
            q[child] = q[s] * edge[child];
        }
    }
}

}  // namespace

void compute_responsibilities(FitState& state, const DesignView& design) {
    const int n = design.n();
    const int N = state.shape.node_count();
    state.resp.n = n;
    state.resp.nodes = N;
    state.resp.edge.assign(static_cast<std::size_t>(n) * N, 0.0);
    state.resp.node_weight.assign(static_cast<std::size_t>(n) * N, 0.0);

    const std::vector<double> leaf_marg = all_leaf_marginals(state.shape, state.tree_post);
    RespScratch ws;
    for (int t = 0; t < n; ++t) {
        const Eigen::VectorXd x_ar = design.X_ar.row(t).transpose();
        const Eigen::VectorXd x_gate = design.X_gate.row(t).transpose();
        point_responsibilities(state, leaf_marg, design.y[t], x_ar, x_gate, ws,
                               state.resp.edge.data() + static_cast<std::size_t>(t) * N,
                               state.resp.node_weight.data() + static_cast<std::size_t>(t) * N,
                               t + 1);
    }
}

void init_responsibilities(FitState& state, const DesignView& design) {
    const TreeShape& sh = state.shape;
    const int n = design.n();
    const int N = sh.node_count();
    const int M = sh.branching();
    state.resp.n = n;
    state.resp.nodes = N;
    state.resp.edge.assign(static_cast<std::size_t>(n) * N, 0.0);
    state.resp.node_weight.assign(static_cast<std::size_t>(n) * N, 0.0);

    const std::vector<double>& h = state.config.gating.thresholds;
    for (int t = 0; t < n; ++t) {
        double* edge = state.resp.edge.data() + static_cast<std::size_t>(t) * N;
        double* q = state.resp.node_weight.data() + static_cast<std::size_t>(t) * N;
        edge[0] = 1.0;
        q[0] = 1.0;
        for (int s = 0; s < sh.inner_count(); ++s) {
            const int lag = state.active_lag[s] > 0 ? state.active_lag[s]
                                                    : std::max(1, state.config.gating.active_lag);
            const double v = design.X_gate(t, lag);
            int region = M - 1;
            for (int m = 0; m < M - 1; ++m) {
                if (!h.empty() && v <= h[m]) {
                    region = m;
                    break;
                }
            }
            for (int m = 0; m < M; ++m) {
                const int child = sh.child(s, m);
                edge[child] = (m == region) ? 1.0 : 0.0;
                q[child] = q[s] * edge[child];
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Model-block updates
// ---------------------------------------------------------------------------

void refresh_from_stats(FitState& state) {
    const int N = state.shape.node_count();
    std::vector<double> log_gamma(N);
    for (int s = 0; s < N; ++s) {
        state.posteriors[s] = LeafPosterior(state.leaf_prior, state.stats[s]);
        log_gamma[s] = log_node_evidence(state.leaf_prior, state.posteriors[s]);
    }
    state.tree_post = update_tree_posterior(state.shape, state.tree_prior, log_gamma);
}

void update_model_posteriors(FitState& state, const DesignView& design) {
    const int n = design.n();
    const int N = state.shape.node_count();
    if (state.resp.n != n || state.resp.nodes != N)
        throw std::invalid_argument("update_model_posteriors: responsibilities are stale");

    state.stats.assign(N, LeafStats(state.config.ar_lags + 1));
    for (int t = 0; t < n; ++t) {
        const Eigen::VectorXd x_ar = design.X_ar.row(t).transpose();
        for (int s = 0; s < N; ++s) state.stats[s].add(x_ar, design.y[t], state.resp.q(t, s));
    }
    refresh_from_stats(state);
}

// ---------------------------------------------------------------------------
// Gating objective and Newton update
// ---------------------------------------------------------------------------

double gating_objective(const FitState& state, const DesignView& design, int node) {
    const int M = state.shape.branching();
    const Eigen::MatrixXd& W = state.gating.W[node];
    double nll = 0.0;
    for (int t = 0; t < design.n(); ++t) {
        const double qt = state.resp.q(t, node);
        if (qt == 0.0) continue;
        const Eigen::VectorXd lg = gate_log_probs(W, design.X_gate.row(t).transpose());
        for (int m = 0; m < M; ++m)
            nll -= qt * state.resp.edge_prob(t, state.shape.child(node, m)) * lg[m];
    }
    double quad = 0.0;
    for (int m = 0; m < M; ++m) {
        const Eigen::VectorXd d = W.row(m).transpose() - state.eta[node].row(m).transpose();
        quad += d.dot(state.L * d);
    }
    return nll + 0.5 * quad;
}

Eigen::VectorXd gating_gradient(const FitState& state, const DesignView& design, int node) {
    const int M = state.shape.branching();
    const int cols = state.config.gate_lags + 1;
    const Eigen::MatrixXd& W = state.gating.W[node];
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(M, cols);
    for (int t = 0; t < design.n(); ++t) {
        const double qt = state.resp.q(t, node);
        if (qt == 0.0) continue;
        const Eigen::VectorXd x = design.X_gate.row(t).transpose();
        const Eigen::VectorXd p = softmax(W * x);
        for (int m = 0; m < M; ++m) {
            const double pi = state.resp.edge_prob(t, state.shape.child(node, m));
            grad.row(m).noalias() -= qt * (pi - p[m]) * x.transpose();
        }
    }
    for (int m = 0; m < M; ++m)
        grad.row(m).noalias() +=
            (state.L * (W.row(m).transpose() - state.eta[node].row(m).transpose())).transpose();

    Eigen::VectorXd flat(M * cols);
    for (int m = 0; m < M; ++m) flat.segment(m * cols, cols) = grad.row(m).transpose();
    return flat;
}

Eigen::MatrixXd gating_hessian(const FitState& state, const DesignView& design, int node) {
    const int M = state.shape.branching();
    const int cols = state.config.gate_lags + 1;
    const Eigen::MatrixXd& W = state.gating.W[node];
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(M * cols, M * cols);
    for (int t = 0; t < design.n(); ++t) {
        const double qt = state.resp.q(t, node);
        if (qt == 0.0) continue;
        const Eigen::VectorXd x = design.X_gate.row(t).transpose();
        const Eigen::VectorXd p = softmax(W * x);
        const Eigen::MatrixXd xx = x * x.transpose();
        for (int m = 0; m < M; ++m)
            for (int mp = 0; mp < M; ++mp) {
                const double coef = qt * p[mp] * ((m == mp ? 1.0 : 0.0) - p[m]);
                if (coef != 0.0) H.block(m * cols, mp * cols, cols, cols) += coef * xx;
            }
    }
    for (int m = 0; m < M; ++m) H.block(m * cols, m * cols, cols, cols) += state.L;
    return H;
}

std::vector<int> free_gating_coordinates(const FitState& state, int node) {
    const int M = state.shape.branching();
    const int cols = state.config.gate_lags + 1;
    std::vector<int> idx;
    if (state.active_lag[node] == 0) {
        idx.resize(M * cols);
        for (int i = 0; i < M * cols; ++i) idx[i] = i;
    } else {
        for (int m = 0; m < M; ++m) {
            idx.push_back(m * cols);
            idx.push_back(m * cols + state.active_lag[node]);
        }
    }
    return idx;
}

namespace {

// E(w) for a candidate weight matrix at one node without Eigen temporaries;
// the hot call of the backtracking line search.
double objective_at(const FitState& state, const DesignView& design, int node,
                    const Eigen::MatrixXd& W, Eigen::VectorXd& logits) {
    const int M = state.shape.branching();
    double nll = 0.0;
    for (int t = 0; t < design.n(); ++t) {
        const double qt = state.resp.q(t, node);
        if (qt == 0.0) continue;
        logits.noalias() = W * design.X_gate.row(t).transpose();
        const double mx = logits.maxCoeff();
        double z = 0.0;
        for (int m = 0; m < M; ++m) z += std::exp(logits[m] - mx);
        const double lse = mx + std::log(z);
        for (int m = 0; m < M; ++m)
            nll -= qt * state.resp.edge_prob(t, state.shape.child(node, m)) * (logits[m] - lse);
    }
    double quad = 0.0;
    for (int m = 0; m < M; ++m) {
        const Eigen::VectorXd d = W.row(m).transpose() - state.eta[node].row(m).transpose();
        quad += d.dot(state.L * d);
    }
    return nll + 0.5 * quad;
}

}  // namespace

void newton_system(const FitState& state, const DesignView& design, int node,
                   Eigen::VectorXd& gradient, Eigen::MatrixXd& hessian) {
    const int M = state.shape.branching();
    const int cols = state.config.gate_lags + 1;
    const Eigen::MatrixXd& W = state.gating.W[node];
    const std::vector<int> free = free_gating_coordinates(state, node);
    const int f = static_cast<int>(free.size());

    gradient.setZero(f);
    hessian.setZero(f, f);

    std::vector<int> row(f), col(f);
    for (int i = 0; i < f; ++i) {
        row[i] = free[i] / cols;
        col[i] = free[i] % cols;
    }

    Eigen::VectorXd logits(M), probs(M), edges(M);
    for (int t = 0; t < design.n(); ++t) {
        const double qt = state.resp.q(t, node);
        if (qt == 0.0) continue;
        const auto x = design.X_gate.row(t);
        logits.noalias() = W * x.transpose();
        const double mx = logits.maxCoeff();
        double z = 0.0;
        for (int m = 0; m < M; ++m) z += (probs[m] = std::exp(logits[m] - mx));
        probs /= z;
        for (int m = 0; m < M; ++m) edges[m] = state.resp.edge_prob(t, state.shape.child(node, m));

        for (int i = 0; i < f; ++i) {
            gradient[i] -= qt * (edges[row[i]] - probs[row[i]]) * x[col[i]];
            for (int j = i; j < f; ++j) {
                const double delta = row[i] == row[j] ? 1.0 : 0.0;
                hessian(i, j) += qt * probs[row[j]] * (delta - probs[row[i]]) * x[col[i]] * x[col[j]];
            }
        }
    }
    for (int i = 0; i < f; ++i) {
        gradient[i] +=
            state.L.row(col[i]).dot(W.row(row[i]) - state.eta[node].row(row[i]));
        for (int j = i; j < f; ++j)
            if (row[i] == row[j]) hessian(i, j) += state.L(col[i], col[j]);
    }
    hessian.triangularView<Eigen::StrictlyLower>() = hessian.transpose();
}

bool newton_step_w(FitState& state, const DesignView& design, int node) {
    const int cols = state.config.gate_lags + 1;
    const std::vector<int> free = free_gating_coordinates(state, node);
    const int f = static_cast<int>(free.size());

    Eigen::VectorXd g;
    Eigen::MatrixXd Hf;
    newton_system(state, design, node, g, Hf);
    if (g.isZero(0.0)) return true;  // already at the stationary point

    Eigen::VectorXd direction(f);
    Eigen::LLT<Eigen::MatrixXd> llt(Hf);
    if (llt.info() == Eigen::Success) {
        direction = -llt.solve(g);
    } else {
        // fixed small gradient step when the curvature is unusable
        direction = -1e-2 / (1.0 + g.norm()) * g;
        ++state.diag.gradient_fallbacks;
    }

    Eigen::VectorXd logits(state.shape.branching());
    const Eigen::MatrixXd w0 = state.gating.W[node];
    const double e0 = objective_at(state, design, node, w0, logits);

    // the quadratic model promises a decrease of -g.d/2 for the full Newton
    // step; below double precision no line search can verify one
    const double predicted = -0.5 * g.dot(direction);
    if (predicted <= 1e-14 * (1.0 + std::abs(e0))) return true;

    Eigen::MatrixXd w = w0;
    double alpha = 1.0;
    for (int halving = 0; halving <= 20; ++halving) {
        w = w0;
        for (int i = 0; i < f; ++i)
            w(free[i] / cols, free[i] % cols) += alpha * direction[i];
        if (objective_at(state, design, node, w, logits) < e0) {
            state.gating.W[node] = w;
            return true;
        }
        alpha *= 0.5;
    }
    ++state.diag.newton_stalls;
    return false;
}

// ---------------------------------------------------------------------------
// Full fit loop
// ---------------------------------------------------------------------------

namespace {

// (g', posterior means, vectorized W) flattened per block for the
// convergence metric.
struct ParameterSnapshot {
    Eigen::VectorXd tree;
    Eigen::VectorXd leaf;
    Eigen::VectorXd gating;
};

ParameterSnapshot parameter_snapshot(const FitState& st) {
    const int N = st.shape.node_count();
    const int dim = st.config.ar_lags + 1;
    const int wsize = st.shape.inner_count() * st.shape.branching() * (st.config.gate_lags + 1);
    ParameterSnapshot snap;
    snap.tree.resize(N);
    snap.leaf.resize(N * dim);
    snap.gating.resize(wsize);
    for (int s = 0; s < N; ++s) snap.tree[s] = st.tree_post.g_prime[s];
    for (int s = 0; s < N; ++s) snap.leaf.segment(s * dim, dim) = st.posteriors[s].mu();
    int k = 0;
    for (const auto& W : st.gating.W)
        for (int m = 0; m < W.rows(); ++m)
            for (int j = 0; j < W.cols(); ++j) snap.gating[k++] = W(m, j);
    return snap;
}

double max_relative_change(const Eigen::VectorXd& now, const Eigen::VectorXd& before) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < now.size(); ++i)
        worst = std::max(worst, std::abs(now[i] - before[i]) / (1.0 + std::abs(before[i])));
    return worst;
}

}  // namespace

FitState fit(const TimeSeriesDataset& data_in, RunConfig config) {
    validate(config);
    if (data_in.n() < 1) throw std::invalid_argument("fit: need at least one observation");

    TimeSeriesDataset data = data_in;
    const bool padded = data.ensure_context(config.context_length());

    // resolve the threshold schedule against the training data once
    if (config.max_depth >= 1 && config.gating.thresholds.empty())
        config.gating.thresholds = quantile_thresholds(data.values(), config.branching);

    FitState state = make_initial_state(config);
    state.diag.context_padded = padded || data.context_was_padded();

    const DesignView design = build_design(data, config.ar_lags, config.gate_lags);
    init_responsibilities(state, design);
    update_model_posteriors(state, design);

    const bool update_w = !config.gating.hard && !config.gating.freeze_weights;
    ParameterSnapshot before = parameter_snapshot(state);
    for (int iter = 1; iter <= config.max_iters; ++iter) {
        compute_responsibilities(state, design);
        update_model_posteriors(state, design);
        if (update_w)
            for (int s = 0; s < state.shape.inner_count(); ++s) newton_step_w(state, design, s);

        const ParameterSnapshot now = parameter_snapshot(state);
        state.diag.iterations = iter;
        state.diag.change_tree = max_relative_change(now.tree, before.tree);
        state.diag.change_leaf = max_relative_change(now.leaf, before.leaf);
        state.diag.change_gating = max_relative_change(now.gating, before.gating);
        state.diag.last_change = std::max(
            {state.diag.change_tree, state.diag.change_leaf, state.diag.change_gating});
        before = now;
        if (state.diag.last_change < config.tol) {
            state.diag.converged = true;
            break;
        }
    }
    return state;
}

// ---------------------------------------------------------------------------
// Streaming updates
// ---------------------------------------------------------------------------

std::vector<double> point_node_weights(const FitState& state, double y,
                                       const Eigen::VectorXd& x_ar,
                                       const Eigen::VectorXd& x_gate) {
    const int N = state.shape.node_count();
    const std::vector<double> leaf_marg = all_leaf_marginals(state.shape, state.tree_post);
    RespScratch ws;
    std::vector<double> edge(N), q(N);
    point_responsibilities(state, leaf_marg, y, x_ar, x_gate, ws, edge.data(), q.data(), 0);
    return q;
}

void ingest_point(FitState& state, double y, const Eigen::VectorXd& x_ar,
                  const std::vector<double>& node_weights) {
    if (static_cast<int>(node_weights.size()) != state.shape.node_count())
        throw std::invalid_argument("ingest_point: weight vector size mismatch");
    for (int s = 0; s < state.shape.node_count(); ++s)
        state.stats[s].add(x_ar, y, node_weights[s]);
    refresh_from_stats(state);
}

void sequential_update(FitState& state, double y, const Eigen::VectorXd& x_ar,
                       const Eigen::VectorXd& x_gate, int inner_iters) {
    if (inner_iters < 0) inner_iters = state.config.inner_iters;
    if (inner_iters < 1) inner_iters = 1;
    const std::vector<LeafStats> base = state.stats;
    for (int it = 0; it < inner_iters; ++it) {
        const std::vector<double> q = point_node_weights(state, y, x_ar, x_gate);
        state.stats = base;
        ingest_point(state, y, x_ar, q);
    }
}

}  // namespace softbct
