#include "softbct/predictor.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "softbct/gating.hpp"

namespace softbct {

Forecast predict(const FitState& state, const Eigen::VectorXd& x_ar,
                 const Eigen::VectorXd& x_gate, bool want_trace) {
    const TreeShape& sh = state.shape;
    if (x_ar.size() != state.config.ar_lags + 1)
        throw std::invalid_argument("predict: AR regressor dimension mismatch");
    if (sh.inner_count() > 0 && x_gate.size() != state.config.gate_lags + 1)
        throw std::invalid_argument("predict: gate regressor dimension mismatch");

    std::vector<double> zeta(sh.node_count());
    for (int s = sh.node_count() - 1; s >= 0; --s) {
        const double local = state.posteriors[s].mu().dot(x_ar);
        if (sh.is_deepest(s)) {
            zeta[s] = local;
            continue;
        }
        const Eigen::VectorXd p = state.config.gating.hard
                                      ? hard_gate_probs(state.gating.W[s], x_gate)
                                      : gate_probs(state.gating.W[s], x_gate);
        double mix = 0.0;
        for (int m = 0; m < sh.branching(); ++m) mix += p[m] * zeta[sh.child(s, m)];
        const double gp = state.tree_post.g_prime[s];
        zeta[s] = (1.0 - gp) * local + gp * mix;
    }

    Forecast f;
    f.value = zeta[0];
    if (want_trace) f.node_values = std::move(zeta);
    return f;
}

MseReport evaluate_mse(const TimeSeriesDataset& data_in, const RunConfig& config, double split,
                       const SequentialConfig& seq) {
    using clock = std::chrono::steady_clock;

    TimeSeriesDataset data = data_in;
    data.ensure_context(config.context_length());

    const int n = data.n();
    const int train_n = static_cast<int>(split * n);
    if (train_n < 1 || train_n >= n)
        throw std::invalid_argument("evaluate_mse: split leaves an empty train or test segment");

    TimeSeriesDataset train(
        std::vector<double>(data.values().begin(), data.values().begin() + train_n),
        data.context());

    const auto t0 = clock::now();
    FitState state = fit(train, config);
    const auto t1 = clock::now();

    MseReport report;
    report.train_n = train_n;
    report.test_n = n - train_n;
    report.converged = state.diag.converged;
    report.iterations = state.diag.iterations;

    double sum_sq = 0.0;
    for (int t = train_n + 1; t <= n; ++t) {
        const Eigen::VectorXd x_ar = data.design_row(t, config.ar_lags);
        const Eigen::VectorXd x_gate = data.design_row(t, config.gate_lags);
        const double actual = data.values()[t - 1];
        const double pred = predict(state, x_ar, x_gate).value;
        const double err = pred - actual;
        report.predictions.push_back(pred);
        report.actuals.push_back(actual);
        report.squared_errors.push_back(err * err);
        sum_sq += err * err;
        if (seq.enabled) sequential_update(state, actual, x_ar, x_gate, seq.inner_iters);
    }
    const auto t2 = clock::now();

    report.mse = sum_sq / report.test_n;
    report.fit_seconds = std::chrono::duration<double>(t1 - t0).count();
    report.eval_seconds = std::chrono::duration<double>(t2 - t1).count();
    return report;
}

namespace {

// Crossing of adjacent gate logits along the single active lag, by bisection.
bool logit_crossing(const Eigen::MatrixXd& W, int m, int lag, double& out) {
    auto f = [&](double v) {
        return (W(m, 0) + W(m, lag) * v) - (W(m + 1, 0) + W(m + 1, lag) * v);
    };
    double lo = -1e6, hi = 1e6;
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) {
        out = lo;
        return true;
    }
    if (flo * fhi > 0.0) return false;  // parallel logits, no boundary
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
            out = mid;
            return true;
        }
        if (flo * fm < 0.0)
            hi = mid;
        else {
            lo = mid;
            flo = fm;
        }
    }
    out = 0.5 * (lo + hi);
    return true;
}

}  // namespace

MapModelReport report_map_model(const FitState& state) {
    MapModelReport report;
    report.tree = map_tree(state.shape, state.tree_post);

    for (int s : report.tree.leaves) {
        MapLeafReport leaf;
        leaf.node = s;
        leaf.depth = state.shape.depth(s);
        leaf.mu = state.posteriors[s].mu();
        leaf.precision_mean = state.posteriors[s].a() / state.posteriors[s].b();
        report.leaves.push_back(std::move(leaf));
    }
    for (int s : report.tree.inner) {
        MapInnerReport inner;
        inner.node = s;
        inner.depth = state.shape.depth(s);
        inner.active_lag = state.active_lag[s];
        inner.weights = state.gating.W[s];
        if (inner.active_lag > 0) {
            for (int m = 0; m + 1 < state.shape.branching(); ++m) {
                double v;
                if (logit_crossing(inner.weights, m, inner.active_lag, v))
                    inner.boundaries.push_back(v);
            }
        }
        report.inners.push_back(std::move(inner));
    }
    return report;
}

}  // namespace softbct
