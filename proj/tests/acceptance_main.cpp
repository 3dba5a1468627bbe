// Acceptance suite: every criterion prints exactly one PASS/FAIL line and
// the process exits nonzero if any of them failed. Budgets are wall-clock
// seconds measured around the whole criterion body.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "softbct/config.hpp"
#include "softbct/dataset.hpp"
#include "softbct/engine.hpp"
#include "softbct/gating.hpp"
#include "softbct/model_io.hpp"
#include "softbct/predictor.hpp"
#include "softbct/tree.hpp"

using namespace softbct;
using namespace softbct::testing;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw CheckFailure(what);
}

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-12, std::abs(want));
}

int g_failures = 0;

void criterion(int id, const std::string& name, double budget_seconds,
               const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string failure;
    try {
        body();
    } catch (const std::exception& e) {
        failure = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (failure.empty() && elapsed > budget_seconds) {
        std::ostringstream os;
        os << "runtime " << elapsed << " s exceeds budget " << budget_seconds << " s";
        failure = os.str();
    }
    if (failure.empty()) {
        std::printf("criterion %d (%s): PASS [%.2f s]\n", id, name.c_str(), elapsed);
    } else {
        std::printf("criterion %d (%s): FAIL — %s\n", id, name.c_str(), failure.c_str());
        ++g_failures;
    }
}

TimeSeriesDataset ar_series(int n, std::uint64_t seed, int context) {
    GaussianSampler rng(seed);
    std::vector<double> ctx(context), values(n);
    for (double& v : ctx) v = rng.normal();
    double prev = ctx.empty() ? 0.0 : ctx.back();
    for (double& v : values) {
        v = 0.3 + 0.5 * prev + rng.normal();
        prev = v;
    }
    return TimeSeriesDataset(std::move(values), std::move(ctx));
}

GeneratorSpec two_regime_generator(std::uint64_t seed, double steepness) {
    GeneratorSpec gen;
    gen.lag = 1;
    gen.thresholds = {0.0};
    gen.regimes = {{{1.0, 0.5}, 0.3}, {{-1.0, -0.5}, 0.3}};
    gen.steepness = steepness;
    gen.n = 2000;
    gen.seed = seed;
    gen.context_len = 2;
    return gen;
}

RunConfig two_regime_config(bool hard) {
    RunConfig c;
    c.branching = 2;
    c.max_depth = 2;
    c.gate_lags = 2;
    c.ar_lags = 1;
    c.gating.hard = hard;
    c.gating.restricted = true;
    c.gating.thresholds = {0.0};
    c.gating.steepness = 10.0;
    c.leaf_prior.a = 0.1;
    c.leaf_prior.b = 0.1;
    c.max_iters = 50;
    return c;
}

// --------------------------------------------------------------------------

void conjugacy_oracle() {
    const int n = 500, K = 3;
    const TimeSeriesDataset data = ar_series(n, 1001, K);

    RunConfig c;
    c.branching = 2;
    c.max_depth = 0;
    c.gate_lags = 0;
    c.ar_lags = K;
    c.leaf_prior.a = 0.1;
    c.leaf_prior.b = 0.1;
    const FitState st = fit(data, c);

    const DesignView design = build_design(data, K, 0);
    SequentialNormalGamma oracle(st.leaf_prior.mu(), st.leaf_prior.lambda(), st.leaf_prior.a(),
                                 st.leaf_prior.b());
    for (int t = 0; t < n; ++t) oracle.observe(design.X_ar.row(t).transpose(), design.y[t]);

    const LeafPosterior& post = st.posteriors[0];
    require(rel_err(post.a(), oracle.a) < 1e-10, "a' mismatch");
    require(rel_err(post.b(), oracle.b) < 1e-10, "b' mismatch");
    for (int j = 0; j <= K; ++j)
        require(rel_err(post.mu()[j], oracle.mu[j]) < 1e-10, "mu' mismatch");
    const Eigen::MatrixXd lambda_oracle = oracle.lambda();
    for (int r = 0; r <= K; ++r)
        for (int col = 0; col <= K; ++col)
            require(rel_err(post.lambda()(r, col), lambda_oracle(r, col)) < 1e-10,
                    "Lambda' mismatch");
    require(rel_err(st.tree_post.log_gamma[0], oracle.log_evidence) < 1e-8,
            "log evidence mismatch");
}

void tree_enumeration() {
    const TreeShape sh(2, 2);
    const TreePrior prior = TreePrior::constant(sh, 0.5);
    const auto trees = enumerate_subtrees(sh);
    require(trees.size() == 5, "expected 5 subtrees for M=2, D=2");

    GaussianSampler rng(2002);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> lg(sh.node_count());
        for (double& v : lg) v = -8.0 + 16.0 * rng.uniform();
        const TreePosterior post = update_tree_posterior(sh, prior, lg);

        std::vector<double> logw;
        for (const auto& t : trees) {
            double w = subtree_log_prob(t, prior.g());
            for (int s : t.leaves) w += lg[s];
            logw.push_back(w);
        }
        const double mx = *std::max_element(logw.begin(), logw.end());
        double z = 0.0;
        for (double& w : logw) z += (w = std::exp(w - mx));

        for (std::size_t i = 0; i < trees.size(); ++i) {
            const double want = logw[i] / z;
            const double got = std::exp(subtree_log_prob(trees[i], post.g_prime));
            require(std::abs(got - want) < 1e-10, "product-form posterior deviates");
        }
        for (int s = 0; s < sh.node_count(); ++s) {
            double want = 0.0;
            for (std::size_t i = 0; i < trees.size(); ++i)
                for (int leaf : trees[i].leaves)
                    if (leaf == s) want += logw[i] / z;
            require(std::abs(node_leaf_marginal(sh, post, s) - want) < 1e-10,
                    "leaf marginal deviates");
        }
    }
}

void responsibility_oracle() {
    RunConfig c;
    c.branching = 3;
    c.max_depth = 2;
    c.gate_lags = 2;
    c.ar_lags = 2;
    c.gating.thresholds = {-0.4, 0.4};
    c.gating.steepness = 3.0;
    c.max_iters = 3;

    const TimeSeriesDataset data = ar_series(50, 3003, 2);
    FitState st = fit(data, c);
    // randomize the gates so the comparison is not at a symmetric point
    GaussianSampler rng(33);
    for (auto& W : st.gating.W)
        for (int r = 0; r < W.rows(); ++r)
            for (int col = 0; col < W.cols(); ++col) W(r, col) += 0.5 * rng.normal();

    const DesignView design = build_design(data, c.ar_lags, c.gate_lags);
    compute_responsibilities(st, design);
    for (int t = 0; t < design.n(); ++t) {
        const PathWeights oracle = brute_force_responsibilities(
            st, design.y[t], design.X_ar.row(t).transpose(), design.X_gate.row(t).transpose());
        for (int s = 0; s < st.shape.node_count(); ++s)
            require(std::abs(st.resp.q(t, s) - oracle.q[s]) < 1e-10,
                    "recursion deviates from the 27-path normalization at t=" +
                        std::to_string(t + 1));
    }
}

void derivative_checks() {
    RunConfig c;
    c.branching = 3;
    c.max_depth = 1;
    c.gate_lags = 2;
    c.ar_lags = 1;
    c.gating.thresholds = {-0.4, 0.4};
    c.max_iters = 2;

    const TimeSeriesDataset data = ar_series(40, 4004, 2);
    FitState st = fit(data, c);
    const DesignView design = build_design(data, c.ar_lags, c.gate_lags);
    compute_responsibilities(st, design);

    const int node = 0;
    const int cols = c.gate_lags + 1;
    auto set_w = [&](FitState& s, const Eigen::VectorXd& flat) {
        for (int m = 0; m < 3; ++m) s.gating.W[node].row(m) = flat.segment(m * cols, cols);
    };
    auto objective = [&](const Eigen::VectorXd& flat) {
        FitState tmp = st;
        set_w(tmp, flat);
        return gating_objective(tmp, design, node);
    };
    auto gradient = [&](const Eigen::VectorXd& flat) {
        FitState tmp = st;
        set_w(tmp, flat);
        return gating_gradient(tmp, design, node);
    };

    GaussianSampler rng(44);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::VectorXd w(3 * cols);
        for (int i = 0; i < w.size(); ++i) w[i] = 1.2 * rng.normal();
        set_w(st, w);
        const Eigen::VectorXd g = gating_gradient(st, design, node);
        const Eigen::VectorXd g_fd = fd_gradient(objective, w);
        require((g - g_fd).norm() / (1.0 + g_fd.norm()) < 1e-5, "gradient FD check");
        const Eigen::MatrixXd H = gating_hessian(st, design, node);
        const Eigen::MatrixXd H_fd = fd_jacobian(gradient, w);
        require((H - H_fd).norm() / (1.0 + H_fd.norm()) < 1e-4, "Hessian FD check");
    }

    // 100 damped steps across fresh random problems, objective never rises
    int accepted = 0;
    for (int problem = 0; accepted < 100 && problem < 20; ++problem) {
        const TimeSeriesDataset d2 = ar_series(30, 5000 + problem, 2);
        FitState s2 = fit(d2, c);
        const DesignView dv2 = build_design(d2, c.ar_lags, c.gate_lags);
        compute_responsibilities(s2, dv2);
        Eigen::VectorXd w(3 * cols);
        for (int i = 0; i < w.size(); ++i) w[i] = 2.0 * rng.normal();
        set_w(s2, w);
        double prev = gating_objective(s2, dv2, node);
        for (int step = 0; step < 10; ++step) {
            if (!newton_step_w(s2, dv2, node)) break;
            const double now = gating_objective(s2, dv2, node);
            require(now <= prev + 1e-12, "objective increased across an accepted step");
            prev = now;
            ++accepted;
        }
    }
    require(accepted >= 100, "could not collect 100 accepted Newton steps");
}

void normalization_suite() {
    GaussianSampler rng(6006);

    // softmax simplex and shift invariance
    for (int rep = 0; rep < 1000; ++rep) {
        const int M = 2 + static_cast<int>(rng.uniform() * 4);
        Eigen::VectorXd v(M);
        for (int i = 0; i < M; ++i) v[i] = 30.0 * rng.normal();
        const Eigen::VectorXd p = softmax(v);
        require(std::abs(p.sum() - 1.0) < 1e-12, "softmax does not sum to one");
        require(p.minCoeff() > 0.0, "softmax left the open simplex");
        const Eigen::VectorXd q = softmax(v.array() + 50.0 * rng.normal());
        require((p - q).lpNorm<Eigen::Infinity>() < 1e-12, "softmax is not shift invariant");
    }

    // fuzzed responsibility configurations
    for (int rep = 0; rep < 1000; ++rep) {
        RunConfig c;
        c.branching = 2 + static_cast<int>(rng.uniform() * 3);
        c.max_depth = static_cast<int>(rng.uniform() * 4);
        c.gate_lags = 1 + static_cast<int>(rng.uniform() * 2);
        c.ar_lags = static_cast<int>(rng.uniform() * 3);
        c.gating.thresholds.clear();
        for (int m = 0; m < c.branching - 1; ++m)
            c.gating.thresholds.push_back(-1.0 + 2.0 * m / std::max(1, c.branching - 1));
        c.gating.steepness = 0.5 + 5.0 * rng.uniform();

        FitState st = make_initial_state(c);
        // random gates and random node statistics
        for (auto& W : st.gating.W)
            for (int r = 0; r < W.rows(); ++r)
                for (int col = 0; col < W.cols(); ++col) W(r, col) = 2.0 * rng.normal();
        for (auto& stats : st.stats)
            for (int k = 0; k < 3; ++k) {
                Eigen::VectorXd x(c.ar_lags + 1);
                x[0] = 1.0;
                for (int j = 1; j <= c.ar_lags; ++j) x[j] = rng.normal();
                stats.add(x, rng.normal(), rng.uniform());
            }
        refresh_from_stats(st);

        const TimeSeriesDataset data = ar_series(3, 7000 + rep, std::max(c.gate_lags, c.ar_lags));
        const DesignView design = build_design(data, c.ar_lags, c.gate_lags);
        compute_responsibilities(st, design);

        for (int t = 0; t < design.n(); ++t) {
            require(st.resp.q(t, 0) == 1.0, "root weight is not one");
            double deepest = 0.0;
            for (int s = 0; s < st.shape.node_count(); ++s) {
                if (st.shape.is_inner(s)) {
                    double edges = 0.0;
                    for (int m = 0; m < c.branching; ++m)
                        edges += st.resp.edge_prob(t, st.shape.child(s, m));
                    require(std::abs(edges - 1.0) < 1e-12, "edge probabilities do not sum to one");
                } else {
                    deepest += st.resp.q(t, s);
                }
            }
            require(std::abs(deepest - 1.0) < 1e-12, "deepest-level weights do not sum to one");
        }
    }
}

void setar_recovery() {
    int tree_hits = 0, coeff_hits = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const SimulationResult sim = simulate_setar(two_regime_generator(seed, 0.0));
        const FitState st = fit(sim.data, two_regime_config(false));
        const Subtree map = map_tree(st.shape, st.tree_post);
        const bool tree_ok =
            map.inner == std::vector<int>{0} && map.leaves == std::vector<int>{1, 2};
        if (!tree_ok) continue;
        ++tree_hits;
        const bool coeffs_ok = std::abs(st.posteriors[1].mu()[0] - 1.0) < 0.1 &&
                               std::abs(st.posteriors[1].mu()[1] - 0.5) < 0.1 &&
                               std::abs(st.posteriors[2].mu()[0] + 1.0) < 0.1 &&
                               std::abs(st.posteriors[2].mu()[1] + 0.5) < 0.1;
        if (coeffs_ok) ++coeff_hits;
    }
    require(tree_hits >= 9, "MAP tree recovered only " + std::to_string(tree_hits) + "/10");
    require(coeff_hits >= 9,
            "leaf coefficients within 0.1 in only " + std::to_string(coeff_hits) + "/10");
}

void table_pattern() {
    // hard-split generator: the hard baseline must not trail the soft model
    // by more than 15%
    {
        const SimulationResult sim = simulate_setar(two_regime_generator(42, 0.0));
        const double soft = evaluate_mse(sim.data, two_regime_config(false), 0.5).mse;
        const double hard = evaluate_mse(sim.data, two_regime_config(true), 0.5).mse;
        std::ostringstream os;
        os << "hard generator: soft MSE " << soft << ", hard MSE " << hard;
        require(hard <= soft * 1.15, os.str());
    }
    // smoothed-transition generator: the soft model must win
    {
        const SimulationResult sim = simulate_setar(two_regime_generator(2, 2.0));
        const double soft = evaluate_mse(sim.data, two_regime_config(false), 0.5).mse;
        const double hard = evaluate_mse(sim.data, two_regime_config(true), 0.5).mse;
        std::ostringstream os;
        os << "smooth generator: soft MSE " << soft << ", hard MSE " << hard;
        require(soft <= hard, os.str());
    }
}

void streaming_identity() {
    RunConfig c = two_regime_config(false);
    c.max_iters = 5;
    const SimulationResult sim = simulate_setar(two_regime_generator(8, 0.0));
    TimeSeriesDataset data(
        std::vector<double>(sim.data.values().begin(), sim.data.values().begin() + 200),
        sim.data.context());

    FitState batch = fit(data, c);
    const DesignView design = build_design(data, c.ar_lags, c.gate_lags);
    compute_responsibilities(batch, design);
    update_model_posteriors(batch, design);

    FitState stream = make_initial_state(batch.config);
    stream.gating = batch.gating;
    for (int t = 0; t < design.n(); ++t) {
        std::vector<double> q(batch.shape.node_count());
        for (int s = 0; s < batch.shape.node_count(); ++s) q[s] = batch.resp.q(t, s);
        ingest_point(stream, design.y[t], design.X_ar.row(t).transpose(), q);
    }
    for (int s = 0; s < batch.shape.node_count(); ++s) {
        require(std::abs(stream.stats[s].weight - batch.stats[s].weight) < 1e-10,
                "trace accumulator deviates");
        require(std::abs(stream.stats[s].yy - batch.stats[s].yy) < 1e-10,
                "squared-sum accumulator deviates");
        for (int j = 0; j <= c.ar_lags; ++j)
            require(std::abs(stream.stats[s].xy[j] - batch.stats[s].xy[j]) < 1e-10,
                    "cross-product accumulator deviates");
        const Eigen::MatrixXd ga = stream.stats[s].gram.selfadjointView<Eigen::Lower>();
        const Eigen::MatrixXd gb = batch.stats[s].gram.selfadjointView<Eigen::Lower>();
        require((ga - gb).lpNorm<Eigen::Infinity>() < 1e-10, "gram accumulator deviates");
    }
}

#ifndef SOFTBCT_CLI_PATH
#define SOFTBCT_CLI_PATH "softbct"
#endif

void run_cli(const std::string& args) {
    const std::string cmd = std::string(SOFTBCT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    require(std::system(cmd.c_str()) == 0, "CLI command failed: " + args);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    require(static_cast<bool>(in), "missing artifact " + p.string());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "softbct_acceptance";
    fs::remove_all(root);

    for (const char* run : {"run1", "run2"}) {
        const fs::path dir = root / run;
        fs::create_directories(dir);
        {
            std::ofstream cfg(dir / "cfg.json");
            cfg << R"({"branching": 2, "max_depth": 2, "gate_lags": 2, "ar_lags": 1,
                       "leaf_prior": {"a": 0.1, "b": 0.1},
                       "gating": {"restricted": true, "thresholds": [0.0]},
                       "max_iters": 30})";
        }
        const std::string d = dir.string();
        run_cli("simulate --out " + d + "/sim.csv --context-out " + d +
                "/ctx.csv --truth " + d +
                "/truth.json --n 600 --seed 11 --thresholds 0.0 "
                "--regime 1.0,0.5:0.3 --regime -1.0,-0.5:0.3 --context-len 2");
        run_cli("fit --config " + d + "/cfg.json --data " + d + "/sim.csv --context " + d +
                "/ctx.csv --out " + d + "/model.json");
        run_cli("evaluate --config " + d + "/cfg.json --data " + d + "/sim.csv --context " + d +
                "/ctx.csv --split 0.5 --report " + d + "/report.json --preds-out " + d +
                "/preds.csv");
    }
    for (const char* artifact :
         {"sim.csv", "ctx.csv", "truth.json", "model.json", "report.json", "preds.csv"})
        require(slurp(root / "run1" / artifact) == slurp(root / "run2" / artifact),
                std::string(artifact) + " differs between identical runs");
}

}  // namespace

int main() {
    criterion(1, "conjugacy oracle", 1.0, conjugacy_oracle);
    criterion(2, "tree-posterior enumeration", 1.0, tree_enumeration);
    criterion(3, "responsibility oracle", 1.0, responsibility_oracle);
    criterion(4, "gradient and Hessian checks", 10.0, derivative_checks);
    criterion(5, "normalization suite", 30.0, normalization_suite);
    criterion(6, "SETAR recovery", 60.0, setar_recovery);
    criterion(7, "Table-I pattern", 120.0, table_pattern);
    criterion(8, "streaming identity", 10.0, streaming_identity);
    criterion(9, "determinism", 60.0, determinism);

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
