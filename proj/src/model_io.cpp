#include "softbct/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace softbct {

using nlohmann::json;

namespace {

json matrix_row_major(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    return out;
}

json matrix_rows(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

Eigen::MatrixXd matrix_from_rows(const json& j, int rows, int cols) {
    if (static_cast<int>(j.size()) != rows)
        throw std::runtime_error("model: matrix row count mismatch");
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols)
            throw std::runtime_error("model: matrix column count mismatch");
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Eigen::MatrixXd matrix_from_row_major(const json& j, int rows, int cols) {
    if (static_cast<int>(j.size()) != rows * cols)
        throw std::runtime_error("model: matrix entry count mismatch");
    Eigen::MatrixXd m(rows, cols);
    int k = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = j[k++].get<double>();
    return m;
}

json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

}  // namespace

json model_to_json(const FitState& state) {
    const int N = state.shape.node_count();

    json weights = json::array();
    for (const auto& W : state.gating.W) weights.push_back(matrix_rows(W));

    json nodes = json::array();
    for (int s = 0; s < N; ++s) {
        const LeafPosterior& p = state.posteriors[s];
        nodes.push_back(json{{"depth", state.shape.depth(s)},
                             {"g_prime", state.tree_post.g_prime[s]},
                             {"log_phi", state.tree_post.log_phi[s]},
                             {"log_gamma", state.tree_post.log_gamma[s]},
                             {"mu_prime", vector_json(p.mu())},
                             {"lambda_prime", matrix_row_major(p.lambda())},
                             {"a_prime", p.a()},
                             {"b_prime", p.b()},
                             {"trace_q", p.trace_q()}});
    }

    json acc = json::array();
    for (int s = 0; s < N; ++s) {
        const LeafStats& st = state.stats[s];
        const Eigen::MatrixXd gram = st.gram.selfadjointView<Eigen::Lower>();
        acc.push_back(json{{"gram", matrix_row_major(gram)},
                           {"xy", vector_json(st.xy)},
                           {"yy", st.yy},
                           {"weight", st.weight}});
    }

    return json{{"schema", "softbct-model-v1"},
                {"config", config_to_json(state.config)},
                {"gating",
                 json{{"prior", json{{"eta", matrix_rows(state.shared_eta)},
                                     {"L", matrix_row_major(state.L)}}},
                      {"weights", weights}}},
                {"nodes", nodes},
                {"accumulators", acc},
                {"diagnostics", json{{"iterations", state.diag.iterations},
                                     {"converged", state.diag.converged},
                                     {"last_change", state.diag.last_change},
                                     {"change_tree", state.diag.change_tree},
                                     {"change_leaf", state.diag.change_leaf},
                                     {"change_gating", state.diag.change_gating},
                                     {"newton_stalls", state.diag.newton_stalls},
                                     {"gradient_fallbacks", state.diag.gradient_fallbacks},
                                     {"context_padded", state.diag.context_padded}}}};
}

FitState model_from_json(const json& j) {
    if (j.value("schema", "") != "softbct-model-v1")
        throw std::runtime_error("model: unsupported schema");
    FitState state = make_initial_state(config_from_json(j.at("config")));

    const int M = state.config.branching;
    const int cols = state.config.gate_lags + 1;
    const int dim = state.config.ar_lags + 1;
    const json& weights = j.at("gating").at("weights");
    if (static_cast<int>(weights.size()) != state.shape.inner_count())
        throw std::runtime_error("model: gating weight count mismatch");
    for (int s = 0; s < state.shape.inner_count(); ++s)
        state.gating.W[s] = matrix_from_rows(weights[s], M, cols);

    const json& acc = j.at("accumulators");
    if (static_cast<int>(acc.size()) != state.shape.node_count())
        throw std::runtime_error("model: accumulator count mismatch");
    for (int s = 0; s < state.shape.node_count(); ++s) {
        LeafStats st(dim);
        st.gram = matrix_from_row_major(acc[s].at("gram"), dim, dim);
        st.xy = vector_from_json(acc[s].at("xy"));
        st.yy = acc[s].at("yy").get<double>();
        st.weight = acc[s].at("weight").get<double>();
        state.stats[s] = std::move(st);
    }
    refresh_from_stats(state);

    if (j.contains("diagnostics")) {
        const json& d = j.at("diagnostics");
        state.diag.iterations = d.value("iterations", 0);
        state.diag.converged = d.value("converged", false);
        state.diag.last_change = d.value("last_change", 0.0);
        state.diag.change_tree = d.value("change_tree", 0.0);
        state.diag.change_leaf = d.value("change_leaf", 0.0);
        state.diag.change_gating = d.value("change_gating", 0.0);
        state.diag.newton_stalls = d.value("newton_stalls", 0);
        state.diag.gradient_fallbacks = d.value("gradient_fallbacks", 0);
        state.diag.context_padded = d.value("context_padded", false);
    }
    return state;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

void save_model(const std::string& path, const FitState& state) {
    write_json(path, model_to_json(state));
}

FitState load_model(const std::string& path) { return model_from_json(read_json(path)); }

json map_report_to_json(const MapModelReport& report) {
    json leaves = json::array();
    for (const auto& l : report.leaves)
        leaves.push_back(json{{"node", l.node},
                              {"depth", l.depth},
                              {"mu_prime", vector_json(l.mu)},
                              {"precision_mean", l.precision_mean}});
    json inners = json::array();
    for (const auto& s : report.inners)
        inners.push_back(json{{"node", s.node},
                              {"depth", s.depth},
                              {"active_lag", s.active_lag},
                              {"weights", matrix_row_major(s.weights)},
                              {"boundaries", s.boundaries}});
    return json{{"map_tree", json{{"inner", report.tree.inner}, {"leaves", report.tree.leaves}}},
                {"leaf_models", leaves},
                {"splits", inners}};
}

std::string map_report_to_text(const MapModelReport& report) {
    std::ostringstream out;
    out << "MAP tree: " << report.tree.inner.size() << " split(s), "
        << report.tree.leaves.size() << " leaf(s)\n";
    for (const auto& s : report.inners) {
        out << "  split node " << s.node << " (depth " << s.depth << ")";
        if (s.active_lag > 0) {
            out << " on lag " << s.active_lag;
            if (!s.boundaries.empty()) {
                out << ", boundaries:";
                for (double b : s.boundaries) out << " " << b;
            }
        }
        out << "\n";
    }
    for (const auto& l : report.leaves) {
        out << "  leaf node " << l.node << " (depth " << l.depth << "): mu' = [";
        for (Eigen::Index i = 0; i < l.mu.size(); ++i)
            out << (i ? ", " : "") << l.mu[i];
        out << "], mean precision = " << l.precision_mean << "\n";
    }
    return out.str();
}

json mse_report_to_json(const MseReport& report, bool include_timing) {
    json j{{"mse", report.mse},
           {"train_n", report.train_n},
           {"test_n", report.test_n},
           {"converged", report.converged},
           {"iterations", report.iterations},
           {"squared_errors", report.squared_errors},
           {"predictions", report.predictions}};
    if (include_timing) {
        j["fit_seconds"] = report.fit_seconds;
        j["eval_seconds"] = report.eval_seconds;
    }
    return j;
}

std::string mse_report_to_text(const MseReport& report) {
    std::ostringstream out;
    out << "train n = " << report.train_n << ", test n = " << report.test_n
        << ", fit " << (report.converged ? "converged" : "did not converge") << " after "
        << report.iterations << " iteration(s)\n"
        << "test MSE = " << report.mse << "\n";
    return out.str();
}

}  // namespace softbct
