// Command-line front end: simulate / fit / predict / evaluate / map-tree /
// inspect. Exit codes: 0 success, 1 usage or input error, 2 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "softbct/common.hpp"
#include "softbct/config.hpp"
#include "softbct/dataset.hpp"
#include "softbct/engine.hpp"
#include "softbct/model_io.hpp"
#include "softbct/predictor.hpp"

using namespace softbct;
using nlohmann::json;

namespace {

std::vector<double> parse_double_list(const std::string& text, char sep = ',') {
    std::vector<double> out;
    std::string field;
    std::stringstream ss(text);
    while (std::getline(ss, field, sep)) {
        if (field.empty()) continue;
        std::size_t used = 0;
        out.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::runtime_error("cannot parse number '" + field + "'");
    }
    return out;
}

// "c0,c1,...:sd" -> one autoregressive regime
RegimeSpec parse_regime(const std::string& text) {
    const auto colon = text.find(':');
    RegimeSpec r;
    r.coeffs = parse_double_list(colon == std::string::npos ? text : text.substr(0, colon));
    if (r.coeffs.empty()) throw std::runtime_error("regime needs at least an intercept");
    if (colon != std::string::npos) r.noise_sd = std::stod(text.substr(colon + 1));
    return r;
}

std::string resolve_preset(const std::string& name) {
    namespace fs = std::filesystem;
    if (fs::exists(name)) return name;
    const std::string local = "presets/" + name + ".json";
    if (fs::exists(local)) return local;
    throw std::runtime_error("preset '" + name + "' not found (looked for ./" + local + ")");
}

struct ConfigFlags {
    std::string config_path;
    std::string preset;
    std::string mode;
    bool restricted = false;
    std::int64_t seed = -1;
    int max_iters = -1;
    double tol = -1.0;
    std::string h_grid;

    void attach(CLI::App* cmd) {
        auto* cfg = cmd->add_option("--config", config_path, "config file (JSON or TOML)");
        auto* preset_opt =
            cmd->add_option("--preset", preset, "named preset (presets/<name>.json) or path");
        cfg->excludes(preset_opt);
        cmd->add_option("--mode", mode, "gating mode: soft or hard")
            ->check(CLI::IsMember({"soft", "hard"}));
        cmd->add_flag("--restricted-weights", restricted,
                      "one active lag (depth+1) per split node");
        cmd->add_option("--seed", seed, "seed recorded in the resolved config");
        cmd->add_option("--max-iters", max_iters, "cap on variational sweeps");
        cmd->add_option("--tol", tol, "convergence tolerance");
        cmd->add_option("--h-grid", h_grid,
                        "candidate thresholds, ';' between candidates, ',' within");
    }

    RunConfig resolve() const {
        RunConfig c;
        if (!config_path.empty())
            c = load_config(config_path);
        else if (!preset.empty())
            c = load_config(resolve_preset(preset));
        if (mode == "hard") c.gating.hard = true;
        if (mode == "soft") c.gating.hard = false;
        if (restricted) c.gating.restricted = true;
        if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
        if (max_iters >= 0) c.max_iters = max_iters;
        if (tol >= 0.0) c.tol = tol;
        validate(c);
        return c;
    }

    std::vector<std::vector<double>> grid_candidates() const {
        std::vector<std::vector<double>> out;
        std::string field;
        std::stringstream ss(h_grid);
        while (std::getline(ss, field, ';'))
            if (!field.empty()) out.push_back(parse_double_list(field));
        return out;
    }
};

struct DataFlags {
    std::string data_path;
    std::string context_path;
    int context_rows = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--data", data_path, "series CSV, one value per line")->required();
        auto* ctx = cmd->add_option("--context", context_path, "initial-context CSV");
        cmd->add_option("--context-rows", context_rows,
                        "treat the first N data rows as pre-sample context")
            ->excludes(ctx);
    }

    TimeSeriesDataset load() const { return load_csv(data_path, context_path, context_rows); }
};

// in-sample one-step MSE of a frozen fit, used to score threshold candidates
double training_mse(const FitState& state, const TimeSeriesDataset& data) {
    TimeSeriesDataset d = data;
    d.ensure_context(state.config.context_length());
    double sum = 0.0;
    for (int t = 1; t <= d.n(); ++t) {
        const double pred = predict(state, d.design_row(t, state.config.ar_lags),
                                    d.design_row(t, state.config.gate_lags))
                                .value;
        const double err = pred - d.values()[t - 1];
        sum += err * err;
    }
    return sum / d.n();
}

RunConfig apply_threshold_grid(RunConfig config, const TimeSeriesDataset& train,
                               const std::vector<std::vector<double>>& candidates) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_h;
    for (const auto& h : candidates) {
        RunConfig c = config;
        c.gating.thresholds = h;
        validate(c);
        const double mse = training_mse(fit(train, c), train);
        std::cerr << "  h = [";
        for (std::size_t i = 0; i < h.size(); ++i) std::cerr << (i ? ", " : "") << h[i];
        std::cerr << "] -> training MSE " << mse << "\n";
        if (mse < best) {
            best = mse;
            best_h = h;
        }
    }
    config.gating.thresholds = best_h;
    return config;
}

void warn_if_padded(const TimeSeriesDataset& data) {
    if (data.context_was_padded())
        std::cerr << "warning: no initial context supplied; padded with the series mean\n";
}

int cmd_simulate(const std::string& out, const std::string& context_out,
                 const std::string& truth_out, GeneratorSpec spec,
                 const std::vector<std::string>& regime_args,
                 const std::string& thresholds_arg) {
    spec.thresholds = parse_double_list(thresholds_arg);
    for (const auto& r : regime_args) spec.regimes.push_back(parse_regime(r));
    const SimulationResult sim = simulate_setar(spec);
    save_csv(out, sim.data.values());
    if (!context_out.empty()) save_csv(context_out, sim.data.context());
    if (!truth_out.empty()) {
        json regimes = json::array();
        for (const auto& r : spec.regimes)
            regimes.push_back(json{{"coeffs", r.coeffs}, {"noise_sd", r.noise_sd}});
        write_json(truth_out, json{{"lag", spec.lag},
                                   {"thresholds", spec.thresholds},
                                   {"steepness", spec.steepness},
                                   {"regimes", regimes},
                                   {"seed", spec.seed},
                                   {"n", spec.n},
                                   {"context", sim.data.context()},
                                   {"labels", sim.labels}});
    }
    std::cerr << "wrote " << sim.data.n() << " values to " << out << "\n";
    return 0;
}

int cmd_fit(const ConfigFlags& cf, const DataFlags& df, const std::string& model_out) {
    RunConfig config = cf.resolve();
    TimeSeriesDataset data = df.load();
    data.ensure_context(config.context_length());
    warn_if_padded(data);
    const auto grid = cf.grid_candidates();
    if (!grid.empty()) config = apply_threshold_grid(config, data, grid);
    const FitState state = fit(data, config);
    save_model(model_out, state);
    std::cerr << "fit " << (state.diag.converged ? "converged" : "did not converge") << " after "
              << state.diag.iterations << " iteration(s), last change " << state.diag.last_change
              << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const DataFlags& df, const std::string& out) {
    const FitState state = load_model(model_path);
    TimeSeriesDataset data = df.load();
    data.ensure_context(state.config.context_length());
    warn_if_padded(data);
    std::vector<double> preds;
    preds.reserve(data.n());
    for (int t = 1; t <= data.n(); ++t)
        preds.push_back(predict(state, data.design_row(t, state.config.ar_lags),
                                data.design_row(t, state.config.gate_lags))
                            .value);
    save_csv(out, preds, "prediction");
    std::cerr << "wrote " << preds.size() << " one-step predictions to " << out << "\n";
    return 0;
}

int cmd_evaluate(const ConfigFlags& cf, const DataFlags& df, double split, bool no_sequential,
                 int inner_iters, const std::string& report_out, const std::string& preds_out,
                 const std::string& model_out, bool timing) {
    RunConfig config = cf.resolve();
    TimeSeriesDataset data = df.load();
    data.ensure_context(config.context_length());
    warn_if_padded(data);

    const auto grid = cf.grid_candidates();
    if (!grid.empty()) {
        const int train_n = static_cast<int>(split * data.n());
        if (train_n < 1) throw std::runtime_error("evaluate: empty training prefix");
        TimeSeriesDataset train(
            std::vector<double>(data.values().begin(), data.values().begin() + train_n),
            data.context());
        config = apply_threshold_grid(config, train, grid);
    }

    SequentialConfig seq;
    seq.enabled = !no_sequential;
    seq.inner_iters = inner_iters;
    const MseReport report = evaluate_mse(data, config, split, seq);

    std::cout << mse_report_to_text(report);
    std::cerr << "fit " << report.fit_seconds << " s, evaluation " << report.eval_seconds
              << " s\n";
    if (!report_out.empty()) write_json(report_out, mse_report_to_json(report, timing));
    if (!preds_out.empty()) save_csv(preds_out, report.predictions, "prediction");
    if (!model_out.empty()) {
        // refit on the training prefix only, for inspection alongside the report
        TimeSeriesDataset train(
            std::vector<double>(data.values().begin(),
                                data.values().begin() + report.train_n),
            data.context());
        save_model(model_out, fit(train, config));
    }
    return 0;
}

int cmd_map_tree(const std::string& model_path, bool as_json) {
    const FitState state = load_model(model_path);
    const MapModelReport report = report_map_model(state);
    if (as_json)
        std::cout << map_report_to_json(report).dump(2) << "\n";
    else
        std::cout << map_report_to_text(report);
    return 0;
}

int cmd_inspect(const std::string& model_path) {
    const FitState state = load_model(model_path);
    const RunConfig& c = state.config;
    std::cout << "softbct model (schema v1)\n"
              << "  branching " << c.branching << ", max depth " << c.max_depth << ", gate lags "
              << c.gate_lags << ", ar lags " << c.ar_lags << "\n"
              << "  gating: " << (c.gating.hard ? "hard" : "soft")
              << (c.gating.restricted ? ", restricted weights" : "") << "\n"
              << "  thresholds:";
    for (double h : c.gating.thresholds) std::cout << " " << h;
    std::cout << "\n  leaf prior: a = " << c.leaf_prior.a << ", b = " << c.leaf_prior.b << "\n"
              << "  fit: " << (state.diag.converged ? "converged" : "not converged") << " after "
              << state.diag.iterations << " iteration(s)\n"
              << "  observations absorbed: " << state.stats[0].weight << "\n";
    const Subtree map = map_tree(state.shape, state.tree_post);
    std::cout << "  MAP tree: " << map.inner.size() << " split(s), " << map.leaves.size()
              << " leaf(s)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soft Bayesian context trees for real-valued time series"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a threshold-switching series");
    std::string sim_out, sim_context_out, sim_truth_out, sim_thresholds = "0.0";
    std::vector<std::string> sim_regimes;
    GeneratorSpec gen;
    sim->add_option("--out", sim_out, "series CSV")->required();
    sim->add_option("--context-out", sim_context_out, "pre-sample context CSV");
    sim->add_option("--truth", sim_truth_out, "generator spec and labels JSON");
    sim->add_option("--n", gen.n, "series length")->required();
    sim->add_option("--seed", gen.seed, "generator seed")->required();
    sim->add_option("--lag", gen.lag, "threshold lag");
    sim->add_option("--thresholds", sim_thresholds, "regime boundaries, comma separated");
    sim->add_option("--steepness", gen.steepness, "0 = hard switching, >0 logistic routing");
    sim->add_option("--burn-in", gen.burn_in, "discarded warm-up steps");
    sim->add_option("--context-len", gen.context_len, "pre-sample values to export");
    sim->add_option("--regime", sim_regimes, "one regime as 'c0,c1,...:noise_sd' (repeatable)")
        ->required();

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "variational fit, writes a model file");
    ConfigFlags fit_cf;
    DataFlags fit_df;
    std::string fit_out;
    fit_cf.attach(fit_cmd);
    fit_df.attach(fit_cmd);
    fit_cmd->add_option("--out", fit_out, "model JSON")->required();

    // predict
    auto* pred = app.add_subcommand("predict", "one-step predictions from a model file");
    DataFlags pred_df;
    std::string pred_model, pred_out;
    pred->add_option("--model", pred_model, "model JSON")->required();
    pred_df.attach(pred);
    pred->add_option("--out", pred_out, "predictions CSV")->required();

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "train/test split with predict-then-update");
    ConfigFlags eval_cf;
    DataFlags eval_df;
    double eval_split = 0.5;
    bool eval_no_seq = false, eval_timing = false;
    int eval_inner = -1;
    std::string eval_report, eval_preds, eval_model;
    eval_cf.attach(eval);
    eval_df.attach(eval);
    eval->add_option("--split", eval_split, "training fraction (default 0.5)");
    eval->add_flag("--no-sequential", eval_no_seq, "freeze the model over the test span");
    eval->add_option("--inner-iters", eval_inner, "refinement passes per streamed point");
    eval->add_option("--report", eval_report, "MSE report JSON");
    eval->add_option("--preds-out", eval_preds, "per-step predictions CSV");
    eval->add_option("--model-out", eval_model, "also save the training-prefix model");
    eval->add_flag("--timing", eval_timing, "embed wall-clock times in the report JSON");

    // map-tree / inspect
    auto* mt = app.add_subcommand("map-tree", "print the MAP model report");
    std::string mt_model;
    bool mt_json = false;
    mt->add_option("--model", mt_model, "model JSON")->required();
    mt->add_flag("--json", mt_json, "emit JSON instead of text");

    auto* ins = app.add_subcommand("inspect", "print a model summary");
    std::string ins_model;
    ins->add_option("--model", ins_model, "model JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_out, sim_context_out, sim_truth_out, gen, sim_regimes,
                                sim_thresholds);
        if (fit_cmd->parsed()) return cmd_fit(fit_cf, fit_df, fit_out);
        if (pred->parsed()) return cmd_predict(pred_model, pred_df, pred_out);
        if (eval->parsed())
            return cmd_evaluate(eval_cf, eval_df, eval_split, eval_no_seq, eval_inner,
                                eval_report, eval_preds, eval_model, eval_timing);
        if (mt->parsed()) return cmd_map_tree(mt_model, mt_json);
        if (ins->parsed()) return cmd_inspect(ins_model);
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
