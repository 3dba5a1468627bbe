#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include <nlohmann/json.hpp>

#include "softbct/dataset.hpp"
#include "softbct/model_io.hpp"

using namespace softbct;
using nlohmann::json;

namespace {

FitState fitted_example(std::uint64_t seed = 3) {
    GeneratorSpec gen;
    gen.lag = 1;
    gen.thresholds = {0.0};
    gen.regimes = {{{0.9, 0.4}, 0.4}, {{-0.9, -0.4}, 0.4}};
    gen.n = 250;
    gen.seed = seed;
    const SimulationResult sim = simulate_setar(gen);

    RunConfig c;
    c.branching = 2;
    c.max_depth = 2;
    c.gate_lags = 2;
    c.ar_lags = 1;
    c.gating.restricted = true;
    c.gating.thresholds = {0.0};
    c.max_iters = 10;
    return fit(sim.data, c);
}

}  // namespace

TEST_CASE("model document carries the full schema") {
    const FitState st = fitted_example();
    const json j = model_to_json(st);
    CHECK(j.at("schema") == "softbct-model-v1");
    CHECK(j.at("nodes").size() == 7);
    CHECK(j.at("accumulators").size() == 7);
    CHECK(j.at("gating").at("weights").size() == 3);
    CHECK(j.at("gating").at("prior").contains("eta"));
    CHECK(j.at("gating").at("prior").contains("L"));
    const json& node = j.at("nodes")[0];
    for (const char* key : {"depth", "g_prime", "log_phi", "log_gamma", "mu_prime",
                            "lambda_prime", "a_prime", "b_prime", "trace_q"})
        CHECK(node.contains(key));
    CHECK(j.at("config").at("gating").at("thresholds").size() == 1);
}

TEST_CASE("save/load round trip preserves behaviour and bytes") {
    const FitState st = fitted_example();
    save_model("/tmp/softbct_model.json", st);
    FitState loaded = load_model("/tmp/softbct_model.json");

    // same posterior state
    for (int s = 0; s < st.shape.node_count(); ++s) {
        CHECK(loaded.tree_post.g_prime[s] == st.tree_post.g_prime[s]);
        CHECK(loaded.posteriors[s].mu() == st.posteriors[s].mu());
        CHECK(loaded.posteriors[s].a() == st.posteriors[s].a());
        CHECK(loaded.posteriors[s].b() == st.posteriors[s].b());
    }

    // identical forecasts
    Eigen::VectorXd x_ar(2), x_gate(3);
    x_ar << 1.0, 0.3;
    x_gate << 1.0, 0.3, -0.8;
    CHECK(predict(loaded, x_ar, x_gate).value == predict(st, x_ar, x_gate).value);

    // re-serialization is byte-identical
    save_model("/tmp/softbct_model2.json", loaded);
    auto slurp = [](const char* p) {
        FILE* f = std::fopen(p, "rb");
        REQUIRE(f);
        std::string s;
        char buf[4096];
        size_t k;
        while ((k = std::fread(buf, 1, sizeof(buf), f)) > 0) s.append(buf, k);
        std::fclose(f);
        return s;
    };
    CHECK(slurp("/tmp/softbct_model.json") == slurp("/tmp/softbct_model2.json"));

    // streaming resumes identically from the loaded accumulators
    FitState a = st, b = loaded;
    sequential_update(a, 0.5, x_ar, x_gate, 2);
    sequential_update(b, 0.5, x_ar, x_gate, 2);
    for (int s = 0; s < a.shape.node_count(); ++s) {
        CHECK(a.posteriors[s].b() == b.posteriors[s].b());
        CHECK(a.posteriors[s].mu() == b.posteriors[s].mu());
    }

    CHECK_THROWS_AS(model_from_json(json{{"schema", "other"}}), std::runtime_error);
}

TEST_CASE("fit reruns from the embedded config reproduce diagnostics") {
    const FitState st = fitted_example(9);
    const json j = model_to_json(st);

    GeneratorSpec gen;
    gen.lag = 1;
    gen.thresholds = {0.0};
    gen.regimes = {{{0.9, 0.4}, 0.4}, {{-0.9, -0.4}, 0.4}};
    gen.n = 250;
    gen.seed = 9;
    const SimulationResult sim = simulate_setar(gen);

    const FitState again = fit(sim.data, config_from_json(j.at("config")));
    CHECK(again.diag.iterations == st.diag.iterations);
    CHECK(again.diag.last_change == st.diag.last_change);
    CHECK(model_to_json(again).dump() == j.dump());
}

TEST_CASE("report serializations") {
    const FitState st = fitted_example();
    const MapModelReport map = report_map_model(st);
    const json mj = map_report_to_json(map);
    CHECK(mj.contains("map_tree"));
    CHECK(mj.at("leaf_models").size() == map.leaves.size());
    const std::string text = map_report_to_text(map);
    CHECK(text.find("MAP tree") != std::string::npos);

    MseReport mse;
    mse.mse = 0.25;
    mse.train_n = 10;
    mse.test_n = 5;
    mse.squared_errors = {0.1, 0.4};
    mse.predictions = {1.0, 2.0};
    mse.fit_seconds = 1.23;
    const json plain = mse_report_to_json(mse, false);
    CHECK(!plain.contains("fit_seconds"));
    const json timed = mse_report_to_json(mse, true);
    CHECK(timed.at("fit_seconds") == 1.23);
    CHECK(mse_report_to_text(mse).find("MSE") != std::string::npos);
}
