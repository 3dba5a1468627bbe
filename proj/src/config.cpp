#include "softbct/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace softbct {

using nlohmann::json;

void validate(const RunConfig& c) {
    if (c.branching < 2) throw std::invalid_argument("config: branching must be >= 2");
    if (c.max_depth < 0) throw std::invalid_argument("config: max_depth must be >= 0");
    if (c.ar_lags < 0) throw std::invalid_argument("config: ar_lags must be >= 0");
    if (c.gate_lags < 0) throw std::invalid_argument("config: gate_lags must be >= 0");
    if (c.max_depth >= 1 && c.gate_lags < 1)
        throw std::invalid_argument("config: gating needs gate_lags >= 1 when max_depth >= 1");
    if (c.gating.restricted && c.gate_lags < c.max_depth)
        throw std::invalid_argument(
            "config: restricted weights need gate_lags >= max_depth (lag d_s+1 per node)");
    if (!c.gating.restricted && c.max_depth >= 1 &&
        (c.gating.active_lag < 1 || c.gating.active_lag > c.gate_lags))
        throw std::invalid_argument("config: active_lag out of [1, gate_lags]");
    if (!(c.gating.steepness > 0.0))
        throw std::invalid_argument("config: gating steepness must be > 0");
    if (!c.gating.thresholds.empty() &&
        static_cast<int>(c.gating.thresholds.size()) != c.branching - 1)
        throw std::invalid_argument("config: need branching-1 thresholds");
    if (!c.gating.eta.empty()) {
        if (c.gating.restricted)
            throw std::invalid_argument(
                "config: explicit eta conflicts with restricted weights; the per-depth "
                "sparsity pattern needs the threshold schedule");
        if (static_cast<int>(c.gating.eta.size()) != c.branching)
            throw std::invalid_argument("config: explicit eta needs one row per child");
        for (const auto& row : c.gating.eta)
            if (static_cast<int>(row.size()) != c.gate_lags + 1)
                throw std::invalid_argument("config: explicit eta rows must have gate_lags+1 entries");
    }
    if (!(c.gating.precision > 0.0))
        throw std::invalid_argument("config: gating precision must be > 0");
    if (!(c.leaf_prior.a > 0.0) || !(c.leaf_prior.b > 0.0))
        throw std::invalid_argument("config: leaf prior a, b must be > 0");
    if (!c.leaf_prior.mu.empty() &&
        static_cast<int>(c.leaf_prior.mu.size()) != c.ar_lags + 1)
        throw std::invalid_argument("config: leaf prior mean must have ar_lags+1 entries");
    if (!c.leaf_prior.lambda.empty() &&
        static_cast<int>(c.leaf_prior.lambda.size()) !=
            (c.ar_lags + 1) * (c.ar_lags + 1))
        throw std::invalid_argument("config: leaf prior precision must be (ar_lags+1)^2 values");
    if (c.tree_prior.kind == TreePriorConfig::Kind::Constant &&
        !(c.tree_prior.value >= 0.0 && c.tree_prior.value <= 1.0))
        throw std::invalid_argument("config: tree prior value must lie in [0,1]");
    if (c.tree_prior.kind == TreePriorConfig::Kind::PerDepth &&
        static_cast<int>(c.tree_prior.per_depth.size()) < c.max_depth + 1)
        throw std::invalid_argument("config: per-depth tree prior needs max_depth+1 values");
    if (!(c.tol >= 0.0)) throw std::invalid_argument("config: tol must be >= 0");
    if (c.max_iters < 0) throw std::invalid_argument("config: max_iters must be >= 0");
    if (c.inner_iters < 1) throw std::invalid_argument("config: inner_iters must be >= 1");
}

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig config_from_json(const json& j) {
    RunConfig c;
    read_if(j, "branching", c.branching);
    read_if(j, "max_depth", c.max_depth);
    read_if(j, "gate_lags", c.gate_lags);
    read_if(j, "ar_lags", c.ar_lags);
    read_if(j, "tol", c.tol);
    read_if(j, "max_iters", c.max_iters);
    read_if(j, "inner_iters", c.inner_iters);
    read_if(j, "seed", c.seed);

    if (j.contains("tree_prior")) {
        const json& t = j.at("tree_prior");
        std::string kind = t.value("type", "constant");
        if (kind == "constant") {
            c.tree_prior.kind = TreePriorConfig::Kind::Constant;
            read_if(t, "value", c.tree_prior.value);
        } else if (kind == "depth_power") {
            c.tree_prior.kind = TreePriorConfig::Kind::DepthPower;
            read_if(t, "base", c.tree_prior.base);
        } else if (kind == "per_depth") {
            c.tree_prior.kind = TreePriorConfig::Kind::PerDepth;
            read_if(t, "values", c.tree_prior.per_depth);
        } else {
            throw std::invalid_argument("config: unknown tree prior type '" + kind + "'");
        }
    }
    if (j.contains("leaf_prior")) {
        const json& l = j.at("leaf_prior");
        read_if(l, "mu", c.leaf_prior.mu);
        read_if(l, "lambda_scale", c.leaf_prior.lambda_scale);
        read_if(l, "lambda", c.leaf_prior.lambda);
        read_if(l, "a", c.leaf_prior.a);
        read_if(l, "b", c.leaf_prior.b);
    }
    if (j.contains("gating")) {
        const json& g = j.at("gating");
        if (g.contains("mode")) {
            const std::string mode = g.at("mode").get<std::string>();
            if (mode == "hard")
                c.gating.hard = true;
            else if (mode != "soft")
                throw std::invalid_argument("config: gating mode must be 'soft' or 'hard'");
        }
        read_if(g, "restricted", c.gating.restricted);
        read_if(g, "freeze_weights", c.gating.freeze_weights);
        read_if(g, "thresholds", c.gating.thresholds);
        read_if(g, "steepness", c.gating.steepness);
        read_if(g, "active_lag", c.gating.active_lag);
        read_if(g, "eta", c.gating.eta);
        read_if(g, "precision", c.gating.precision);
        read_if(g, "L", c.gating.L);
    }
    validate(c);
    return c;
}

json config_to_json(const RunConfig& c) {
    json t;
    switch (c.tree_prior.kind) {
        case TreePriorConfig::Kind::Constant:
            t = {{"type", "constant"}, {"value", c.tree_prior.value}};
            break;
        case TreePriorConfig::Kind::DepthPower:
            t = {{"type", "depth_power"}, {"base", c.tree_prior.base}};
            break;
        case TreePriorConfig::Kind::PerDepth:
            t = {{"type", "per_depth"}, {"values", c.tree_prior.per_depth}};
            break;
    }
    json g = {{"mode", c.gating.hard ? "hard" : "soft"},
              {"restricted", c.gating.restricted},
              {"freeze_weights", c.gating.freeze_weights},
              {"thresholds", c.gating.thresholds},
              {"steepness", c.gating.steepness},
              {"active_lag", c.gating.active_lag},
              {"precision", c.gating.precision}};
    if (!c.gating.eta.empty()) g["eta"] = c.gating.eta;
    if (!c.gating.L.empty()) g["L"] = c.gating.L;

    json l = {{"a", c.leaf_prior.a},
              {"b", c.leaf_prior.b},
              {"lambda_scale", c.leaf_prior.lambda_scale}};
    if (!c.leaf_prior.mu.empty()) l["mu"] = c.leaf_prior.mu;
    if (!c.leaf_prior.lambda.empty()) l["lambda"] = c.leaf_prior.lambda;

    return json{{"branching", c.branching},
                {"max_depth", c.max_depth},
                {"gate_lags", c.gate_lags},
                {"ar_lags", c.ar_lags},
                {"tree_prior", t},
                {"leaf_prior", l},
                {"gating", g},
                {"tol", c.tol},
                {"max_iters", c.max_iters},
                {"inner_iters", c.inner_iters},
                {"seed", c.seed}};
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml")
        return config_from_json(toml_to_json(text));
    return config_from_json(json::parse(text));
}

// ---------------------------------------------------------------------------
// TOML subset reader: [table] headers, key = scalar | array, # comments.
// ---------------------------------------------------------------------------

namespace {

struct TomlCursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::runtime_error("toml:" + std::to_string(line) + ": " + msg);
    }
    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char take() {
        char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }
    void skip_ws(bool newlines) {
        while (!eof()) {
            char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') take();
            } else if (c == ' ' || c == '\t' || c == '\r' || (newlines && c == '\n')) {
                take();
            } else {
                break;
            }
        }
    }
};

json toml_value(TomlCursor& cur);

json toml_array(TomlCursor& cur) {
    json arr = json::array();
    cur.take();  // '['
    cur.skip_ws(true);
    if (!cur.eof() && cur.peek() == ']') {
        cur.take();
        return arr;
    }
    while (true) {
        arr.push_back(toml_value(cur));
        cur.skip_ws(true);
        if (cur.eof()) cur.fail("unterminated array");
        char c = cur.take();
        if (c == ']') break;
        if (c != ',') cur.fail("expected ',' or ']' in array");
        cur.skip_ws(true);
        if (!cur.eof() && cur.peek() == ']') {  // trailing comma
            cur.take();
            break;
        }
    }
    return arr;
}

json toml_value(TomlCursor& cur) {
    cur.skip_ws(false);
    if (cur.eof()) cur.fail("expected a value");
    char c = cur.peek();
    if (c == '[') return toml_array(cur);
    if (c == '"' || c == '\'') {
        char quote = cur.take();
        std::string s;
        while (!cur.eof() && cur.peek() != quote) {
            char d = cur.take();
            if (d == '\\' && quote == '"' && !cur.eof()) {
                char e = cur.take();
                switch (e) {
                    case 'n': s += '\n'; break;
                    case 't': s += '\t'; break;
                    case '"': s += '"'; break;
                    case '\\': s += '\\'; break;
                    default: cur.fail("unsupported escape");
                }
            } else {
                s += d;
            }
        }
        if (cur.eof()) cur.fail("unterminated string");
        cur.take();
        return json(s);
    }
    std::string token;
    while (!cur.eof()) {
        char d = cur.peek();
        if (d == '\n' || d == ',' || d == ']' || d == '#' || d == ' ' || d == '\t' || d == '\r')
            break;
        token += cur.take();
    }
    if (token == "true") return json(true);
    if (token == "false") return json(false);
    if (token.empty()) cur.fail("expected a value");
    try {
        if (token.find_first_of(".eEnN") == std::string::npos &&
            token.find("inf") == std::string::npos) {
            std::size_t used = 0;
            long long v = std::stoll(token, &used);
            if (used == token.size()) return json(v);
        }
        std::size_t used = 0;
        double v = std::stod(token, &used);
        if (used == token.size()) return json(v);
    } catch (const std::exception&) {
    }
    cur.fail("cannot parse value '" + token + "'");
}

std::string toml_key(TomlCursor& cur) {
    std::string key;
    while (!cur.eof()) {
        char c = cur.peek();
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')
            key += cur.take();
        else
            break;
    }
    if (key.empty()) cur.fail("expected a key");
    return key;
}

json* descend(json& root, const std::string& dotted) {
    json* node = &root;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        std::size_t dot = dotted.find('.', start);
        const std::string part =
            dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        node = &(*node)[part];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return node;
}

}  // namespace

json toml_to_json(const std::string& text) {
    TomlCursor cur{text};
    json root = json::object();
    json* table = &root;
    while (true) {
        cur.skip_ws(true);
        if (cur.eof()) break;
        if (cur.peek() == '[') {
            cur.take();
            cur.skip_ws(false);
            const std::string name = toml_key(cur);
            cur.skip_ws(false);
            if (cur.eof() || cur.take() != ']') cur.fail("expected ']' after table name");
            table = descend(root, name);
            if (!table->is_object() && !table->is_null()) cur.fail("table redefines a value");
            if (table->is_null()) *table = json::object();
        } else {
            const std::string key = toml_key(cur);
            cur.skip_ws(false);
            if (cur.eof() || cur.take() != '=') cur.fail("expected '=' after key");
            json* slot = descend(*table, key);
            *slot = toml_value(cur);
            cur.skip_ws(false);
            if (!cur.eof() && cur.peek() != '\n') cur.fail("unexpected trailing characters");
        }
    }
    return root;
}

}  // namespace softbct
