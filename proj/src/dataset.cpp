#include "softbct/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace softbct {

TimeSeriesDataset::TimeSeriesDataset(std::vector<double> values, std::vector<double> context)
    : values_(std::move(values)), context_(std::move(context)) {}

double TimeSeriesDataset::lagged(int t, int k) const {
    const int j = t - k;  // index into x_1..x_n, or <= 0 into the context
    if (j >= 1) return values_[j - 1];
    const int ci = static_cast<int>(context_.size()) - 1 + j;  // x_0 is context_.back()
    if (ci < 0)
        throw std::out_of_range("TimeSeriesDataset: lag reaches beyond the initial context");
    return context_[ci];
}

Eigen::VectorXd TimeSeriesDataset::design_row(int t, int lags) const {
    Eigen::VectorXd row(lags + 1);
    row[0] = 1.0;
    for (int k = 1; k <= lags; ++k) row[k] = lagged(t, k);
    return row;
}

Eigen::MatrixXd TimeSeriesDataset::design_matrix(int lags) const {
    Eigen::MatrixXd X(n(), lags + 1);
    for (int t = 1; t <= n(); ++t) X.row(t - 1) = design_row(t, lags).transpose();
    return X;
}

double TimeSeriesDataset::mean() const {
    if (values_.empty()) return 0.0;
    return std::accumulate(values_.begin(), values_.end(), 0.0) / values_.size();
}

bool TimeSeriesDataset::ensure_context(int length) {
    if (context_length() >= length) return false;
    const double pad = mean();
    context_.insert(context_.begin(), length - context_length(), pad);
    padded_ = true;
    return true;
}

namespace {

bool parse_double(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end != '\0') {
        if (!std::isspace(static_cast<unsigned char>(*end))) return false;
        ++end;
    }
    return true;
}

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<double> read_value_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string field = strip(line);
        if (field.empty()) continue;
        double v;
        if (!parse_double(field, v)) {
            if (line_no == 1 && values.empty()) continue;  // header
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": cannot parse '" + field + "' as a number");
        }
        values.push_back(v);
    }
    if (values.empty()) throw std::runtime_error(path + ": no numeric values found");
    return values;
}

TimeSeriesDataset load_csv(const std::string& series_path, const std::string& context_path,
                           int context_rows) {
    std::vector<double> values = read_value_column(series_path);
    std::vector<double> context;
    if (!context_path.empty()) {
        context = read_value_column(context_path);
    } else if (context_rows > 0) {
        if (context_rows >= static_cast<int>(values.size()))
            throw std::runtime_error(series_path + ": context rows consume the whole series");
        context.assign(values.begin(), values.begin() + context_rows);
        values.erase(values.begin(), values.begin() + context_rows);
    }
    return TimeSeriesDataset(std::move(values), std::move(context));
}

void save_csv(const std::string& path, const std::vector<double>& values,
              const std::string& header) {
    std::ofstream out(path, std::ios::binary);  // LF on every platform
    if (!out) throw std::runtime_error("cannot write " + path);
    if (!header.empty()) out << header << "\n";
    char buf[64];
    for (double v : values) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << "\n";
    }
}

double GaussianSampler::uniform() {
    // 53-bit mantissa uniform in [0, 1)
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

double GaussianSampler::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
}

SimulationResult simulate_setar(const GeneratorSpec& spec) {
    if (spec.regimes.empty()) throw std::invalid_argument("simulate_setar: no regimes");
    if (spec.thresholds.size() + 1 != spec.regimes.size())
        throw std::invalid_argument("simulate_setar: need one threshold between adjacent regimes");
    if (!std::is_sorted(spec.thresholds.begin(), spec.thresholds.end()))
        throw std::invalid_argument("simulate_setar: thresholds must be ascending");
    if (spec.lag < 1) throw std::invalid_argument("simulate_setar: lag must be >= 1");
    if (spec.n < 1) throw std::invalid_argument("simulate_setar: n must be >= 1");

    int max_order = spec.lag;
    for (const auto& r : spec.regimes)
        max_order = std::max(max_order, static_cast<int>(r.coeffs.size()) - 1);
    max_order = std::max(max_order, spec.context_len);

    const int R = static_cast<int>(spec.regimes.size());
    GaussianSampler rng(spec.seed);

    // regime by hard threshold comparison, region m = (h_{m-1}, h_m]
    auto hard_regime = [&](double v) {
        for (int m = 0; m < R - 1; ++m)
            if (v <= spec.thresholds[m]) return m;
        return R - 1;
    };
    // soft routing: linear logits whose adjacent pairs cross at the thresholds
    auto soft_regime = [&](double v) {
        std::vector<double> slope(R), intercept(R, 0.0), logit(R);
        for (int m = 0; m < R; ++m) slope[m] = -spec.steepness * (R - 1 - m);
        for (int m = R - 2; m >= 0; --m)
            intercept[m] = intercept[m + 1] + spec.thresholds[m] * (slope[m + 1] - slope[m]);
        for (int m = 0; m < R; ++m) logit[m] = intercept[m] + slope[m] * v;
        const double mx = *std::max_element(logit.begin(), logit.end());
        double z = 0.0;
        for (double& l : logit) z += (l = std::exp(l - mx));
        double u = rng.uniform() * z;
        for (int m = 0; m < R; ++m) {
            u -= logit[m];
            if (u <= 0.0) return m;
        }
        return R - 1;
    };

    std::vector<double> hist(max_order, 0.0);  // oldest first, back() is newest
    for (double& h : hist) h = rng.normal();

    const int total = spec.burn_in + spec.n;
    std::vector<double> series;
    std::vector<int> labels;
    series.reserve(spec.n);
    labels.reserve(spec.n);
    std::vector<double> context;

    for (int step = 0; step < total; ++step) {
        if (step == spec.burn_in) context = hist;  // x_{1-p}..x_0
        const double gate_value = hist[hist.size() - spec.lag];
        const int regime = (spec.steepness > 0.0) ? soft_regime(gate_value)
                                                  : hard_regime(gate_value);
        const auto& coeffs = spec.regimes[regime].coeffs;
        double x = coeffs.empty() ? 0.0 : coeffs[0];
        for (std::size_t k = 1; k < coeffs.size(); ++k)
            x += coeffs[k] * hist[hist.size() - k];
        x += spec.regimes[regime].noise_sd * rng.normal();

        if (step >= spec.burn_in) {
            series.push_back(x);
            labels.push_back(regime);
        }
        hist.erase(hist.begin());
        hist.push_back(x);
    }

    SimulationResult result;
    result.data = TimeSeriesDataset(std::move(series), std::move(context));
    result.labels = std::move(labels);
    return result;
}

}  // namespace softbct
