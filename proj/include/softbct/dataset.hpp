#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace softbct {

/// A real-valued series x_1..x_n plus the pre-sample context
/// x_{1-p}, ..., x_0 the lagged design rows draw from.
class TimeSeriesDataset {
public:
    TimeSeriesDataset() = default;
    TimeSeriesDataset(std::vector<double> values, std::vector<double> context);

    int n() const { return static_cast<int>(values_.size()); }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& context() const { return context_; }
    int context_length() const { return static_cast<int>(context_.size()); }

    /// x_{t-k} for t in [1, n], k >= 0. Context indices must be covered;
    /// call ensure_context first.
    double lagged(int t, int k) const;

    /// [1, x_{t-1}, ..., x_{t-lags}]
    Eigen::VectorXd design_row(int t, int lags) const;

    /// n x (lags+1) matrix of design rows.
    Eigen::MatrixXd design_matrix(int lags) const;

    /// Extends the context at the old end with the series mean until it
    /// covers `length` pre-sample values. Returns true if padding happened.
    bool ensure_context(int length);

    bool context_was_padded() const { return padded_; }

    double mean() const;

private:
    std::vector<double> values_;
    std::vector<double> context_;  // oldest first; back() is x_0
    bool padded_ = false;
};

/// Parses a single-column CSV (optional header, '.' decimal, one value per
/// line). Throws std::runtime_error with the line number on bad input.
std::vector<double> read_value_column(const std::string& path);

TimeSeriesDataset load_csv(const std::string& series_path,
                           const std::string& context_path = "",
                           int context_rows = 0);

/// Writes one value per line with 17 significant digits, LF endings.
void save_csv(const std::string& path, const std::vector<double>& values,
              const std::string& header = "");

/// One autoregressive regime of the synthetic generator.
struct RegimeSpec {
    std::vector<double> coeffs;  // intercept first, then AR coefficients
    double noise_sd = 1.0;
};

/// Threshold-switching generator. steepness == 0 gives hard SETAR regime
/// selection on x_{t-lag}; steepness > 0 routes through a logistic
/// (softmax) gate of that steepness and samples the regime.
struct GeneratorSpec {
    int lag = 1;
    std::vector<double> thresholds;  // size regimes-1, ascending
    std::vector<RegimeSpec> regimes;
    double steepness = 0.0;
    int n = 0;
    std::uint64_t seed = 0;
    int burn_in = 200;
    int context_len = 0;  // pre-sample values to keep; at least the max lag
};

struct SimulationResult {
    TimeSeriesDataset data;
    std::vector<int> labels;  // regime index per t, 0-based
};

SimulationResult simulate_setar(const GeneratorSpec& spec);

/// Deterministic standard-normal stream: mt19937_64 bits (fully specified
/// by the standard) through an explicit Box-Muller transform, so the same
/// seed yields the same bytes on every platform.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}
    double uniform();  // in [0, 1)
    double normal();

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace softbct
