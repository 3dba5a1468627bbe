#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace softbct {

/// Normal-Gamma prior of one autoregressive leaf:
/// theta ~ N(mu, (tau*Lambda)^{-1}), tau ~ Gamma(a, b).
class LeafPrior {
public:
    LeafPrior(Eigen::VectorXd mu, Eigen::MatrixXd lambda, double a, double b);

    const Eigen::VectorXd& mu() const { return mu_; }
    const Eigen::MatrixXd& lambda() const { return lambda_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double log_det_lambda() const { return log_det_lambda_; }
    double mu_lambda_mu() const { return mu_lambda_mu_; }

private:
    Eigen::VectorXd mu_;
    Eigen::MatrixXd lambda_;
    double a_, b_;
    double log_det_lambda_;
    double mu_lambda_mu_;
};

/// Responsibility-weighted sufficient statistics of one node:
/// gram = sum_t q_t x_t x_t^T, xy = sum_t q_t x_t y_t, yy = sum_t q_t y_t^2,
/// weight = sum_t q_t (the trace of Q_s).
struct LeafStats {
    Eigen::MatrixXd gram;
    Eigen::VectorXd xy;
    double yy = 0.0;
    double weight = 0.0;

    explicit LeafStats(int dim)
        : gram(Eigen::MatrixXd::Zero(dim, dim)), xy(Eigen::VectorXd::Zero(dim)) {}
    LeafStats() = default;

    void add(const Eigen::VectorXd& x, double y, double q);
    LeafStats& operator+=(const LeafStats& o);
};

/// Posterior N(mu', (tau*Lambda')^{-1}) Gamma(a', b') of one node, with the
/// factorization of Lambda' cached for evidence and quadratic-form queries.
class LeafPosterior {
public:
    LeafPosterior() = default;
    LeafPosterior(const LeafPrior& prior, const LeafStats& stats);

    const Eigen::MatrixXd& lambda() const { return lambda_; }
    const Eigen::VectorXd& mu() const { return mu_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double trace_q() const { return trace_q_; }
    double log_det_lambda() const { return log_det_lambda_; }

    /// x^T Lambda'^{-1} x via one triangular solve against the cached factor.
    double inv_quad_form(const Eigen::VectorXd& x) const;

    /// Allocation-free variant for hot loops; scratch is overwritten.
    double inv_quad_form(const Eigen::VectorXd& x, Eigen::VectorXd& scratch) const;

    /// psi(a') - ln b', cached.
    double digamma_a_minus_log_b() const { return digamma_a_minus_log_b_; }

private:
    Eigen::MatrixXd lambda_;
    Eigen::VectorXd mu_;
    double a_ = 0.0, b_ = 0.0;
    double trace_q_ = 0.0;
    double log_det_lambda_ = 0.0;
    double digamma_a_minus_log_b_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> chol_;
};

/// Weighted conjugate update: Lambda' = Lambda + X^T diag(q) X, etc.
/// Weights must be in [0, 1]; diag(q) is never materialized.
LeafPosterior update_leaf_posterior(const LeafPrior& prior, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y, const Eigen::VectorXd& q);

/// ln gamma_s = 1/2 ln|Lambda| - 1/2 ln|Lambda'| + a ln b - a' ln b'
///              - ln Gamma(a) + ln Gamma(a') - 1/2 Tr{Q_s} ln 2pi.
double log_node_evidence(const LeafPrior& prior, const LeafPosterior& post);

/// Expected weighted log likelihood of one observation under the node
/// posterior, scaled by the probability that the node is a leaf of T:
///   1/2 * leaf_marginal * { (-ln 2pi + psi(a') - ln b')
///       - (a'/b') (y - x^T mu')^2 - x^T Lambda'^{-1} x }.
double expected_loglik_term(const LeafPosterior& post, double leaf_marginal, double y,
                            const Eigen::VectorXd& x_ar);

/// Same value, reusing a caller-owned scratch vector for the solve.
double expected_loglik_term(const LeafPosterior& post, double leaf_marginal, double y,
                            const Eigen::VectorXd& x_ar, Eigen::VectorXd& scratch);

}  // namespace softbct
