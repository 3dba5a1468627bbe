#include "softbct/leaf_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "softbct/common.hpp"

namespace softbct {

namespace {

// log determinant of an SPD matrix from its lower Cholesky factor
double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

LeafPrior::LeafPrior(Eigen::VectorXd mu, Eigen::MatrixXd lambda, double a, double b)
    : mu_(std::move(mu)), lambda_(std::move(lambda)), a_(a), b_(b) {
    if (lambda_.rows() != lambda_.cols() || lambda_.rows() != mu_.size())
        throw std::invalid_argument("LeafPrior: dimension mismatch");
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("LeafPrior: Gamma parameters must be positive");
    if (!lambda_.isApprox(lambda_.transpose(), 1e-12))
        throw std::invalid_argument("LeafPrior: precision matrix must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(lambda_);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("LeafPrior: precision matrix is not positive definite");
    log_det_lambda_ = log_det_from_llt(llt);
    mu_lambda_mu_ = mu_.dot(lambda_ * mu_);
}

void LeafStats::add(const Eigen::VectorXd& x, double y, double q) {
    if (q == 0.0) return;
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x, q);
    xy += q * y * x;
    yy += q * y * y;
    weight += q;
}

LeafStats& LeafStats::operator+=(const LeafStats& o) {
    gram += o.gram;
    xy += o.xy;
    yy += o.yy;
    weight += o.weight;
    return *this;
}

LeafPosterior::LeafPosterior(const LeafPrior& prior, const LeafStats& stats) {
    if (stats.weight == 0.0) {
        // empty statistics: the posterior is the prior, bit for bit
        lambda_ = prior.lambda();
        mu_ = prior.mu();
        a_ = prior.a();
        b_ = prior.b();
        trace_q_ = 0.0;
        chol_.compute(lambda_);
        log_det_lambda_ = prior.log_det_lambda();
        digamma_a_minus_log_b_ = digamma(a_) - std::log(b_);
        return;
    }

    // only the lower triangle of the accumulated gram is maintained
    Eigen::MatrixXd gram_full = stats.gram.selfadjointView<Eigen::Lower>();
    lambda_ = prior.lambda() + gram_full;
    chol_.compute(lambda_);
    if (chol_.info() != Eigen::Success)
        throw NumericError("LeafPosterior: posterior precision factorization failed");

    mu_ = chol_.solve(prior.lambda() * prior.mu() + stats.xy);
    trace_q_ = stats.weight;
    a_ = prior.a() + 0.5 * stats.weight;
    b_ = prior.b() +
         0.5 * (prior.mu_lambda_mu() + stats.yy - mu_.dot(lambda_.selfadjointView<Eigen::Lower>() * mu_));
    if (!(b_ > 1e-300))
        throw NumericError("LeafPosterior: posterior rate b' = " + std::to_string(b_) +
                           " is not positive; design is numerically degenerate");
    log_det_lambda_ = log_det_from_llt(chol_);
    digamma_a_minus_log_b_ = digamma(a_) - std::log(b_);
}

double LeafPosterior::inv_quad_form(const Eigen::VectorXd& x) const {
    return chol_.matrixL().solve(x).squaredNorm();
}

double LeafPosterior::inv_quad_form(const Eigen::VectorXd& x, Eigen::VectorXd& scratch) const {
    scratch = x;
    chol_.matrixL().solveInPlace(scratch);
    return scratch.squaredNorm();
}

LeafPosterior update_leaf_posterior(const LeafPrior& prior, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y, const Eigen::VectorXd& q) {
    if (X.rows() != y.size() || X.rows() != q.size() || X.cols() != prior.mu().size())
        throw std::invalid_argument("update_leaf_posterior: dimension mismatch");
    LeafStats stats(static_cast<int>(X.cols()));
    for (Eigen::Index t = 0; t < X.rows(); ++t) {
        if (!(q[t] >= 0.0 && q[t] <= 1.0))
            throw std::invalid_argument("update_leaf_posterior: weight outside [0,1] at row " +
                                        std::to_string(t));
        if (q[t] > 0.0) stats.add(X.row(t).transpose(), y[t], q[t]);
    }
    return LeafPosterior(prior, stats);
}

double log_node_evidence(const LeafPrior& prior, const LeafPosterior& post) {
    return 0.5 * (prior.log_det_lambda() - post.log_det_lambda()) +
           prior.a() * std::log(prior.b()) - post.a() * std::log(post.b()) -
           std::lgamma(prior.a()) + std::lgamma(post.a()) -
           0.5 * post.trace_q() * std::log(2.0 * M_PI);
}

double expected_loglik_term(const LeafPosterior& post, double leaf_marginal, double y,
                            const Eigen::VectorXd& x_ar) {
    if (leaf_marginal == 0.0) return 0.0;
    const double resid = y - x_ar.dot(post.mu());
    return 0.5 * leaf_marginal *
           (-std::log(2.0 * M_PI) + post.digamma_a_minus_log_b() -
            (post.a() / post.b()) * resid * resid - post.inv_quad_form(x_ar));
}

double expected_loglik_term(const LeafPosterior& post, double leaf_marginal, double y,
                            const Eigen::VectorXd& x_ar, Eigen::VectorXd& scratch) {
    if (leaf_marginal == 0.0) return 0.0;
    const double resid = y - x_ar.dot(post.mu());
    return 0.5 * leaf_marginal *
           (-std::log(2.0 * M_PI) + post.digamma_a_minus_log_b() -
            (post.a() / post.b()) * resid * resid - post.inv_quad_form(x_ar, scratch));
}

}  // namespace softbct
