#pragma once

// Independent reference implementations used only by the test suites.
// Everything here must stay decoupled from the library's computation paths:
// the conjugate regression oracle walks observations one at a time through
// rank-one covariance updates and Student-t predictives, the responsibility
// oracle normalizes over every root-to-leaf path explicitly, and the
// derivative oracles are plain central differences.

#include <functional>

#include <Eigen/Core>

#include "softbct/dataset.hpp"
#include "softbct/engine.hpp"

namespace softbct::testing {

/// Conjugate Bayesian linear regression tracked observation by observation.
struct SequentialNormalGamma {
    Eigen::VectorXd mu;
    Eigen::MatrixXd cov;  // (tau Lambda)^{-1} up to tau: Lambda^{-1}
    double a, b;
    double log_evidence = 0.0;

    SequentialNormalGamma(const Eigen::VectorXd& mu0, const Eigen::MatrixXd& lambda0,
                          double a0, double b0);

    /// Absorbs one observation; adds the log Student-t predictive density
    /// to log_evidence.
    void observe(const Eigen::VectorXd& x, double y);

    Eigen::MatrixXd lambda() const;  // cov^{-1}, for comparisons
};

/// Per-path brute force for one observation: weight of every deepest leaf
/// is exp(sum of edge log-gates + node loglik terms), normalized over all
/// M^D paths; node weights are sums over descendant leaves.
struct PathWeights {
    std::vector<double> q;     // per node
    std::vector<double> edge;  // per node; probability of the edge into s
};

PathWeights brute_force_responsibilities(const FitState& state, double y,
                                         const Eigen::VectorXd& x_ar,
                                         const Eigen::VectorXd& x_gate);

/// Central-difference gradient of a scalar function.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h = 1e-6);

/// Central-difference Jacobian of a vector function (used on the analytic
/// gradient to cross-check the Hessian).
Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h = 1e-6);

/// Marsaglia-Tsang gamma variate (shape/rate) on the deterministic sampler.
double sample_gamma(GaussianSampler& rng, double shape, double rate);

}  // namespace softbct::testing
