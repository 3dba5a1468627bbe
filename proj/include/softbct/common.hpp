#pragma once

#include <stdexcept>
#include <string>

namespace softbct {

/// Thrown when a numerical step (factorization, log-domain recursion,
/// posterior update) produces an unusable value. The CLI maps this to
/// exit code 2.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// log(exp(a) + exp(b)), safe for -inf arguments.
double log_sum_exp(double a, double b);

/// log(sum_i exp(v[i])) over a contiguous range.
double log_sum_exp(const double* v, int count);

/// Digamma function psi(x), x > 0.
double digamma(double x);

}  // namespace softbct
