#include "softbct/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/digamma.hpp>

namespace softbct {

double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_sum_exp(const double* v, int count) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) m = std::max(m, v[i]);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    double acc = 0.0;
    for (int i = 0; i < count; ++i) acc += std::exp(v[i] - m);
    return m + std::log(acc);
}

double digamma(double x) {
    return boost::math::digamma(x);
}

}  // namespace softbct
