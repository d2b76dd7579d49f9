#include "tandemq/inference.hpp"

#include <cmath>
#include <string>

#include "tandemq/errors.hpp"

namespace tandemq {

namespace {

// Acklam's rational approximation to the inverse normal CDF
// (relative error ~1.15e-9 before refinement).
double acklam(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;

    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace

double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) {
        throw DomainError("normal_quantile: prob must lie in (0,1), got " +
                          std::to_string(prob));
    }
    double x = acklam(prob);
    // One Newton step against the CDF expressed through erfc. Phi(x) is
    // evaluated on the smaller tail to avoid cancellation.
    const double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (pdf > 0.0) x -= (cdf - prob) / pdf;
    return x;
}

ConfidenceInterval confidence_interval(double mean, double variance, int n,
                                       double alpha) {
    if (!(variance >= 0.0) || !std::isfinite(variance)) {
        throw DomainError("confidence_interval: variance must be >= 0");
    }
    if (n < 1) {
        throw DomainError("confidence_interval: n must be a positive integer");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("confidence_interval: alpha must lie in (0,1)");
    }
    const double z = normal_quantile(1.0 - alpha / 2.0);
    const double half_width = z * std::sqrt(variance / n);
    ConfidenceInterval ci;
    ci.point = mean;
    ci.lower = mean - half_width;
    ci.upper = mean + half_width;
    ci.level = 1.0 - alpha;
    ci.sample_size = n;
    ci.negative_lower = ci.lower < 0.0;
    return ci;
}

} // namespace tandemq
