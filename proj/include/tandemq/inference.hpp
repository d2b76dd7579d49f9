#pragma once

// Normal-theory confidence intervals for queue metrics, from analytical
// variances or sample statistics. Pure functions, thread-safe.

namespace tandemq {

struct ConfidenceInterval {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0; // confidence level, e.g. 0.95
    int sample_size = 0;
    // Advisory: the lower bound dips below zero. Bounds are reported
    // unclamped; for nonnegative metrics this flags the interval as
    // extending past the physical range.
    bool negative_lower = false;
};

// Inverse standard-normal CDF. Absolute error below 1e-8 over (0,1):
// rational approximation refined by one Newton step against erfc.
// Throws DomainError outside (0,1).
double normal_quantile(double prob);

// Two-sided z interval: half-width = z_{1-alpha/2} * sqrt(variance / n).
// Bounds are not clamped.
ConfidenceInterval confidence_interval(double mean, double variance, int n,
                                       double alpha);

} // namespace tandemq
