#include "tandemq/queue_core.hpp"

#include <cmath>
#include <string>

#include "tandemq/errors.hpp"

namespace tandemq {

namespace {

// Sum of a^n/n! for n = 0..c-1 plus the last term a^c/c!, accumulated by
// the recurrence term_{n+1} = term_n * a / (n+1). Stays finite for c well
// past 170, where raw factorials overflow.
struct ErlangTerms {
    double sum_below_c; // sum_{n=0}^{c-1} a^n/n!
    double term_c;      // a^c/c!
};

ErlangTerms erlang_terms(double a, int c) {
    double term = 1.0;
    double sum = 0.0;
    for (int n = 0; n < c; ++n) {
        sum += term;
        term *= a / (n + 1);
    }
    return {sum, term};
}

void require_stable(const QueueParams& p, const char* op) {
    const auto verdict = check_stability(p);
    if (!verdict.stable) {
        throw UnstableError(std::string(op) + ": station is unstable (phi = " +
                                std::to_string(verdict.phi) + " >= 1)",
                            verdict.phi);
    }
}

void require_nonnegative_time(double t, const char* op) {
    if (!(t >= 0.0)) {
        throw DomainError(std::string(op) + ": t must be >= 0, got " +
                          std::to_string(t));
    }
}

} // namespace

void validate(const QueueParams& p) {
    if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) {
        throw DomainError("QueueParams: lambda must be a positive finite rate");
    }
    if (!(p.mu > 0.0) || !std::isfinite(p.mu)) {
        throw DomainError("QueueParams: mu must be a positive finite rate");
    }
    if (p.servers < 1) {
        throw DomainError("QueueParams: servers must be >= 1");
    }
}

double offered_load(const QueueParams& p) {
    validate(p);
    return p.lambda / p.mu;
}

double traffic_intensity(const QueueParams& p) {
    validate(p);
    return p.lambda / (p.servers * p.mu);
}

StabilityVerdict check_stability(const QueueParams& p) {
    const double phi = traffic_intensity(p);
    return {phi < 1.0, phi};
}

double erlang_c(const QueueParams& p) {
    require_stable(p, "erlang_c");
    const double a = p.lambda / p.mu;
    const double phi = a / p.servers;
    const auto t = erlang_terms(a, p.servers);
    return t.term_c / ((1.0 - phi) * t.sum_below_c + t.term_c);
}

double empty_probability(const QueueParams& p) {
    require_stable(p, "empty_probability");
    const double a = p.lambda / p.mu;
    const double phi = a / p.servers;
    const auto t = erlang_terms(a, p.servers);
    return 1.0 / (t.sum_below_c + t.term_c / (1.0 - phi));
}

double stationary_pmf(const QueueParams& p, long long n) {
    require_stable(p, "stationary_pmf");
    if (n < 0) throw DomainError("stationary_pmf: n must be >= 0");
    const double a = p.lambda / p.mu;
    const double phi = a / p.servers;
    const double p0 = empty_probability(p);
    if (n < p.servers) {
        double term = 1.0;
        for (long long k = 0; k < n; ++k) term *= a / (k + 1);
        return p0 * term;
    }
    double term_c = 1.0;
    for (int k = 0; k < p.servers; ++k) term_c *= a / (k + 1);
    return p0 * term_c * std::pow(phi, static_cast<double>(n - p.servers));
}

StationMetrics station_metrics(const QueueParams& p) {
    require_stable(p, "station_metrics");
    const double a = p.lambda / p.mu;
    const double phi = a / p.servers;
    const double theta = p.servers * p.mu - p.lambda;
    const double piw = erlang_c(p);
    const double p0 = empty_probability(p);

    StationMetrics m;
    m.traffic_intensity = phi;
    m.delay_probability = piw;
    m.empty_probability = p0;
    m.mean_queue_length = piw * phi / (1.0 - phi);
    m.conditional_queue_length = 1.0 / (1.0 - phi);
    m.conditional_wait = 1.0 / theta;
    m.mean_wait = m.mean_queue_length / p.lambda;
    m.mean_service_time = 1.0 / p.mu;
    m.mean_busy_servers = a;
    m.mean_in_system = m.mean_queue_length + a;
    m.mean_sojourn = m.mean_wait + m.mean_service_time;
    m.util_single = phi;
    m.util_system = 1.0 - p0;
    m.util_overall = a;
    return m;
}

namespace {

// Closed-form tails of the geometric region: with p_n = A * r^n for n >= M,
//   sum_{n>=M} r^n      = r^M / (1-r)
//   sum_{n>=M} n r^n    = r^M (M - (M-1) r) / (1-r)^2
//   sum_{n>=M} n^2 r^n  = r^M (M^2 - (2M^2 - 2M - 1) r + (M-1)^2 r^2) / (1-r)^3
struct GeometricTail {
    double sum0, sum1, sum2;
};

GeometricTail geometric_tail(double coeff_at_m, double r, double m) {
    const double omr = 1.0 - r;
    GeometricTail g;
    g.sum0 = coeff_at_m / omr;
    g.sum1 = coeff_at_m * (m - (m - 1.0) * r) / (omr * omr);
    g.sum2 = coeff_at_m *
             (m * m - (2.0 * m * m - 2.0 * m - 1.0) * r +
              (m - 1.0) * (m - 1.0) * r * r) /
             (omr * omr * omr);
    return g;
}

} // namespace

VarianceSet station_variances(const QueueParams& p) {
    require_stable(p, "station_variances");
    const double a = p.lambda / p.mu;
    const double phi = a / p.servers;
    const double theta = p.servers * p.mu - p.lambda;
    const double piw = erlang_c(p);
    const double p0 = empty_probability(p);

    const double mean_wait = piw / theta;
    VarianceSet v;
    v.var_wait = 2.0 * piw / (theta * theta) - mean_wait * mean_wait;
    v.var_sojourn = v.var_wait + 1.0 / (p.mu * p.mu);

    const double qbar = piw * phi / (1.0 - phi);
    v.var_queue_length =
        piw * phi * (1.0 + phi) / ((1.0 - phi) * (1.0 - phi)) - qbar * qbar;

    // Var(N) via the stationary distribution: accumulate n^2 p_n until the
    // terms are negligible (p_n < 1e-14 * P0 past n = c), cap at 10^6
    // terms, and close the remaining geometric region analytically.
    constexpr long long kMaxTerms = 1000000;
    const double cutoff = 1e-14 * p0;
    double term = p0; // p_n
    double e1 = 0.0;
    double e2 = 0.0;
    long long n = 0;
    while (true) {
        e1 += static_cast<double>(n) * term;
        e2 += static_cast<double>(n) * static_cast<double>(n) * term;
        if (n > p.servers && term < cutoff) break;
        if (n >= kMaxTerms && n > p.servers) {
            const double m = static_cast<double>(n + 1);
            const auto g = geometric_tail(term * phi, phi, m);
            e1 += g.sum1;
            e2 += g.sum2;
            break;
        }
        ++n;
        term *= (n <= p.servers) ? a / n : phi;
    }
    v.var_in_system = e2 - e1 * e1;
    return v;
}

double wait_tail(const QueueParams& p, double t) {
    require_stable(p, "wait_tail");
    require_nonnegative_time(t, "wait_tail");
    const double theta = p.servers * p.mu - p.lambda;
    return erlang_c(p) * std::exp(-theta * t);
}

double sojourn_tail(const QueueParams& p, double t) {
    require_stable(p, "sojourn_tail");
    require_nonnegative_time(t, "sojourn_tail");
    const double theta = p.servers * p.mu - p.lambda;
    const double mu = p.mu;
    const double piw = erlang_c(p);
    if (std::fabs(theta - mu) < 1e-9 * mu) {
        // theta == mu is a removable singularity; limit form.
        return std::exp(-mu * t) * (1.0 - piw + piw * (1.0 + mu * t));
    }
    return (1.0 - piw) * std::exp(-mu * t) +
           piw * (theta * std::exp(-mu * t) - mu * std::exp(-theta * t)) /
               (theta - mu);
}

} // namespace tandemq
