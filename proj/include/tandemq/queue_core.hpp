#pragma once

// Exact steady-state analysis of a single M/M/c/inf/inf/FCFS station:
// delay probability (Erlang C), stationary distribution, mean and variance
// metrics, and tail distributions of waiting and sojourn time.
//
// All rates are per minute; all times are minutes. Operations are pure
// functions and safe to call concurrently.

namespace tandemq {

// One M/M/c station. Plain aggregate; invariants (lambda > 0, mu > 0,
// servers >= 1) are enforced by the operations, which throw DomainError.
struct QueueParams {
    double lambda = 0.0; // arrival rate, customers per minute
    double mu = 0.0;     // service rate per server, customers per minute
    int servers = 0;     // c
};

void validate(const QueueParams& p);

// Offered load a = lambda/mu, the mean number of busy servers when stable.
double offered_load(const QueueParams& p);

// Traffic intensity phi = lambda / (c * mu). No stability requirement;
// callers use check_stability.
double traffic_intensity(const QueueParams& p);

struct StabilityVerdict {
    bool stable = false; // phi < 1, equivalently lambda/mu < c
    double phi = 0.0;
};

// Unstable is a valid verdict, not an error.
StabilityVerdict check_stability(const QueueParams& p);

// Erlang C delay probability: the chance an arriving customer finds all
// c servers busy. Requires a stable station (throws UnstableError).
double erlang_c(const QueueParams& p);

// P0, the stationary probability of an empty station.
double empty_probability(const QueueParams& p);

// Stationary probability of exactly n customers in the station:
//   p_n = P0 * a^n / n!              for n <  c
//   p_n = P0 * (a^c / c!) * phi^(n-c) for n >= c
double stationary_pmf(const QueueParams& p, long long n);

// The full single-station result record.
//
// conditional_queue_length and conditional_wait are the values given that
// an arriving customer is delayed: 1/(1-phi) and 1/(c*mu - lambda).
struct StationMetrics {
    double traffic_intensity = 0.0;       // phi
    double delay_probability = 0.0;       // Erlang C
    double empty_probability = 0.0;       // P0
    double mean_queue_length = 0.0;       // Lq
    double conditional_queue_length = 0.0;
    double conditional_wait = 0.0;
    double mean_wait = 0.0;               // W (unconditional)
    double mean_service_time = 0.0;       // 1/mu
    double mean_busy_servers = 0.0;       // lambda/mu
    double mean_in_system = 0.0;          // L
    double mean_sojourn = 0.0;            // T = W + 1/mu
    double util_single = 0.0;             // phi
    double util_system = 0.0;             // 1 - P0
    double util_overall = 0.0;            // lambda/mu (in servers)
};

StationMetrics station_metrics(const QueueParams& p);

struct VarianceSet {
    double var_in_system = 0.0;    // Var(N), customers^2
    double var_queue_length = 0.0; // Var(Nq), customers^2
    double var_sojourn = 0.0;      // Var(T), minutes^2
    double var_wait = 0.0;         // Var(W), minutes^2
};

// Var(W) = 2*Piw/theta^2 - (Piw/theta)^2 with theta = c*mu - lambda;
// Var(T) = Var(W) + 1/mu^2 (wait and service are independent);
// Var(Nq) closed form; Var(N) from the stationary distribution, with the
// geometric region summed in closed form past 10^6 terms.
VarianceSet station_variances(const QueueParams& p);

// P(W > t) = Piw * exp(-(c*mu - lambda) * t). t >= 0.
double wait_tail(const QueueParams& p, double t);

// P(T > t): convolution of the waiting and service distributions.
// The removable singularity at theta == mu uses the limit form.
double sojourn_tail(const QueueParams& p, double t);

} // namespace tandemq
