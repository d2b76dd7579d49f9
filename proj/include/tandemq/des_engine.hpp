#pragma once

// Discrete-event simulation of the two-stage tandem M/M/c network, used as
// an independent check on every analytical quantity.
//
// The simulator models true customer flow: stage-one departures physically
// enter stage two, so stage two's long-run arrival rate equals stage one's
// arrival rate regardless of the analytic linkage convention. Replications
// use pre-assigned RNG substreams (see rng.hpp) and are aggregated in
// replication order, so serial and parallel execution produce identical
// results and a given (config, seed) is bit-reproducible.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tandemq/queue_core.hpp"
#include "tandemq/tandem_network.hpp"

namespace tandemq {

struct SimConfig {
    TandemConfig network;
    double horizon_minutes = 0.0; // must exceed warmup
    double warmup_minutes = 0.0;  // discarded; statistics reset here
    std::uint64_t seed = 0;
    int replications = 1;
    bool allow_unstable = false; // permit phi >= 1 runs (they still terminate
                                 // at the horizon)
    bool parallel = true;        // replications may run on multiple threads
};

// A single station simulated in isolation with its own Poisson arrivals.
struct StationSimConfig {
    QueueParams station;
    double horizon_minutes = 0.0;
    double warmup_minutes = 0.0;
    std::uint64_t seed = 0;
    int replications = 1;
    bool allow_unstable = false;
    bool parallel = true;
};

struct MetricEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

// One replication's point estimates for a station (or the network).
// Time-averaged quantities cover [warmup, horizon]; per-customer
// quantities cover customers that arrived to the network after warmup
// and completed within the horizon.
struct StationReplication {
    double mean_in_system = 0.0;
    double mean_queue_length = 0.0;
    double mean_wait = 0.0;
    double mean_sojourn = 0.0;
    double throughput = 0.0; // counted completions per minute
    long long completed = 0; // counted completions
};

struct ReplicationSummary {
    std::vector<StationReplication> stages;
    StationReplication network;
};

struct StationEstimates {
    MetricEstimate mean_in_system;
    MetricEstimate mean_queue_length;
    MetricEstimate mean_wait;
    MetricEstimate mean_sojourn;
    MetricEstimate throughput;
    long long completed = 0; // summed over replications
};

struct SimResult {
    std::vector<ReplicationSummary> replications; // index = replication
    std::vector<StationEstimates> stages;         // aggregated, 1 or 2 entries
    StationEstimates network;
    long long customers_completed = 0; // final-stage departures, all reps
    std::uint64_t seed = 0;
};

// Runs the tandem simulation. Throws UnstableError if either stage is
// unstable under true flow (stage two at stage one's arrival rate) unless
// allow_unstable is set; throws DomainError on a nonsensical horizon.
//
// When trace is non-null, an event trace is streamed as CSV
// (replication,time,event,customer_id,stage,queue_len) and replications
// run serially so the trace is ordered.
SimResult simulate(const SimConfig& cfg, std::ostream* trace = nullptr);

SimResult simulate_station(const StationSimConfig& cfg,
                           std::ostream* trace = nullptr);

struct DiscrepancyRow {
    std::string metric;
    double analytical = 0.0;
    double simulated = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    bool flagged = false; // |z| > 3
};

struct DiscrepancyReport {
    std::vector<DiscrepancyRow> rows;
    bool any_flagged = false;
};

// Simulates and compares against the closed forms. The analytic side for
// stage two uses ThroughputConservation (lambda2 = lambda1), matching the
// simulated physics. The two-argument forms compare an already-computed
// result instead of simulating again.
DiscrepancyReport validate_against_analytics(const SimConfig& cfg);
DiscrepancyReport validate_against_analytics(const SimConfig& cfg,
                                             const SimResult& sim);

DiscrepancyReport validate_station_against_analytics(const StationSimConfig& cfg);
DiscrepancyReport validate_station_against_analytics(const StationSimConfig& cfg,
                                                     const SimResult& sim);

} // namespace tandemq
