#pragma once

// Two M/M/c stations in series. Stage means are summed; stage variances
// are summed under an independence assumption and square-rooted into
// network standard deviations.

#include "tandemq/inference.hpp"
#include "tandemq/queue_core.hpp"

namespace tandemq {

// How the second stage's arrival rate is derived from the first stage.
//
// ServiceRateAsArrival sets lambda2 = mu1 (the upstream per-server service
// rate feeds the downstream stage). ThroughputConservation sets
// lambda2 = lambda1: in steady state a stable station's departure rate
// equals its arrival rate, so this is the physically consistent mode and
// the one the simulator's true customer flow obeys.
enum class Linkage {
    ServiceRateAsArrival,
    ThroughputConservation,
};

struct TandemConfig {
    QueueParams stage1;
    QueueParams stage2;
    Linkage linkage = Linkage::ServiceRateAsArrival;
};

// Builds a validated TandemConfig: stage2's arrival rate is set by the
// linkage rule and both stages must be stable. Throws UnstableError
// naming the offending stage.
TandemConfig link_stages(const QueueParams& stage1, double mu2, int c2,
                         Linkage linkage);

struct NetworkMetrics {
    double mean_in_network = 0.0; // customers
    double mean_queue = 0.0;      // customers
    double mean_sojourn = 0.0;    // minutes
    double mean_wait = 0.0;       // minutes
    double sd_in_network = 0.0;
    double sd_queue = 0.0;
    double sd_sojourn = 0.0;
    double sd_wait = 0.0;
    ConfidenceInterval ci_in_network;
    ConfidenceInterval ci_queue;
    ConfidenceInterval ci_sojourn;
    ConfidenceInterval ci_wait;
};

// Aggregates the two stages; confidence intervals use the summed
// variances with the given n and alpha.
NetworkMetrics network_metrics(const TandemConfig& cfg, int n, double alpha);

} // namespace tandemq
