#pragma once

// Scenario search over server counts: exhaustive sweeps of (c1, c2) pairs
// and minimal staffing under service-level constraints.

#include <optional>
#include <vector>

#include "tandemq/queue_core.hpp"
#include "tandemq/tandem_network.hpp"

namespace tandemq {

// A service-level constraint, evaluated per stage (every stage must
// satisfy every constraint). Metric constraints implicitly require the
// stage to be stable, since the metrics do not exist otherwise.
struct Constraint {
    enum class Kind {
        Stability,           // phi < 1
        DelayProbabilityMax, // Erlang C <= threshold
        WaitTailMax,         // P(W > t) <= threshold
        SojournTailMax,      // P(T > t) <= threshold
        MeanSojournMax,      // T <= threshold (minutes)
    };

    Kind kind = Kind::Stability;
    double threshold = 0.0; // probability, or minutes for MeanSojournMax
    double t = 0.0;         // minutes; tail kinds only

    static Constraint stability();
    static Constraint delay_probability_max(double threshold);
    static Constraint wait_tail_max(double t, double threshold);
    static Constraint sojourn_tail_max(double t, double threshold);
    static Constraint mean_sojourn_max(double minutes);
};

void validate(const Constraint& c);

// True when the station satisfies the constraint. Unstable stations fail
// every constraint.
bool satisfied(const Constraint& c, const QueueParams& p);

struct TailPoint {
    double t = 0.0;
    double wait_tail = 0.0;    // P(W > t)
    double sojourn_tail = 0.0; // P(T > t)
};

struct ScenarioRow {
    int c1 = 0;
    int c2 = 0;
    double phi1 = 0.0;
    double phi2 = 0.0;
    bool stable = false; // both stages
    std::optional<StationMetrics> stage1;
    std::optional<StationMetrics> stage2;
    std::optional<NetworkMetrics> network;
    std::vector<TailPoint> tails_stage1;
    std::vector<TailPoint> tails_stage2;
    bool feasible = false;
};

struct IntRange {
    int lo = 1;
    int hi = 1;
};

struct ScanOptions {
    int n = 67;
    double alpha = 0.05;
    bool include_unstable = false; // emit unstable pairs, marked
};

// Exhaustively enumerates (c1, c2) over the ranges using the base
// config's rates and ServiceRateAsArrival linkage. Rows are sorted by
// (c1 + c2, c1). Unstable pairs are dropped unless include_unstable.
std::vector<ScenarioRow> scan_scenarios(const TandemConfig& base,
                                        IntRange c1_range, IntRange c2_range,
                                        const std::vector<Constraint>& constraints,
                                        const std::vector<double>& t_values,
                                        const ScanOptions& options = {});

// Smallest c <= c_max satisfying every constraint (stability implied).
// Throws InfeasibleError carrying the best attempt when none qualifies.
int min_servers(double lambda, double mu,
                const std::vector<Constraint>& constraints, int c_max);

// The documented service-level preset: P(W > 1 minute) <= 0.005 at every
// stage. Over the reference rates this selects (c1, c2) = (7, 6) as the
// minimal-total-server staffing.
std::vector<Constraint> strict_wait_preset();

} // namespace tandemq
