#include "tandemq/capacity_planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tandemq/errors.hpp"

namespace tandemq {

Constraint Constraint::stability() {
    return {Kind::Stability, 0.0, 0.0};
}

Constraint Constraint::delay_probability_max(double threshold) {
    return {Kind::DelayProbabilityMax, threshold, 0.0};
}

Constraint Constraint::wait_tail_max(double t, double threshold) {
    return {Kind::WaitTailMax, threshold, t};
}

Constraint Constraint::sojourn_tail_max(double t, double threshold) {
    return {Kind::SojournTailMax, threshold, t};
}

Constraint Constraint::mean_sojourn_max(double minutes) {
    return {Kind::MeanSojournMax, minutes, 0.0};
}

void validate(const Constraint& c) {
    switch (c.kind) {
    case Constraint::Kind::Stability:
        return;
    case Constraint::Kind::DelayProbabilityMax:
    case Constraint::Kind::WaitTailMax:
    case Constraint::Kind::SojournTailMax:
        if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) {
            throw DomainError("Constraint: probability threshold must lie in [0,1]");
        }
        if ((c.kind != Constraint::Kind::DelayProbabilityMax) && !(c.t >= 0.0)) {
            throw DomainError("Constraint: tail time t must be >= 0");
        }
        return;
    case Constraint::Kind::MeanSojournMax:
        if (!(c.threshold > 0.0)) {
            throw DomainError("Constraint: mean sojourn bound must be > 0 minutes");
        }
        return;
    }
    throw DomainError("Constraint: unknown kind");
}

bool satisfied(const Constraint& c, const QueueParams& p) {
    validate(c);
    const auto verdict = check_stability(p);
    if (!verdict.stable) return false;
    switch (c.kind) {
    case Constraint::Kind::Stability:
        return true;
    case Constraint::Kind::DelayProbabilityMax:
        return erlang_c(p) <= c.threshold;
    case Constraint::Kind::WaitTailMax:
        return wait_tail(p, c.t) <= c.threshold;
    case Constraint::Kind::SojournTailMax:
        return sojourn_tail(p, c.t) <= c.threshold;
    case Constraint::Kind::MeanSojournMax:
        return station_metrics(p).mean_sojourn <= c.threshold;
    }
    return false;
}

namespace {

int violations(const std::vector<Constraint>& constraints, const QueueParams& p) {
    int count = 0;
    for (const auto& c : constraints) {
        if (!satisfied(c, p)) ++count;
    }
    return count;
}

} // namespace

std::vector<ScenarioRow> scan_scenarios(const TandemConfig& base,
                                        IntRange c1_range, IntRange c2_range,
                                        const std::vector<Constraint>& constraints,
                                        const std::vector<double>& t_values,
                                        const ScanOptions& options) {
    if (c1_range.lo < 1 || c2_range.lo < 1 || c1_range.hi < c1_range.lo ||
        c2_range.hi < c2_range.lo) {
        throw DomainError("scan_scenarios: ranges must be nonempty and >= 1");
    }
    for (const auto& c : constraints) validate(c);

    std::vector<ScenarioRow> rows;
    for (int c1 = c1_range.lo; c1 <= c1_range.hi; ++c1) {
        for (int c2 = c2_range.lo; c2 <= c2_range.hi; ++c2) {
            QueueParams s1{base.stage1.lambda, base.stage1.mu, c1};
            QueueParams s2{base.stage1.mu, base.stage2.mu, c2}; // lambda2 = mu1
            ScenarioRow row;
            row.c1 = c1;
            row.c2 = c2;
            row.phi1 = traffic_intensity(s1);
            row.phi2 = traffic_intensity(s2);
            row.stable = row.phi1 < 1.0 && row.phi2 < 1.0;
            if (!row.stable && !options.include_unstable) continue;
            if (row.stable) {
                row.stage1 = station_metrics(s1);
                row.stage2 = station_metrics(s2);
                TandemConfig cfg{s1, s2, Linkage::ServiceRateAsArrival};
                row.network = network_metrics(cfg, options.n, options.alpha);
                for (double t : t_values) {
                    row.tails_stage1.push_back({t, wait_tail(s1, t), sojourn_tail(s1, t)});
                    row.tails_stage2.push_back({t, wait_tail(s2, t), sojourn_tail(s2, t)});
                }
                row.feasible = violations(constraints, s1) == 0 &&
                               violations(constraints, s2) == 0;
            }
            rows.push_back(std::move(row));
        }
    }
    std::sort(rows.begin(), rows.end(), [](const ScenarioRow& a, const ScenarioRow& b) {
        if (a.c1 + a.c2 != b.c1 + b.c2) return a.c1 + a.c2 < b.c1 + b.c2;
        if (a.c1 != b.c1) return a.c1 < b.c1;
        return a.c2 < b.c2;
    });
    return rows;
}

int min_servers(double lambda, double mu,
                const std::vector<Constraint>& constraints, int c_max) {
    if (c_max < 1) throw DomainError("min_servers: c_max must be >= 1");
    for (const auto& c : constraints) validate(c);

    // Best attempt: c_max when nothing is even stable (it is the closest
    // to stability), otherwise the stable c with the fewest violations.
    int best_c = c_max;
    int best_violations = static_cast<int>(constraints.size());
    bool any_stable = false;
    for (int c = 1; c <= c_max; ++c) {
        QueueParams p{lambda, mu, c};
        if (!check_stability(p).stable) continue;
        const int v = violations(constraints, p);
        if (v == 0) return c;
        if (!any_stable || v < best_violations) {
            best_violations = v;
            best_c = c;
        }
        any_stable = true;
    }
    throw InfeasibleError(
        "min_servers: no server count <= " + std::to_string(c_max) +
            " satisfies the constraints (best attempt: c = " +
            std::to_string(best_c) + " with " + std::to_string(best_violations) +
            " violated)",
        best_c, best_violations);
}

std::vector<Constraint> strict_wait_preset() {
    return {Constraint::wait_tail_max(1.0, 0.005)};
}

} // namespace tandemq
