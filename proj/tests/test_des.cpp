#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "tandemq/des_engine.hpp"
#include "tandemq/errors.hpp"
#include "tandemq/rng.hpp"

using namespace tandemq;

namespace {

StationSimConfig station_cfg(const QueueParams& p, double horizon, double warmup,
                             std::uint64_t seed, int reps) {
    StationSimConfig cfg;
    cfg.station = p;
    cfg.horizon_minutes = horizon;
    cfg.warmup_minutes = warmup;
    cfg.seed = seed;
    cfg.replications = reps;
    return cfg;
}

SimConfig tandem_cfg(const QueueParams& s1, double mu2, int c2, double horizon,
                     double warmup, std::uint64_t seed, int reps) {
    SimConfig cfg;
    cfg.network.stage1 = s1;
    cfg.network.stage2 = {s1.lambda, mu2, c2};
    cfg.network.linkage = Linkage::ThroughputConservation;
    cfg.horizon_minutes = horizon;
    cfg.warmup_minutes = warmup;
    cfg.seed = seed;
    cfg.replications = reps;
    return cfg;
}

bool identical(const StationReplication& a, const StationReplication& b) {
    return a.mean_in_system == b.mean_in_system &&
           a.mean_queue_length == b.mean_queue_length &&
           a.mean_wait == b.mean_wait && a.mean_sojourn == b.mean_sojourn &&
           a.throughput == b.throughput && a.completed == b.completed;
}

} // namespace

TEST_CASE("same seed, same result") {
    const auto cfg = station_cfg({0.8, 1.0, 2}, 5000, 500, 1234, 4);
    const auto a = simulate_station(cfg);
    const auto b = simulate_station(cfg);
    REQUIRE(a.replications.size() == b.replications.size());
    for (std::size_t r = 0; r < a.replications.size(); ++r) {
        CHECK(identical(a.replications[r].stages[0], b.replications[r].stages[0]));
    }
    CHECK(a.customers_completed == b.customers_completed);
    CHECK(a.stages[0].mean_in_system.mean == b.stages[0].mean_in_system.mean);
    CHECK(a.stages[0].mean_in_system.std_error ==
          b.stages[0].mean_in_system.std_error);
}

TEST_CASE("different seeds differ") {
    auto cfg = station_cfg({0.8, 1.0, 2}, 5000, 500, 1234, 2);
    const auto a = simulate_station(cfg);
    cfg.seed = 4321;
    const auto b = simulate_station(cfg);
    CHECK(a.stages[0].mean_in_system.mean != b.stages[0].mean_in_system.mean);
}

TEST_CASE("parallel equals serial") {
    auto cfg = tandem_cfg({0.9, 1.0, 2}, 1.2, 2, 8000, 800, 99, 8);
    cfg.parallel = true;
    const auto par = simulate(cfg);
    cfg.parallel = false;
    const auto ser = simulate(cfg);
    REQUIRE(par.replications.size() == ser.replications.size());
    for (std::size_t r = 0; r < par.replications.size(); ++r) {
        for (int s = 0; s < 2; ++s) {
            CHECK(identical(par.replications[r].stages[s],
                            ser.replications[r].stages[s]));
        }
        CHECK(identical(par.replications[r].network, ser.replications[r].network));
    }
    CHECK(par.network.mean_sojourn.mean == ser.network.mean_sojourn.mean);
    CHECK(par.network.mean_sojourn.std_error == ser.network.mean_sojourn.std_error);
    CHECK(par.customers_completed == ser.customers_completed);
}

TEST_CASE("zero arrivals make an empty simulation") {
    const auto res = simulate_station(station_cfg({0.0, 1.0, 2}, 1000, 100, 7, 3));
    CHECK(res.customers_completed == 0);
    CHECK(res.stages[0].mean_in_system.mean == 0.0);
    CHECK(res.stages[0].mean_wait.mean == 0.0);
    CHECK(res.stages[0].completed == 0);
}

TEST_CASE("instability handling") {
    CHECK_THROWS_AS(simulate_station(station_cfg({2.0, 1.0, 1}, 1000, 0, 1, 1)),
                    UnstableError);
    // Tandem: stage two unstable under true flow even though the config
    // object claims otherwise.
    auto cfg = tandem_cfg({1.117, 0.409, 5}, 0.244, 4, 1000, 0, 1, 1);
    CHECK_THROWS_AS(simulate(cfg), UnstableError);

    auto forced = station_cfg({2.0, 1.0, 1}, 500, 0, 1, 1);
    forced.allow_unstable = true;
    const auto res = simulate_station(forced);
    CHECK(res.stages[0].mean_in_system.mean > 0.0);
    CHECK(std::isfinite(res.stages[0].mean_in_system.mean));
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(simulate_station(station_cfg({0.5, 1.0, 1}, 100, 100, 1, 1)),
                    DomainError);
    CHECK_THROWS_AS(simulate_station(station_cfg({0.5, 1.0, 1}, 50, 100, 1, 1)),
                    DomainError);
    CHECK_THROWS_AS(simulate_station(station_cfg({0.5, 1.0, 1}, 100, 0, 1, 0)),
                    DomainError);
    CHECK_THROWS_AS(simulate_station(station_cfg({0.5, -1.0, 1}, 100, 0, 1, 1)),
                    DomainError);
}

TEST_CASE("station estimates agree with closed forms") {
    // Moderate run; the acceptance suite runs the long version.
    StationSimConfig cfg = station_cfg({1.117, 0.409, 5}, 30000, 2000, 20240101, 10);
    const auto report = validate_station_against_analytics(cfg);
    REQUIRE(report.rows.size() == 4);
    for (const auto& row : report.rows) {
        INFO(row.metric, " analytic=", row.analytical, " sim=", row.simulated,
             " z=", row.z);
        CHECK_FALSE(row.flagged);
    }
}

TEST_CASE("tandem flow conserves throughput and little's law") {
    const auto cfg = tandem_cfg({0.8, 1.0, 2}, 1.0, 2, 40000, 4000, 555, 8);
    const auto res = simulate(cfg);

    // Stage-two throughput equals the external arrival rate within 3 SE.
    const auto& thr2 = res.stages[1].throughput;
    REQUIRE(thr2.std_error > 0.0);
    CHECK(std::fabs(thr2.mean - 0.8) <= 3.0 * thr2.std_error);

    // Per-stage Little's law: N equals throughput * T within three
    // combined standard errors (the two sides are estimated separately).
    for (int s = 0; s < 2; ++s) {
        std::vector<double> lhs, rhs;
        for (const auto& rep : res.replications) {
            const auto& st = rep.stages[s];
            lhs.push_back(st.mean_in_system);
            rhs.push_back(st.throughput * st.mean_sojourn);
        }
        auto mean_se = [](const std::vector<double>& v) {
            double m = 0.0;
            for (double x : v) m += x;
            m /= v.size();
            double ss = 0.0;
            for (double x : v) ss += (x - m) * (x - m);
            return std::pair<double, double>(
                m, std::sqrt(ss / (v.size() - 1) / v.size()));
        };
        const auto [ml, sl] = mean_se(lhs);
        const auto [mr, sr] = mean_se(rhs);
        const double combined = std::sqrt(sl * sl + sr * sr);
        INFO("stage ", s + 1, " N=", ml, " thr*T=", mr, " combined se ", combined);
        CHECK(std::fabs(ml - mr) <= 3.0 * combined);
    }

    // The discrepancy report against ThroughputConservation analytics is
    // clean at this horizon.
    const auto report = validate_against_analytics(cfg);
    REQUIRE(report.rows.size() == 12);
    CHECK_FALSE(report.any_flagged);
}

TEST_CASE("event trace is ordered and well formed") {
    std::ostringstream trace;
    auto cfg = tandem_cfg({0.9, 1.0, 2}, 1.5, 1, 200, 0, 31337, 2);
    simulate(cfg, &trace);

    std::istringstream in(trace.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "replication,time,event,customer_id,stage,queue_len");

    int rows = 0;
    int last_rep = -1;
    double last_time = 0.0;
    while (std::getline(in, line)) {
        ++rows;
        int rep = -1, stage = -1, queue_len = -1;
        long long cust = -1;
        double t = -1.0;
        char event[32] = {0};
        const int got = std::sscanf(line.c_str(), "%d,%lf,%31[^,],%lld,%d,%d",
                                    &rep, &t, event, &cust, &stage, &queue_len);
        REQUIRE(got == 6);
        if (rep != last_rep) {
            last_rep = rep;
            last_time = 0.0;
        }
        // Processed-event timestamps are nondecreasing per replication.
        CHECK(t >= last_time);
        last_time = t;
        CHECK((std::string(event) == "arrival" || std::string(event) == "departure"));
        CHECK(stage >= 1);
        CHECK(stage <= 2);
        CHECK(queue_len >= 0);
        CHECK(cust >= 1);
    }
    CHECK(rows > 100);
}

TEST_CASE("single replication uses batch-means standard errors") {
    const auto res = simulate_station(station_cfg({0.8, 1.0, 2}, 20000, 1000, 8, 1));
    CHECK(res.stages[0].mean_in_system.std_error > 0.0);
    CHECK(res.stages[0].mean_wait.std_error > 0.0);
}

TEST_CASE("exponential sampler moments") {
    constexpr int kDraws = 1000000;
    const double rate = 0.409;
    Xoshiro256pp rng(1);
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < kDraws; ++i) {
        const double x = rng.exponential(rate);
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / kDraws;
    const double var = sum_sq / kDraws - mean * mean;
    const double want_mean = 1.0 / rate;
    const double want_var = want_mean * want_mean;
    // SE(mean) = sigma/sqrt(n); SE(var) ~ sigma^2 sqrt(8/n) for exponentials.
    CHECK(std::fabs(mean - want_mean) <= 3.0 * want_mean / std::sqrt(kDraws));
    CHECK(std::fabs(var - want_var) <=
          3.0 * want_var * std::sqrt(8.0 / kDraws));
}

TEST_CASE("substreams are decorrelated") {
    CHECK(substream_seed(42, 0) != substream_seed(42, 1));
    Xoshiro256pp a = Xoshiro256pp::for_substream(42, 0);
    Xoshiro256pp b = Xoshiro256pp::for_substream(42, 1);
    int equal = 0;
    for (int i = 0; i < 1000; ++i) {
        if (a.next() == b.next()) ++equal;
    }
    CHECK(equal == 0);
}
