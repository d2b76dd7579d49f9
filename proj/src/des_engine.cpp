#include "tandemq/des_engine.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <thread>

#include "tandemq/errors.hpp"
#include "tandemq/rng.hpp"

namespace tandemq {

namespace {

constexpr int kSegments = 10; // batch-means segments, used for SEs at R == 1

struct Customer {
    double net_arrival = 0.0;
    double stage_arrival = 0.0;
    double acc_wait = 0.0; // waits accumulated across stages so far
    long long id = 0;
    bool counted = false; // arrived to the network after warmup
};

enum class EventKind : std::uint8_t { Departure = 0, Arrival = 1 };

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::Arrival;
    std::uint64_t seq = 0;
    int stage = 0;
    Customer customer; // meaningful for departures
};

// Min-heap order: (time, departure-before-arrival, sequence).
struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

struct SegmentAcc {
    std::array<double, kSegments> area_n{};
    std::array<double, kSegments> area_q{};
    std::array<double, kSegments> sum_wait{};
    std::array<double, kSegments> sum_sojourn{};
    std::array<long long, kSegments> count{};
};

struct NetAcc {
    std::array<double, kSegments> sum_wait{};
    std::array<double, kSegments> sum_sojourn{};
    std::array<long long, kSegments> count{};
};

struct StageRuntime {
    double mu = 0.0;
    int servers = 0;
    int busy = 0;
    std::deque<Customer> fifo;
    SegmentAcc acc;
};

struct RunSpec {
    std::vector<QueueParams> stages; // stages[0].lambda drives arrivals
    double horizon = 0.0;
    double warmup = 0.0;
};

class Replication {
public:
    Replication(const RunSpec& spec, std::uint64_t stream_seed, int rep_index,
                std::ostream* trace)
        : spec_(spec), rng_(stream_seed), rep_index_(rep_index), trace_(trace) {
        stages_.resize(spec.stages.size());
        for (std::size_t s = 0; s < spec.stages.size(); ++s) {
            stages_[s].mu = spec.stages[s].mu;
            stages_[s].servers = spec.stages[s].servers;
        }
        seg_len_ = (spec.horizon - spec.warmup) / kSegments;
    }

    void run() {
        schedule_arrival();
        while (!events_.empty() && events_.top().time <= spec_.horizon) {
            Event ev = events_.top();
            events_.pop();
            if (ev.time < now_) {
                throw std::logic_error("event calendar went backwards");
            }
            integrate_to(ev.time);
            now_ = ev.time;
            if (ev.kind == EventKind::Arrival) {
                handle_arrival();
            } else {
                handle_departure(ev.stage, ev.customer);
            }
        }
        integrate_to(spec_.horizon);
    }

    ReplicationSummary summarize() const {
        ReplicationSummary out;
        const double window = spec_.horizon - spec_.warmup;
        double net_in_system = 0.0;
        double net_queue = 0.0;
        for (const auto& st : stages_) {
            StationReplication r;
            double area_n = 0.0, area_q = 0.0, sw = 0.0, ss = 0.0;
            long long cnt = 0;
            for (int i = 0; i < kSegments; ++i) {
                area_n += st.acc.area_n[i];
                area_q += st.acc.area_q[i];
                sw += st.acc.sum_wait[i];
                ss += st.acc.sum_sojourn[i];
                cnt += st.acc.count[i];
            }
            r.mean_in_system = area_n / window;
            r.mean_queue_length = area_q / window;
            r.mean_wait = cnt > 0 ? sw / cnt : 0.0;
            r.mean_sojourn = cnt > 0 ? ss / cnt : 0.0;
            r.throughput = cnt / window;
            r.completed = cnt;
            net_in_system += r.mean_in_system;
            net_queue += r.mean_queue_length;
            out.stages.push_back(r);
        }
        StationReplication n;
        double sw = 0.0, ss = 0.0;
        long long cnt = 0;
        for (int i = 0; i < kSegments; ++i) {
            sw += net_.sum_wait[i];
            ss += net_.sum_sojourn[i];
            cnt += net_.count[i];
        }
        n.mean_in_system = net_in_system;
        n.mean_queue_length = net_queue;
        n.mean_wait = cnt > 0 ? sw / cnt : 0.0;
        n.mean_sojourn = cnt > 0 ? ss / cnt : 0.0;
        n.throughput = cnt / window;
        n.completed = cnt;
        out.network = n;
        return out;
    }

    // Per-segment metric values, for batch-means SEs when only one
    // replication is available.
    std::vector<ReplicationSummary> segment_summaries() const {
        std::vector<ReplicationSummary> out(kSegments);
        for (int i = 0; i < kSegments; ++i) {
            double net_in_system = 0.0;
            double net_queue = 0.0;
            for (const auto& st : stages_) {
                StationReplication r;
                r.mean_in_system = st.acc.area_n[i] / seg_len_;
                r.mean_queue_length = st.acc.area_q[i] / seg_len_;
                r.mean_wait = st.acc.count[i] > 0 ? st.acc.sum_wait[i] / st.acc.count[i] : 0.0;
                r.mean_sojourn = st.acc.count[i] > 0 ? st.acc.sum_sojourn[i] / st.acc.count[i] : 0.0;
                r.throughput = st.acc.count[i] / seg_len_;
                r.completed = st.acc.count[i];
                net_in_system += r.mean_in_system;
                net_queue += r.mean_queue_length;
                out[i].stages.push_back(r);
            }
            StationReplication n;
            n.mean_in_system = net_in_system;
            n.mean_queue_length = net_queue;
            n.mean_wait = net_.count[i] > 0 ? net_.sum_wait[i] / net_.count[i] : 0.0;
            n.mean_sojourn = net_.count[i] > 0 ? net_.sum_sojourn[i] / net_.count[i] : 0.0;
            n.throughput = net_.count[i] / seg_len_;
            n.completed = net_.count[i];
            out[i].network = n;
        }
        return out;
    }

    long long total_departed_final() const { return total_departed_final_; }

private:
    void schedule_arrival() {
        const double gap = rng_.exponential(spec_.stages[0].lambda);
        if (!std::isfinite(gap)) return; // lambda == 0: no arrivals ever
        Event ev;
        ev.time = now_ + gap;
        ev.kind = EventKind::Arrival;
        ev.seq = next_seq_++;
        events_.push(ev);
    }

    void handle_arrival() {
        Customer cust;
        cust.net_arrival = now_;
        cust.stage_arrival = now_;
        cust.id = ++next_customer_;
        cust.counted = now_ >= spec_.warmup;
        enter_stage(0, cust);
        schedule_arrival();
    }

    void handle_departure(int stage, Customer cust) {
        auto& st = stages_[stage];
        --st.busy;
        if (cust.counted) {
            const int seg = segment_of(now_);
            if (seg >= 0) {
                st.acc.sum_sojourn[seg] += now_ - cust.stage_arrival;
                st.acc.count[seg] += 1;
            }
        }
        trace_row("departure", cust.id, stage);
        if (stage + 1 < static_cast<int>(stages_.size())) {
            cust.stage_arrival = now_;
            enter_stage(stage + 1, cust);
        } else {
            ++total_departed_final_;
            if (cust.counted) {
                const int seg = segment_of(now_);
                if (seg >= 0) {
                    net_.sum_sojourn[seg] += now_ - cust.net_arrival;
                    net_.sum_wait[seg] += cust.acc_wait;
                    net_.count[seg] += 1;
                }
            }
        }
        if (!st.fifo.empty()) {
            Customer next = st.fifo.front();
            st.fifo.pop_front();
            ++st.busy;
            start_service(stage, next);
        }
    }

    void enter_stage(int stage, const Customer& cust) {
        auto& st = stages_[stage];
        trace_row("arrival", cust.id, stage);
        if (st.busy < st.servers) {
            ++st.busy;
            start_service(stage, cust);
        } else {
            st.fifo.push_back(cust);
        }
    }

    void start_service(int stage, Customer cust) {
        auto& st = stages_[stage];
        const double wait = now_ - cust.stage_arrival;
        cust.acc_wait += wait;
        if (cust.counted) {
            const int seg = segment_of(now_);
            if (seg >= 0) {
                st.acc.sum_wait[seg] += wait;
            }
        }
        Event ev;
        ev.time = now_ + rng_.exponential(st.mu);
        ev.kind = EventKind::Departure;
        ev.seq = next_seq_++;
        ev.stage = stage;
        ev.customer = cust;
        events_.push(ev);
    }

    int segment_of(double t) const {
        if (t < spec_.warmup) return -1;
        const int seg = static_cast<int>((t - spec_.warmup) / seg_len_);
        return std::min(seg, kSegments - 1);
    }

    // Adds n(t) and q(t) areas over [now_, t], clipped to the measured
    // window and split across segment boundaries.
    void integrate_to(double t) {
        double from = std::max(now_, spec_.warmup);
        const double to = std::min(t, spec_.horizon);
        if (to <= from) return;
        while (from < to) {
            const int seg = segment_of(from);
            const double seg_end = spec_.warmup + (seg + 1) * seg_len_;
            const double upto = (seg == kSegments - 1) ? to : std::min(to, seg_end);
            const double dt = upto - from;
            for (auto& st : stages_) {
                const int q = static_cast<int>(st.fifo.size());
                st.acc.area_n[seg] += dt * (st.busy + q);
                st.acc.area_q[seg] += dt * q;
            }
            from = upto;
        }
    }

    void trace_row(const char* event, long long customer_id, int stage) {
        if (!trace_) return;
        const auto& st = stages_[stage];
        (*trace_) << rep_index_ << ',' << now_ << ',' << event << ','
                  << customer_id << ',' << (stage + 1) << ',' << st.fifo.size()
                  << '\n';
    }

    RunSpec spec_;
    Xoshiro256pp rng_;
    int rep_index_ = 0;
    std::ostream* trace_ = nullptr;
    std::vector<StageRuntime> stages_;
    NetAcc net_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    double now_ = 0.0;
    double seg_len_ = 0.0;
    std::uint64_t next_seq_ = 0;
    long long next_customer_ = 0;
    long long total_departed_final_ = 0;
};

MetricEstimate estimate_from(const std::vector<double>& values) {
    MetricEstimate est;
    if (values.empty()) return est;
    double sum = 0.0;
    for (double v : values) sum += v;
    est.mean = sum / values.size();
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - est.mean) * (v - est.mean);
        const double var = ss / (values.size() - 1);
        est.std_error = std::sqrt(var / values.size());
    }
    return est;
}

StationEstimates aggregate_station(
    const std::vector<ReplicationSummary>& reps,
    const std::vector<ReplicationSummary>& se_source,
    const std::function<const StationReplication&(const ReplicationSummary&)>& pick) {
    StationEstimates out;
    // Point estimates come from the replications; spread comes from
    // se_source (the replications themselves, or batch-means segments
    // when only one replication was run).
    auto collect = [&](auto field) {
        std::vector<double> points, spread;
        points.reserve(reps.size());
        spread.reserve(se_source.size());
        for (const auto& r : reps) points.push_back(pick(r).*field);
        for (const auto& r : se_source) spread.push_back(pick(r).*field);
        MetricEstimate est;
        est.mean = estimate_from(points).mean;
        est.std_error = estimate_from(spread).std_error;
        return est;
    };
    out.mean_in_system = collect(&StationReplication::mean_in_system);
    out.mean_queue_length = collect(&StationReplication::mean_queue_length);
    out.mean_wait = collect(&StationReplication::mean_wait);
    out.mean_sojourn = collect(&StationReplication::mean_sojourn);
    out.throughput = collect(&StationReplication::throughput);
    for (const auto& r : reps) out.completed += pick(r).completed;
    return out;
}

SimResult run_simulation(const RunSpec& spec, std::uint64_t seed,
                         int replications, bool parallel, std::ostream* trace) {
    if (!(spec.warmup >= 0.0) || !(spec.horizon > spec.warmup)) {
        throw DomainError("simulate: need horizon > warmup >= 0, got horizon = " +
                          std::to_string(spec.horizon) + ", warmup = " +
                          std::to_string(spec.warmup));
    }
    if (replications < 1) {
        throw DomainError("simulate: replications must be >= 1");
    }

    std::vector<ReplicationSummary> reps(replications);
    std::vector<std::vector<ReplicationSummary>> segments(replications);
    std::vector<long long> final_departures(replications, 0);

    auto run_one = [&](int r, std::ostream* tr) {
        Replication rep(spec, substream_seed(seed, static_cast<std::uint64_t>(r)),
                        r, tr);
        rep.run();
        reps[r] = rep.summarize();
        if (replications == 1) segments[r] = rep.segment_summaries();
        final_departures[r] = rep.total_departed_final();
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = (parallel && !trace)
                            ? static_cast<int>(std::min<unsigned>(hw, replications))
                            : 1;
    if (workers <= 1) {
        for (int r = 0; r < replications; ++r) run_one(r, trace);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int r = next.fetch_add(1); r < replications;
                     r = next.fetch_add(1)) {
                    run_one(r, nullptr);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    const std::vector<ReplicationSummary>& se_source =
        replications == 1 ? segments[0] : reps;

    SimResult result;
    result.replications = reps;
    result.seed = seed;
    const std::size_t n_stages = spec.stages.size();
    for (std::size_t s = 0; s < n_stages; ++s) {
        result.stages.push_back(aggregate_station(
            reps, se_source,
            [s](const ReplicationSummary& r) -> const StationReplication& {
                return r.stages[s];
            }));
    }
    result.network = aggregate_station(
        reps, se_source,
        [](const ReplicationSummary& r) -> const StationReplication& {
            return r.network;
        });
    for (long long d : final_departures) result.customers_completed += d;
    return result;
}

void check_sim_stability(const std::vector<QueueParams>& stages, double lambda,
                         bool allow_unstable) {
    if (lambda < 0.0 || !std::isfinite(lambda)) {
        throw DomainError("simulate: arrival rate must be finite and >= 0");
    }
    for (std::size_t s = 0; s < stages.size(); ++s) {
        if (!(stages[s].mu > 0.0) || stages[s].servers < 1) {
            throw DomainError("simulate: stage " + std::to_string(s + 1) +
                              " needs mu > 0 and servers >= 1");
        }
        if (lambda == 0.0 || allow_unstable) continue;
        const double phi = lambda / (stages[s].servers * stages[s].mu);
        if (phi >= 1.0) {
            throw UnstableError(
                "simulate: stage " + std::to_string(s + 1) +
                    " is unstable under true customer flow (phi = " +
                    std::to_string(phi) + "); pass allow_unstable to force",
                phi);
        }
    }
}

std::ostream* begin_trace(std::ostream* trace) {
    if (trace) {
        trace->precision(12);
        (*trace) << "replication,time,event,customer_id,stage,queue_len\n";
    }
    return trace;
}

} // namespace

SimResult simulate(const SimConfig& cfg, std::ostream* trace) {
    RunSpec spec;
    spec.stages = {cfg.network.stage1, cfg.network.stage2};
    spec.horizon = cfg.horizon_minutes;
    spec.warmup = cfg.warmup_minutes;
    check_sim_stability(spec.stages, cfg.network.stage1.lambda,
                        cfg.allow_unstable);
    return run_simulation(spec, cfg.seed, cfg.replications, cfg.parallel,
                          begin_trace(trace));
}

SimResult simulate_station(const StationSimConfig& cfg, std::ostream* trace) {
    RunSpec spec;
    spec.stages = {cfg.station};
    spec.horizon = cfg.horizon_minutes;
    spec.warmup = cfg.warmup_minutes;
    check_sim_stability(spec.stages, cfg.station.lambda, cfg.allow_unstable);
    return run_simulation(spec, cfg.seed, cfg.replications, cfg.parallel,
                          begin_trace(trace));
}

namespace {

void add_rows(DiscrepancyReport& report, const std::string& prefix,
              const StationMetrics& analytic, const StationEstimates& sim) {
    auto add = [&](const std::string& name, double a, const MetricEstimate& e) {
        DiscrepancyRow row;
        row.metric = prefix + name;
        row.analytical = a;
        row.simulated = e.mean;
        row.std_error = e.std_error;
        if (e.std_error > 0.0) {
            row.z = (e.mean - a) / e.std_error;
        } else {
            row.z = (e.mean == a)
                        ? 0.0
                        : std::copysign(std::numeric_limits<double>::infinity(),
                                        e.mean - a);
        }
        row.flagged = !(std::fabs(row.z) <= 3.0);
        report.any_flagged = report.any_flagged || row.flagged;
        report.rows.push_back(row);
    };
    add("mean_in_system", analytic.mean_in_system, sim.mean_in_system);
    add("mean_queue_length", analytic.mean_queue_length, sim.mean_queue_length);
    add("mean_wait", analytic.mean_wait, sim.mean_wait);
    add("mean_sojourn", analytic.mean_sojourn, sim.mean_sojourn);
}

} // namespace

DiscrepancyReport validate_against_analytics(const SimConfig& cfg,
                                             const SimResult& sim) {
    // Analytic stage two under true flow carries stage one's arrival rate.
    QueueParams stage2_flow = cfg.network.stage2;
    stage2_flow.lambda = cfg.network.stage1.lambda;
    const auto m1 = station_metrics(cfg.network.stage1);
    const auto m2 = station_metrics(stage2_flow);

    DiscrepancyReport report;
    add_rows(report, "stage1.", m1, sim.stages[0]);
    add_rows(report, "stage2.", m2, sim.stages[1]);

    StationMetrics net;
    net.mean_in_system = m1.mean_in_system + m2.mean_in_system;
    net.mean_queue_length = m1.mean_queue_length + m2.mean_queue_length;
    net.mean_wait = m1.mean_wait + m2.mean_wait;
    net.mean_sojourn = m1.mean_sojourn + m2.mean_sojourn;
    add_rows(report, "network.", net, sim.network);
    return report;
}

DiscrepancyReport validate_against_analytics(const SimConfig& cfg) {
    return validate_against_analytics(cfg, simulate(cfg));
}

DiscrepancyReport validate_station_against_analytics(const StationSimConfig& cfg,
                                                     const SimResult& sim) {
    const auto m = station_metrics(cfg.station);
    DiscrepancyReport report;
    add_rows(report, "station.", m, sim.stages[0]);
    return report;
}

DiscrepancyReport validate_station_against_analytics(const StationSimConfig& cfg) {
    return validate_station_against_analytics(cfg, simulate_station(cfg));
}

} // namespace tandemq
