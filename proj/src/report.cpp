#include "tandemq/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <sstream>

#include "tandemq/errors.hpp"

namespace tandemq {

namespace {

using json = nlohmann::ordered_json;

std::string iso8601_from_epoch_env() {
    const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
    if (!epoch || !*epoch) return "";
    char* end = nullptr;
    const long long secs = std::strtoll(epoch, &end, 10);
    if (end == epoch || *end != '\0') return "";
    std::time_t t = static_cast<std::time_t>(secs);
    std::tm tm{};
    if (!gmtime_r(&t, &tm)) return "";
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json row(const std::string& metric, const std::string& unit) {
    json r;
    r["metric"] = metric;
    r["unit"] = unit;
    return r;
}

void add_ci(json& r, const ConfidenceInterval& ci) {
    r["lower"] = ci.lower;
    r["upper"] = ci.upper;
}

std::string fmt3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

ReportDocument::ReportDocument() {
    root_["meta"]["tool"] = "tandemq";
    root_["meta"]["version"] = kToolVersion;
    root_["meta"]["generated_at"] = iso8601_from_epoch_env();
    root_["meta"]["inputs"] = json::object();
    root_["sections"] = json::array();
    root_["notes"] = json::array();
}

void ReportDocument::set_input(const std::string& key, const std::string& value) {
    root_["meta"]["inputs"][key] = value;
}

void ReportDocument::set_seed(std::uint64_t seed) {
    root_["meta"]["seed"] = seed;
}

void ReportDocument::add_note(const std::string& note) {
    root_["notes"].push_back(note);
}

nlohmann::ordered_json& ReportDocument::new_section(
    const std::string& id, const std::string& title,
    const std::vector<std::string>& columns) {
    json section;
    section["id"] = id;
    section["title"] = title;
    section["columns"] = columns;
    section["rows"] = json::array();
    root_["sections"].push_back(std::move(section));
    return root_["sections"].back();
}

void ReportDocument::add_station_section(const std::string& id,
                                         const std::string& title,
                                         const QueueParams& params,
                                         const StationMetrics& m) {
    auto& sec = new_section(id, title, {"value"});
    auto push = [&](const std::string& metric, const std::string& unit, double v) {
        json r = row(metric, unit);
        r["value"] = v;
        sec["rows"].push_back(std::move(r));
    };
    push("arrival_rate", "1/min", params.lambda);
    push("service_rate", "1/min", params.mu);
    push("servers", "count", params.servers);
    push("traffic_intensity", "ratio", m.traffic_intensity);
    push("delay_probability", "prob", m.delay_probability);
    push("empty_probability", "prob", m.empty_probability);
    push("mean_queue_length", "customers", m.mean_queue_length);
    push("conditional_queue_length", "customers", m.conditional_queue_length);
    push("conditional_wait", "min", m.conditional_wait);
    push("mean_wait", "min", m.mean_wait);
    push("mean_service_time", "min", m.mean_service_time);
    push("mean_busy_servers", "servers", m.mean_busy_servers);
    push("mean_in_system", "customers", m.mean_in_system);
    push("mean_sojourn", "min", m.mean_sojourn);
    push("util_single", "prob", m.util_single);
    push("util_system", "prob", m.util_system);
    push("util_overall", "servers", m.util_overall);
}

void ReportDocument::add_variance_ci_section(const std::string& id,
                                             const std::string& title,
                                             const StationMetrics& m,
                                             const VarianceSet& v, int n,
                                             double alpha) {
    auto& sec = new_section(id, title, {"value", "variance", "lower", "upper"});
    auto push = [&](const std::string& metric, const std::string& unit,
                    double value, double variance) {
        json r = row(metric, unit);
        r["value"] = value;
        r["variance"] = variance;
        add_ci(r, confidence_interval(value, variance, n, alpha));
        sec["rows"].push_back(std::move(r));
    };
    push("mean_in_system", "customers", m.mean_in_system, v.var_in_system);
    push("mean_queue_length", "customers", m.mean_queue_length, v.var_queue_length);
    push("mean_sojourn", "min", m.mean_sojourn, v.var_sojourn);
    push("mean_wait", "min", m.mean_wait, v.var_wait);
}

void ReportDocument::add_network_section(const std::string& id,
                                         const std::string& title,
                                         const NetworkMetrics& net) {
    auto& sec = new_section(id, title, {"value", "sd", "lower", "upper"});
    auto push = [&](const std::string& metric, const std::string& unit,
                    double value, double sd, const ConfidenceInterval& ci) {
        json r = row(metric, unit);
        r["value"] = value;
        r["sd"] = sd;
        add_ci(r, ci);
        sec["rows"].push_back(std::move(r));
    };
    push("mean_in_network", "customers", net.mean_in_network, net.sd_in_network,
         net.ci_in_network);
    push("mean_queue", "customers", net.mean_queue, net.sd_queue, net.ci_queue);
    push("mean_sojourn", "min", net.mean_sojourn, net.sd_sojourn, net.ci_sojourn);
    push("mean_wait", "min", net.mean_wait, net.sd_wait, net.ci_wait);
}

void ReportDocument::add_tail_section(const std::string& id,
                                      const std::string& title,
                                      const std::vector<TailPoint>& stage1,
                                      const std::vector<TailPoint>& stage2) {
    auto& sec = new_section(id, title, {"system1", "system2"});
    const std::size_t count = std::max(stage1.size(), stage2.size());
    for (std::size_t i = 0; i < count; ++i) {
        const double t = i < stage1.size() ? stage1[i].t : stage2[i].t;
        json rw = row("wait_tail_t" + fmt12(t), "prob");
        if (i < stage1.size()) rw["system1"] = stage1[i].wait_tail;
        if (i < stage2.size()) rw["system2"] = stage2[i].wait_tail;
        sec["rows"].push_back(std::move(rw));
        json rt = row("sojourn_tail_t" + fmt12(t), "prob");
        if (i < stage1.size()) rt["system1"] = stage1[i].sojourn_tail;
        if (i < stage2.size()) rt["system2"] = stage2[i].sojourn_tail;
        sec["rows"].push_back(std::move(rt));
    }
}

void ReportDocument::add_scenario_section(const std::string& id,
                                          const std::string& title,
                                          const std::vector<ScenarioRow>& rows) {
    auto& sec = new_section(
        id, title,
        {"c1", "c2", "stable", "feasible", "phi1", "phi2", "n1", "n2", "n_net",
         "q_net", "t_net", "w_net", "lower_n", "upper_n", "lower_t", "upper_t"});
    for (const auto& sr : rows) {
        json r = row("scenario_c" + std::to_string(sr.c1) + "_c" +
                         std::to_string(sr.c2),
                     "mixed");
        r["c1"] = sr.c1;
        r["c2"] = sr.c2;
        r["stable"] = sr.stable;
        r["feasible"] = sr.feasible;
        r["phi1"] = sr.phi1;
        r["phi2"] = sr.phi2;
        if (sr.stable) {
            r["n1"] = sr.stage1->mean_in_system;
            r["n2"] = sr.stage2->mean_in_system;
            r["n_net"] = sr.network->mean_in_network;
            r["q_net"] = sr.network->mean_queue;
            r["t_net"] = sr.network->mean_sojourn;
            r["w_net"] = sr.network->mean_wait;
            r["lower_n"] = sr.network->ci_in_network.lower;
            r["upper_n"] = sr.network->ci_in_network.upper;
            r["lower_t"] = sr.network->ci_sojourn.lower;
            r["upper_t"] = sr.network->ci_sojourn.upper;
        }
        sec["rows"].push_back(std::move(r));
    }
}

void ReportDocument::add_sim_section(const std::string& id,
                                     const std::string& title,
                                     const SimResult& result) {
    auto& sec = new_section(id, title, {"mean", "std_error"});
    auto push = [&](const std::string& prefix, const StationEstimates& est) {
        auto add = [&](const std::string& name, const std::string& unit,
                       const MetricEstimate& e) {
            json r = row(prefix + name, unit);
            r["mean"] = e.mean;
            r["std_error"] = e.std_error;
            sec["rows"].push_back(std::move(r));
        };
        add("mean_in_system", "customers", est.mean_in_system);
        add("mean_queue_length", "customers", est.mean_queue_length);
        add("mean_wait", "min", est.mean_wait);
        add("mean_sojourn", "min", est.mean_sojourn);
        add("throughput", "1/min", est.throughput);
    };
    for (std::size_t s = 0; s < result.stages.size(); ++s) {
        push("stage" + std::to_string(s + 1) + ".", result.stages[s]);
    }
    if (result.stages.size() > 1) push("network.", result.network);
    json r = row("customers_completed", "count");
    r["mean"] = static_cast<double>(result.customers_completed);
    r["std_error"] = 0.0;
    sec["rows"].push_back(std::move(r));
}

void ReportDocument::add_discrepancy_section(const std::string& id,
                                             const std::string& title,
                                             const DiscrepancyReport& report) {
    auto& sec = new_section(
        id, title, {"analytical", "simulated", "std_error", "z", "flagged"});
    for (const auto& dr : report.rows) {
        json r = row(dr.metric, "mixed");
        r["analytical"] = dr.analytical;
        r["simulated"] = dr.simulated;
        r["std_error"] = dr.std_error;
        r["z"] = dr.z;
        r["flagged"] = dr.flagged;
        sec["rows"].push_back(std::move(r));
    }
}

void ReportDocument::add_sampling_section(const std::string& id,
                                          const std::string& title,
                                          const ClusterFrame& frame) {
    auto& sec = new_section(id, title, {"size", "share", "inclusion_probability"});
    for (std::size_t j = 0; j < frame.clusters.size(); ++j) {
        json r = row(frame.clusters[j].name, "mixed");
        r["size"] = frame.clusters[j].size;
        r["share"] = cluster_share(frame, j);
        r["inclusion_probability"] = inclusion_probability(frame, j);
        sec["rows"].push_back(std::move(r));
    }
}

void ReportDocument::add_stability_section(
    const std::string& id, const std::string& title,
    const std::vector<StabilityVerdict>& verdicts) {
    auto& sec = new_section(id, title, {"phi", "stable"});
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        json r = row("stage" + std::to_string(i + 1), "ratio");
        r["phi"] = verdicts[i].phi;
        r["stable"] = verdicts[i].stable;
        sec["rows"].push_back(std::move(r));
    }
}

std::string ReportDocument::to_json() const {
    return root_.dump(2) + "\n";
}

std::string ReportDocument::to_text() const {
    std::ostringstream out;
    const auto& meta = root_["meta"];
    out << meta["tool"].get<std::string>() << " "
        << meta["version"].get<std::string>() << "\n";
    const std::string ts = meta["generated_at"].get<std::string>();
    out << "generated: " << (ts.empty() ? "(unset)" : ts) << "\n";
    if (meta.contains("seed")) {
        out << "seed: " << meta["seed"].get<std::uint64_t>() << "\n";
    }
    for (const auto& [key, value] : meta["inputs"].items()) {
        out << key << ": " << value.get<std::string>() << "\n";
    }

    for (const auto& sec : root_["sections"]) {
        out << "\n== " << sec["title"].get<std::string>() << " ==\n";
        std::vector<std::string> cols;
        for (const auto& c : sec["columns"]) cols.push_back(c.get<std::string>());
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-28s %-10s", "metric", "unit");
        out << buf;
        for (const auto& c : cols) {
            std::snprintf(buf, sizeof buf, " %12s", c.c_str());
            out << buf;
        }
        out << "\n";
        for (const auto& r : sec["rows"]) {
            std::snprintf(buf, sizeof buf, "%-28s %-10s",
                          r["metric"].get<std::string>().c_str(),
                          r["unit"].get<std::string>().c_str());
            out << buf;
            for (const auto& c : cols) {
                std::string cell = "-";
                if (r.contains(c)) {
                    const auto& v = r[c];
                    if (v.is_boolean()) {
                        cell = v.get<bool>() ? "yes" : "no";
                    } else if (v.is_number_integer() || v.is_number_unsigned()) {
                        cell = std::to_string(v.get<long long>());
                    } else if (v.is_number()) {
                        cell = fmt3(v.get<double>());
                    }
                }
                std::snprintf(buf, sizeof buf, " %12s", cell.c_str());
                out << buf;
            }
            out << "\n";
        }
    }

    if (!root_["notes"].empty()) {
        out << "\nnotes:\n";
        for (const auto& n : root_["notes"]) {
            out << "  - " << n.get<std::string>() << "\n";
        }
    }
    return out.str();
}

std::string ReportDocument::to_csv() const {
    std::ostringstream out;
    out << "section,metric,unit,column,value\n";
    for (const auto& sec : root_["sections"]) {
        const std::string sid = sec["id"].get<std::string>();
        std::vector<std::string> cols;
        for (const auto& c : sec["columns"]) cols.push_back(c.get<std::string>());
        for (const auto& r : sec["rows"]) {
            for (const auto& c : cols) {
                if (!r.contains(c)) continue;
                const auto& v = r[c];
                std::string cell;
                if (v.is_boolean()) {
                    cell = v.get<bool>() ? "1" : "0";
                } else if (v.is_number_integer() || v.is_number_unsigned()) {
                    cell = std::to_string(v.get<long long>());
                } else if (v.is_number()) {
                    cell = fmt12(v.get<double>());
                } else {
                    continue;
                }
                out << sid << ',' << r["metric"].get<std::string>() << ','
                    << r["unit"].get<std::string>() << ',' << c << ',' << cell
                    << '\n';
            }
        }
    }
    return out.str();
}

std::string ReportDocument::render(const std::string& format) const {
    if (format == "json") return to_json();
    if (format == "csv") return to_csv();
    if (format == "text") return to_text();
    throw DomainError("unknown format '" + format + "' (want text, json, or csv)");
}

} // namespace tandemq
