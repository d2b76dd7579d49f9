#pragma once

// Report assembly for the CLI: tables in the shape of the reference
// reports (station metrics, variance/CI tables, network table, scenario
// and tail tables, simulation estimates), rendered as text, canonical
// JSON, or flat CSV.
//
// Canonical means: stable key order, no wall-clock content (the
// generated_at field is filled from SOURCE_DATE_EPOCH when set, else left
// empty), and numbers serialized by their shortest round-trip form in
// JSON. Identical inputs therefore produce byte-identical output.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "tandemq/capacity_planner.hpp"
#include "tandemq/des_engine.hpp"
#include "tandemq/field_data.hpp"
#include "tandemq/inference.hpp"
#include "tandemq/queue_core.hpp"
#include "tandemq/tandem_network.hpp"

namespace tandemq {

inline constexpr const char* kToolVersion = "0.1.0";

class ReportDocument {
public:
    ReportDocument();

    void set_input(const std::string& key, const std::string& value);
    void set_seed(std::uint64_t seed);
    void add_note(const std::string& note);

    void add_station_section(const std::string& id, const std::string& title,
                             const QueueParams& params,
                             const StationMetrics& metrics);
    void add_variance_ci_section(const std::string& id, const std::string& title,
                                 const StationMetrics& metrics,
                                 const VarianceSet& variances, int n,
                                 double alpha);
    void add_network_section(const std::string& id, const std::string& title,
                             const NetworkMetrics& net);
    void add_tail_section(const std::string& id, const std::string& title,
                          const std::vector<TailPoint>& stage1,
                          const std::vector<TailPoint>& stage2);
    void add_scenario_section(const std::string& id, const std::string& title,
                              const std::vector<ScenarioRow>& rows);
    void add_sim_section(const std::string& id, const std::string& title,
                         const SimResult& result);
    void add_discrepancy_section(const std::string& id, const std::string& title,
                                 const DiscrepancyReport& report);
    void add_sampling_section(const std::string& id, const std::string& title,
                              const ClusterFrame& frame);
    void add_stability_section(const std::string& id, const std::string& title,
                               const std::vector<StabilityVerdict>& verdicts);

    const nlohmann::ordered_json& root() const { return root_; }

    std::string to_json() const;
    std::string to_text() const;
    std::string to_csv() const;

    // Renders in the requested format: "text", "json", or "csv".
    std::string render(const std::string& format) const;

private:
    nlohmann::ordered_json& new_section(const std::string& id,
                                        const std::string& title,
                                        const std::vector<std::string>& columns);

    nlohmann::ordered_json root_;
};

} // namespace tandemq
