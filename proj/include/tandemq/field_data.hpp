#pragma once

// Ingestion of per-center observation files, rate estimation, and the
// two-stage cluster-sampling quantities.
//
// CSV schemas (UTF-8, comma-delimited, no quoting, no thousands
// separators; missing or blank fields are hard errors):
//   centers:      center_id,daily_arrivals,servers_stage1,servers_stage2
//   observations: center_id,stage,duration_minutes     (stage is 1 or 2)
//   clusters:     cluster,vaccinated_count

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace tandemq {

enum class Stage { One = 1, Two = 2 };

struct CenterRecord {
    std::string center_id;
    long long daily_arrivals = 0; // people per day, >= 0
    int servers_stage1 = 1;
    int servers_stage2 = 1;
};

struct ServiceObservation {
    std::string center_id;
    Stage stage = Stage::One;
    double duration_minutes = 0.0; // > 0
};

// Immutable once loaded; freely shareable across threads.
struct ObservationSet {
    std::vector<CenterRecord> centers;
    std::vector<ServiceObservation> observations;
    double workday_minutes = 480.0; // 8-hour day
};

// Parses and validates both files. Throws ParseError with the 1-based
// line number on malformed rows, and on observations referencing a
// center_id absent from the centers file.
ObservationSet load_observations(const std::filesystem::path& centers_csv,
                                 const std::filesystem::path& observations_csv,
                                 double workday_minutes = 480.0);

// Canonical serialization; load_observations(save_observations(x)) == x.
void save_observations(const ObservationSet& set,
                       const std::filesystem::path& centers_csv,
                       const std::filesystem::path& observations_csv);

// lambda = mean(daily_arrivals) / workday_minutes. Throws EmptyDataError
// when there are no centers.
double estimate_arrival_rate(const ObservationSet& set);

// mu = 1 / mean(duration) over the stage's observations. Throws
// EmptyDataError when the stage has no observations.
double estimate_service_rate(const ObservationSet& set, Stage stage);

// Mean server count across centers for one stage (used to pick the
// station's c when analyzing field data).
double mean_server_count(const ObservationSet& set, Stage stage);

struct ClusterFrame {
    struct Cluster {
        std::string name;
        long long size = 0; // N_j, individuals in cluster j
    };
    std::vector<Cluster> clusters;
    int draws = 1; // k, clusters chosen
};

ClusterFrame load_clusters(const std::filesystem::path& clusters_csv, int draws);
void validate(const ClusterFrame& frame);

// N_j / sum(N).
double cluster_share(const ClusterFrame& frame, std::size_t j);

// pi_j = 1 - (1 - N_j/sum(N))^k.
double inclusion_probability(const ClusterFrame& frame, std::size_t j);

} // namespace tandemq
