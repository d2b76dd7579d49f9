#include "tandemq/field_data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "tandemq/errors.hpp"

namespace tandemq {

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    fields.push_back(field);
    return fields;
}

long long parse_integer(const std::string& s, std::size_t line, const char* what) {
    long long value = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || s.empty()) {
        throw ParseError(std::string("expected an integer for ") + what +
                             ", got '" + s + "'",
                         line);
    }
    return value;
}

double parse_decimal(const std::string& s, std::size_t line, const char* what) {
    if (s.empty()) {
        throw ParseError(std::string("missing value for ") + what, line);
    }
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &consumed);
    } catch (const std::exception&) {
        throw ParseError(std::string("expected a decimal for ") + what +
                             ", got '" + s + "'",
                         line);
    }
    if (consumed != s.size()) {
        throw ParseError(std::string("trailing characters after ") + what +
                             " in '" + s + "'",
                         line);
    }
    return value;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open file: " + path.string(), 0);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

void expect_header(const std::vector<std::string>& lines, const std::string& want,
                   const std::filesystem::path& path) {
    if (lines.empty()) {
        throw ParseError("missing header in " + path.string() +
                             " (expected '" + want + "')",
                         1);
    }
    std::string got = lines.front();
    if (!got.empty() && got.back() == '\r') got.pop_back();
    if (got != want) {
        throw ParseError("bad header in " + path.string() + ": expected '" +
                             want + "', got '" + got + "'",
                         1);
    }
}

} // namespace

ObservationSet load_observations(const std::filesystem::path& centers_csv,
                                 const std::filesystem::path& observations_csv,
                                 double workday_minutes) {
    if (!(workday_minutes > 0.0)) {
        throw DomainError("load_observations: workday_minutes must be > 0");
    }

    ObservationSet set;
    set.workday_minutes = workday_minutes;

    const auto center_lines = read_lines(centers_csv);
    expect_header(center_lines, "center_id,daily_arrivals,servers_stage1,servers_stage2",
                  centers_csv);
    std::unordered_set<std::string> known_ids;
    for (std::size_t i = 1; i < center_lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (center_lines[i].empty()) continue;
        const auto fields = split_csv_row(center_lines[i]);
        if (fields.size() != 4) {
            throw ParseError("centers row needs 4 fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        CenterRecord rec;
        rec.center_id = fields[0];
        if (rec.center_id.empty()) {
            throw ParseError("empty center_id", line_no);
        }
        rec.daily_arrivals = parse_integer(fields[1], line_no, "daily_arrivals");
        rec.servers_stage1 =
            static_cast<int>(parse_integer(fields[2], line_no, "servers_stage1"));
        rec.servers_stage2 =
            static_cast<int>(parse_integer(fields[3], line_no, "servers_stage2"));
        if (rec.daily_arrivals < 0) {
            throw ParseError("daily_arrivals must be >= 0", line_no);
        }
        if (rec.servers_stage1 < 1 || rec.servers_stage2 < 1) {
            throw ParseError("server counts must be >= 1", line_no);
        }
        if (!known_ids.insert(rec.center_id).second) {
            throw ParseError("duplicate center_id '" + rec.center_id + "'", line_no);
        }
        set.centers.push_back(std::move(rec));
    }

    const auto obs_lines = read_lines(observations_csv);
    expect_header(obs_lines, "center_id,stage,duration_minutes", observations_csv);
    for (std::size_t i = 1; i < obs_lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (obs_lines[i].empty()) continue;
        const auto fields = split_csv_row(obs_lines[i]);
        if (fields.size() != 3) {
            throw ParseError("observations row needs 3 fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        ServiceObservation obs;
        obs.center_id = fields[0];
        if (!known_ids.count(obs.center_id)) {
            throw ParseError("observation references unknown center_id '" +
                                 obs.center_id + "'",
                             line_no);
        }
        const long long stage = parse_integer(fields[1], line_no, "stage");
        if (stage != 1 && stage != 2) {
            throw ParseError("stage must be 1 or 2, got " + std::to_string(stage),
                             line_no);
        }
        obs.stage = stage == 1 ? Stage::One : Stage::Two;
        obs.duration_minutes = parse_decimal(fields[2], line_no, "duration_minutes");
        if (!(obs.duration_minutes > 0.0)) {
            throw ParseError("duration_minutes must be > 0", line_no);
        }
        set.observations.push_back(std::move(obs));
    }
    return set;
}

void save_observations(const ObservationSet& set,
                       const std::filesystem::path& centers_csv,
                       const std::filesystem::path& observations_csv) {
    std::ofstream cen(centers_csv);
    if (!cen) throw Error("cannot write " + centers_csv.string());
    cen << "center_id,daily_arrivals,servers_stage1,servers_stage2\n";
    for (const auto& c : set.centers) {
        cen << c.center_id << ',' << c.daily_arrivals << ',' << c.servers_stage1
            << ',' << c.servers_stage2 << '\n';
    }

    std::ofstream obs(observations_csv);
    if (!obs) throw Error("cannot write " + observations_csv.string());
    obs << "center_id,stage,duration_minutes\n";
    char buf[64];
    for (const auto& o : set.observations) {
        // %.17g round-trips doubles exactly.
        std::snprintf(buf, sizeof buf, "%.17g", o.duration_minutes);
        obs << o.center_id << ',' << (o.stage == Stage::One ? 1 : 2) << ','
            << buf << '\n';
    }
}

double estimate_arrival_rate(const ObservationSet& set) {
    if (set.centers.empty()) {
        throw EmptyDataError("estimate_arrival_rate: no centers loaded");
    }
    double total = 0.0;
    for (const auto& c : set.centers) total += static_cast<double>(c.daily_arrivals);
    const double mean_daily = total / static_cast<double>(set.centers.size());
    return mean_daily / set.workday_minutes;
}

double estimate_service_rate(const ObservationSet& set, Stage stage) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& o : set.observations) {
        if (o.stage == stage) {
            total += o.duration_minutes;
            ++count;
        }
    }
    if (count == 0) {
        throw EmptyDataError("estimate_service_rate: no observations for stage " +
                             std::to_string(stage == Stage::One ? 1 : 2));
    }
    return static_cast<double>(count) / total; // 1 / mean duration
}

double mean_server_count(const ObservationSet& set, Stage stage) {
    if (set.centers.empty()) {
        throw EmptyDataError("mean_server_count: no centers loaded");
    }
    double total = 0.0;
    for (const auto& c : set.centers) {
        total += (stage == Stage::One) ? c.servers_stage1 : c.servers_stage2;
    }
    return total / static_cast<double>(set.centers.size());
}

ClusterFrame load_clusters(const std::filesystem::path& clusters_csv, int draws) {
    const auto lines = read_lines(clusters_csv);
    expect_header(lines, "cluster,vaccinated_count", clusters_csv);
    ClusterFrame frame;
    frame.draws = draws;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (lines[i].empty()) continue;
        const auto fields = split_csv_row(lines[i]);
        if (fields.size() != 2) {
            throw ParseError("clusters row needs 2 fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        ClusterFrame::Cluster cl;
        cl.name = fields[0];
        if (cl.name.empty()) throw ParseError("empty cluster name", line_no);
        cl.size = parse_integer(fields[1], line_no, "vaccinated_count");
        if (cl.size < 0) throw ParseError("vaccinated_count must be >= 0", line_no);
        frame.clusters.push_back(std::move(cl));
    }
    validate(frame);
    return frame;
}

void validate(const ClusterFrame& frame) {
    long long total = 0;
    for (const auto& c : frame.clusters) total += c.size;
    if (total <= 0) {
        throw DomainError("ClusterFrame: total cluster size must be positive");
    }
    if (frame.draws < 1) {
        throw DomainError("ClusterFrame: k must be >= 1");
    }
    if (static_cast<std::size_t>(frame.draws) > frame.clusters.size()) {
        throw DomainError("ClusterFrame: k = " + std::to_string(frame.draws) +
                          " exceeds the number of clusters (" +
                          std::to_string(frame.clusters.size()) + ")");
    }
}

namespace {

long long total_size(const ClusterFrame& frame) {
    long long total = 0;
    for (const auto& c : frame.clusters) total += c.size;
    return total;
}

void check_index(const ClusterFrame& frame, std::size_t j, const char* op) {
    if (j >= frame.clusters.size()) {
        throw DomainError(std::string(op) + ": cluster index " + std::to_string(j) +
                          " out of range");
    }
}

} // namespace

double cluster_share(const ClusterFrame& frame, std::size_t j) {
    validate(frame);
    check_index(frame, j, "cluster_share");
    return static_cast<double>(frame.clusters[j].size) /
           static_cast<double>(total_size(frame));
}

double inclusion_probability(const ClusterFrame& frame, std::size_t j) {
    validate(frame);
    check_index(frame, j, "inclusion_probability");
    const double share = cluster_share(frame, j);
    return 1.0 - std::pow(1.0 - share, static_cast<double>(frame.draws));
}

} // namespace tandemq
