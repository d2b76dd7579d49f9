#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "tandemq/errors.hpp"
#include "tandemq/field_data.hpp"

using namespace tandemq;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(TANDEMQ_FIXTURES_DIR) / "reference";

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("tandemq_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
    fs::path write(const std::string& name, const std::string& content) const {
        const fs::path p = path / name;
        std::ofstream f(p);
        f << content;
        return p;
    }
};

const char* kCentersHeader = "center_id,daily_arrivals,servers_stage1,servers_stage2\n";
const char* kObsHeader = "center_id,stage,duration_minutes\n";

} // namespace

TEST_CASE("reference fixture loads and reproduces the reference rates") {
    const auto set = load_observations(kFixtures / "centers.csv",
                                       kFixtures / "observations.csv");
    CHECK(set.centers.size() == 6);
    CHECK(set.workday_minutes == 480.0);

    double total = 0.0;
    for (const auto& c : set.centers) total += c.daily_arrivals;
    CHECK(total / 6.0 == doctest::Approx(536.0));

    CHECK(estimate_arrival_rate(set) ==
          doctest::Approx(536.0 / 480.0).epsilon(1e-12));
    CHECK(estimate_service_rate(set, Stage::One) ==
          doctest::Approx(0.409).epsilon(1e-12));
    CHECK(estimate_service_rate(set, Stage::Two) ==
          doctest::Approx(0.244).epsilon(1e-12));
    CHECK(mean_server_count(set, Stage::One) == doctest::Approx(5.0));
    CHECK(mean_server_count(set, Stage::Two) == doctest::Approx(4.0));
}

TEST_CASE("arrival rate arithmetic") {
    TempDir tmp;
    const auto centers = tmp.write("c.csv", std::string(kCentersHeader) +
                                                "roum,722,7,6\n");
    const auto obs = tmp.write("o.csv", kObsHeader);
    const auto set = load_observations(centers, obs);
    CHECK(estimate_arrival_rate(set) ==
          doctest::Approx(722.0 / 480.0).epsilon(1e-12));

    // Workday length scales the rate inversely.
    const auto half_day = load_observations(centers, obs, 240.0);
    CHECK(estimate_arrival_rate(half_day) ==
          doctest::Approx(2.0 * 722.0 / 480.0).epsilon(1e-12));

    const auto idle_centers =
        tmp.write("c0.csv", std::string(kCentersHeader) + "x,0,1,1\n");
    const auto idle = load_observations(idle_centers, obs);
    CHECK(estimate_arrival_rate(idle) == 0.0);
}

TEST_CASE("empty inputs") {
    TempDir tmp;
    const auto centers = tmp.write("c.csv", kCentersHeader);
    const auto obs = tmp.write("o.csv", kObsHeader);
    const auto set = load_observations(centers, obs);
    CHECK(set.centers.empty());
    CHECK(set.observations.empty());
    CHECK_THROWS_AS(estimate_arrival_rate(set), EmptyDataError);
    CHECK_THROWS_AS(estimate_service_rate(set, Stage::One), EmptyDataError);
    CHECK_THROWS_AS(mean_server_count(set, Stage::One), EmptyDataError);
}

TEST_CASE("service rate estimation") {
    TempDir tmp;
    const auto centers =
        tmp.write("c.csv", std::string(kCentersHeader) + "a,100,2,2\n");
    // Constant durations d give exactly 1/d.
    const auto obs = tmp.write("o.csv", std::string(kObsHeader) +
                                            "a,1,2.5\na,1,2.5\na,1,2.5\n");
    const auto set = load_observations(centers, obs);
    CHECK(estimate_service_rate(set, Stage::One) ==
          doctest::Approx(0.4).epsilon(1e-12));
    CHECK_THROWS_AS(estimate_service_rate(set, Stage::Two), EmptyDataError);

    // Mean duration 2.445 -> 0.409 at print precision.
    const auto obs2 = tmp.write("o2.csv", std::string(kObsHeader) +
                                              "a,1,2.4\na,1,2.49\n");
    const auto set2 = load_observations(centers, obs2);
    CHECK(estimate_service_rate(set2, Stage::One) ==
          doctest::Approx(0.409).epsilon(1e-3));
}

TEST_CASE("parse errors carry line numbers") {
    TempDir tmp;
    const auto obs_ok = tmp.write("o.csv", kObsHeader);

    auto expect_line = [&](const std::string& centers_body, std::size_t line) {
        const auto centers = tmp.write("bad.csv", centers_body);
        try {
            load_observations(centers, obs_ok);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == line);
        }
    };

    expect_line("wrong,header\n", 1);
    expect_line(std::string(kCentersHeader) + "a,10,1,1\nb,xx,1,1\n", 3);
    expect_line(std::string(kCentersHeader) + "a,10,1\n", 2);
    expect_line(std::string(kCentersHeader) + "a,10,1,1\na,9,1,1\n", 3);
    expect_line(std::string(kCentersHeader) + "a,-2,1,1\n", 2);
    expect_line(std::string(kCentersHeader) + "a,10,0,1\n", 2);
    expect_line(std::string(kCentersHeader) + ",10,1,1\n", 2);
    // Blank numeric fields are hard errors, not imputed.
    expect_line(std::string(kCentersHeader) + "a,,1,1\n", 2);
}

TEST_CASE("observation validation") {
    TempDir tmp;
    const auto centers =
        tmp.write("c.csv", std::string(kCentersHeader) + "a,10,1,1\n");

    auto expect_line = [&](const std::string& obs_body, std::size_t line) {
        const auto obs = tmp.write("bad_obs.csv", obs_body);
        try {
            load_observations(centers, obs);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == line);
        }
    };

    // Unknown center: referential error with the row number.
    expect_line(std::string(kObsHeader) + "a,1,2.0\nghost,1,2.0\n", 3);
    // Stage outside {1,2}.
    expect_line(std::string(kObsHeader) + "a,3,2.0\n", 2);
    // Nonpositive durations.
    expect_line(std::string(kObsHeader) + "a,1,0\n", 2);
    expect_line(std::string(kObsHeader) + "a,2,-1.5\n", 2);
    // Malformed numbers.
    expect_line(std::string(kObsHeader) + "a,1,fast\n", 2);
    expect_line(std::string(kObsHeader) + "a,1,2.0minutes\n", 2);
}

TEST_CASE("round-trip through canonical csv") {
    const auto set = load_observations(kFixtures / "centers.csv",
                                       kFixtures / "observations.csv");
    TempDir tmp;
    save_observations(set, tmp.path / "c.csv", tmp.path / "o.csv");
    const auto again = load_observations(tmp.path / "c.csv", tmp.path / "o.csv");

    REQUIRE(again.centers.size() == set.centers.size());
    for (std::size_t i = 0; i < set.centers.size(); ++i) {
        CHECK(again.centers[i].center_id == set.centers[i].center_id);
        CHECK(again.centers[i].daily_arrivals == set.centers[i].daily_arrivals);
        CHECK(again.centers[i].servers_stage1 == set.centers[i].servers_stage1);
        CHECK(again.centers[i].servers_stage2 == set.centers[i].servers_stage2);
    }
    REQUIRE(again.observations.size() == set.observations.size());
    for (std::size_t i = 0; i < set.observations.size(); ++i) {
        CHECK(again.observations[i].center_id == set.observations[i].center_id);
        CHECK(again.observations[i].stage == set.observations[i].stage);
        // Bit-exact: durations are serialized with %.17g.
        CHECK(again.observations[i].duration_minutes ==
              set.observations[i].duration_minutes);
    }
    CHECK(estimate_service_rate(again, Stage::One) ==
          estimate_service_rate(set, Stage::One));
}

TEST_CASE("cluster shares and inclusion probabilities") {
    const auto frame = load_clusters(kFixtures / "clusters.csv", 8);
    REQUIRE(frame.clusters.size() == 8);
    CHECK(frame.clusters[0].name == "beirut");

    CHECK(cluster_share(frame, 0) == doctest::Approx(0.35283767).epsilon(1e-6));
    CHECK(cluster_share(frame, 1) == doctest::Approx(0.22445693).epsilon(1e-6));

    double total = 0.0;
    for (std::size_t j = 0; j < frame.clusters.size(); ++j) {
        total += cluster_share(frame, j);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(inclusion_probability(frame, 0) ==
          doctest::Approx(0.96923101).epsilon(1e-6));

    // k = 1 reduces to the share.
    ClusterFrame single_draw = frame;
    single_draw.draws = 1;
    for (std::size_t j = 0; j < frame.clusters.size(); ++j) {
        CHECK(inclusion_probability(single_draw, j) ==
              doctest::Approx(cluster_share(single_draw, j)).epsilon(1e-12));
    }

    // Monotone in k.
    double prev = 0.0;
    for (int k = 1; k <= 8; ++k) {
        ClusterFrame f = frame;
        f.draws = k;
        const double pi = inclusion_probability(f, 2);
        CHECK(pi >= prev);
        prev = pi;
    }

    // Monotone in the cluster size.
    ClusterFrame grown = frame;
    grown.clusters[2].size += 50000;
    CHECK(inclusion_probability(grown, 2) > inclusion_probability(frame, 2));
}

TEST_CASE("cluster frame edge cases") {
    ClusterFrame frame;
    frame.clusters = {{"only", 1234}};
    frame.draws = 1;
    CHECK(cluster_share(frame, 0) == 1.0);
    CHECK(inclusion_probability(frame, 0) == doctest::Approx(1.0));

    ClusterFrame with_empty;
    with_empty.clusters = {{"a", 10}, {"none", 0}};
    with_empty.draws = 2;
    CHECK(cluster_share(with_empty, 1) == 0.0);
    CHECK(inclusion_probability(with_empty, 1) == 0.0);

    CHECK_THROWS_AS(cluster_share(frame, 5), DomainError);

    ClusterFrame bad_k;
    bad_k.clusters = {{"a", 10}};
    bad_k.draws = 2; // k exceeds the cluster count
    CHECK_THROWS_AS(validate(bad_k), DomainError);
    bad_k.draws = 0;
    CHECK_THROWS_AS(validate(bad_k), DomainError);

    ClusterFrame zero_total;
    zero_total.clusters = {{"a", 0}};
    zero_total.draws = 1;
    CHECK_THROWS_AS(validate(zero_total), DomainError);
}
