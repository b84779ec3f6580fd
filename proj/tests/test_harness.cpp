#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rtdoa/harness.hpp"

using namespace rtdoa;

TEST_SUITE_BEGIN("harness");

TEST_CASE("default topology") {
    const SensorNetwork net2 = default_topology(2);
    REQUIRE(net2.size() == 4);
    for (const Point& s : net2.sensors) {
        CHECK(std::abs(s.x()) <= 10000.0);
        CHECK(std::abs(s.y()) <= 10000.0);
    }
    net2.validate(2);

    const SensorNetwork net3 = default_topology(3);
    REQUIRE(net3.size() == 5);
    CHECK(net3.sensors[0].z() == 600.0);
    CHECK(net3.sensors[1].z() == 1250.0);
    CHECK(net3.sensors[2].z() == 900.0);
    CHECK(net3.sensors[3].z() == 700.0);
    CHECK(net3.sensors[4].z() == 400.0);
    net3.validate(3);

    for (std::size_t i = 0; i < net3.size(); ++i)
        for (std::size_t j = i + 1; j < net3.size(); ++j)
            CHECK(distance(net3.sensors[i], net3.sensors[j]) > 0.0);
}

TEST_CASE("delay sweep") {
    const auto delays = delay_sweep();
    REQUIRE(delays.size() == 25);
    CHECK(delays.front() == doctest::Approx(1e-9));
    CHECK(delays.back() == doctest::Approx(50.0));
    for (std::size_t k = 1; k < delays.size(); ++k) CHECK(delays[k] > delays[k - 1]);
}

TEST_CASE("scenario attack templates") {
    CHECK(scenario_attack(1, 5.0, 4).offsets == std::vector<double>(4, 0.0));
    CHECK(scenario_attack(2, 5.0, 4).offsets == std::vector<double>{5.0, 0, 0, 0});
    CHECK(scenario_attack(3, 5.0, 4).offsets == std::vector<double>{5.0, 5.0, 0, 0});
    CHECK(scenario_attack(4, 2.0, 4).offsets == std::vector<double>{500.0, 502.0, 0.0, 2.0});
    CHECK(scenario_attack(5, 2.0, 4).offsets == std::vector<double>{0.0, 2.0, 4.0, 500.0});
    CHECK_THROWS_AS(scenario_attack(9, 1.0, 4), std::invalid_argument);
}

TEST_CASE("config JSON round trip and validation") {
    ScenarioConfig config = ScenarioConfig::defaults(2);
    config.scenario_id = 3;
    config.trials = 7;
    config.seed = 42;
    const ScenarioConfig back = ScenarioConfig::from_json(config.to_json());
    CHECK(back.scenario_id == 3);
    CHECK(back.trials == 7);
    CHECK(back.seed == 42);
    CHECK(back.network.sensors.size() == 4);
    CHECK(back.source.x() == doctest::Approx(3333.3));

    SUBCASE("bad configs throw") {
        nlohmann::json j = config.to_json();
        j["trials"] = 0;
        CHECK_THROWS_AS(ScenarioConfig::from_json(j), std::invalid_argument);
        nlohmann::json j2 = config.to_json();
        j2["attack"] = {{"template", 12}};
        CHECK_THROWS_AS(ScenarioConfig::from_json(j2), std::invalid_argument);
    }
    SUBCASE("presets") {
        nlohmann::json j;
        j["dim"] = 3;
        j["sensors"] = "default5_3d";
        const ScenarioConfig c = ScenarioConfig::from_json(j);
        CHECK(c.network.size() == 5);
    }
}

TEST_CASE("run_scenario: no-attack control at small scale") {
    ScenarioConfig config = ScenarioConfig::defaults(2);
    config.scenario_id = 1;
    config.trials = 40;
    config.seed = 7;
    const ExperimentReport report = run_scenario(config);
    REQUIRE(report.aggregates.size() == 1);
    const DelayAggregate& agg = report.aggregates.front();
    CHECK(agg.trials == 40);
    CHECK(agg.corrupt_count == 0);
    CHECK(agg.mean_robust_error < 1.0);
    CHECK(agg.min_cfd > 0.8);
    REQUIRE(report.rows.size() == 40);
    for (const TrialRow& row : report.rows) {
        CHECK(row.status == LocalizationStatus::estimate);
        CHECK(row.band == ActionBand::full_trust);
    }
}

TEST_CASE("run_scenario: single attacked sensor stays accurate at any delay") {
    ScenarioConfig config = ScenarioConfig::defaults(2);
    config.scenario_id = 2;
    config.delays = {1e-8, 1e-5, 1e-2, 50.0};
    config.trials = 120;
    config.seed = 14;
    const ExperimentReport report = run_scenario(config);
    for (const DelayAggregate& agg : report.aggregates) {
        CHECK(agg.corrupt_count == 0);
        CHECK(agg.mean_robust_error < 10.0);
        CHECK(agg.mean_cfd > 0.7);
    }
}

TEST_CASE("run_scenario is deterministic and thread-count independent") {
    ScenarioConfig config = ScenarioConfig::defaults(2);
    config.scenario_id = 2;
    config.delays = {1e-6};
    config.trials = 12;
    config.seed = 99;

    config.threads = 1;
    const ExperimentReport a = run_scenario(config);
    config.threads = 2;
    const ExperimentReport b = run_scenario(config);
    const std::string csv_a = report_to_csv(a);
    const std::string csv_b = report_to_csv(b);
    CHECK(csv_a == csv_b);
    CHECK(report_to_json(a).dump() == report_to_json(b).dump());
}

TEST_CASE("emit_report round trips") {
    ScenarioConfig config = ScenarioConfig::defaults(2);
    config.scenario_id = 2;
    config.delays = {2.47e-6};
    config.trials = 1;
    const ExperimentReport report = run_scenario(config);

    const auto dir = std::filesystem::temp_directory_path() / "rtdoa_test_reports";
    std::filesystem::create_directories(dir);

    SUBCASE("csv") {
        const auto path = dir / "one.csv";
        emit_report(report, ReportFormat::csv, path);
        std::ifstream in(path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        const ExperimentReport back = report_from_csv(buffer.str());
        REQUIRE(back.rows.size() == 1);
        CHECK(back.rows[0].scenario_id == report.rows[0].scenario_id);
        CHECK(back.rows[0].naive_error_m == doctest::Approx(report.rows[0].naive_error_m));
        CHECK(back.rows[0].band == report.rows[0].band);
    }
    SUBCASE("empty report is header-only csv") {
        const auto path = dir / "empty.csv";
        emit_report(ExperimentReport{}, ReportFormat::csv, path);
        std::ifstream in(path);
        std::string line;
        REQUIRE(std::getline(in, line));
        CHECK(line == "scenario_id,delay_s,trial,naive_error_m,robust_error_m,cfd,band,status");
        CHECK_FALSE(std::getline(in, line));
    }
    SUBCASE("json and csv row counts match") {
        const nlohmann::json j = report_to_json(report);
        const std::string csv = report_to_csv(report);
        const auto lines = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
        CHECK(j.at("rows").size() == lines - 1);
    }
    SUBCASE("plotdata has one line per aggregate") {
        const auto path = dir / "agg.dat";
        emit_report(report, ReportFormat::plotdata, path);
        std::ifstream in(path);
        std::string line;
        int rows = 0;
        while (std::getline(in, line))
            if (!line.empty() && line[0] != '#') ++rows;
        CHECK(rows == static_cast<int>(report.aggregates.size()));
    }
}

TEST_CASE("trajectory: single attacked sensor") {
    ScenarioConfig config = ScenarioConfig::defaults(2);
    config.scenario_id = 0;
    config.explicit_attack.offsets = {0.0, 0.0, 0.0, 30e-6};  // S4 by 30 us
    config.seed = 5;
    const TrajectoryReport report = run_trajectory(config);
    REQUIRE(report.rows.size() == 9);
    for (const TrajectoryRow& row : report.rows) {
        CHECK(row.naive_error_m > 2000.0);
        CHECK(row.robust_error_m < 5.0);
        CHECK(row.status == LocalizationStatus::estimate);
    }
    CHECK(report.cfd > 0.7);
}

TEST_CASE("trajectory: two attacked sensors leave two trusted pairs") {
    ScenarioConfig config = ScenarioConfig::defaults(2);
    config.scenario_id = 0;
    config.explicit_attack.offsets = {30e-6, 0.0, 30e-6, 0.0};  // S1 and S3
    config.seed = 6;
    const TrajectoryReport report = run_trajectory(config);
    REQUIRE(report.rows.size() == 9);
    for (const TrajectoryRow& row : report.rows) CHECK(row.robust_error_m < 5.0);
    CHECK(report.cfd > 0.35);
}

TEST_CASE("trajectory schedule: attack onset triggers recalibration") {
    ScenarioConfig config = ScenarioConfig::defaults(2);
    config.scenario_id = 0;
    config.seed = 9;
    // clean for four instants, then S1 delayed for the rest
    config.attack_schedule.assign(4, AttackVector::zeros(4));
    config.attack_schedule.resize(9, weak_attack({{0, 3.0e-5}}, 4));
    const TrajectoryReport report = run_trajectory(config);
    REQUIRE(report.rows.size() == 9);

    for (const TrajectoryRow& row : report.rows) {
        CHECK(row.status == LocalizationStatus::estimate);
        CHECK(row.robust_error_m < 5.0);  // the new epoch's weights drop the attacked pairs
    }
    // clean epoch trusts all six pairs; attacked epoch keeps three
    CHECK(report.rows[0].cfd > 0.8);
    for (int k = 4; k < 9; ++k) CHECK(report.rows[static_cast<std::size_t>(k)].naive_error_m > 500.0);

    SUBCASE("schedule survives the config round trip") {
        const ScenarioConfig back = ScenarioConfig::from_json(config.to_json());
        REQUIRE(back.attack_schedule.size() == 9);
        CHECK(back.attack_schedule[5].offsets[0] == 3.0e-5);
        CHECK(back.attack_schedule[2].offsets[0] == 0.0);
    }
}

TEST_CASE("trajectory 3D: altitude stays honest under attack") {
    ScenarioConfig config = ScenarioConfig::defaults(3);
    config.scenario_id = 0;
    config.explicit_attack.offsets = {30e-6, 0.0, 0.0, 0.0, 0.0};  // S1
    config.seed = 8;
    const TrajectoryReport report = run_trajectory(config);
    REQUIRE(report.rows.size() == 9);

    int naive_alt_badly_wrong = 0;
    for (const TrajectoryRow& row : report.rows) {
        CHECK(row.robust_alt_error_m < 25.0);
        CHECK(row.naive_error_m > 2000.0);
        if (row.naive_alt_error_m > 300.0) ++naive_alt_badly_wrong;
    }
    // the naive altitude is badly wrong at most instants; a few land
    // accidentally close while the planar error stays in the kilometers
    CHECK(naive_alt_badly_wrong >= 6);
    CHECK(report.cfd > 0.8);
}

TEST_CASE("appendix experiment at reduced scale") {
    const AppendixReport report =
        run_appendix_experiment({15000.0}, {0.0, 0.3}, SelectionSpec{160, 30, 12}, 60, 15.0776, 3);
    REQUIRE(report.cells.size() == 4);  // 2 scenarios x 1 a x 2 q

    const auto cell = [&](int scenario, double q) -> const AppendixCell& {
        for (const AppendixCell& c : report.cells)
            if (c.scenario == scenario && c.q == q) return c;
        throw std::logic_error("cell missing");
    };
    // synchronized pair: selection keeps the weight high even at q=0.3
    CHECK(cell(1, 0.3).mean_weight_selected > cell(1, 0.0).mean_weight_selected - 0.05);
    CHECK(cell(1, 0.3).mean_weight_all < 0.05);  // without selection the weight collapses
    // non-synchronized pair: weight stays low with and without selection
    CHECK(cell(2, 0.3).mean_weight_selected < 0.1);
    CHECK(cell(2, 0.0).mean_weight_selected < 0.1);
}

TEST_CASE("robust beats naive in every bucket beyond the noise scale") {
    // median dominance across the attack templates for delays above 10 sigma
    const double threshold = 10 * 2.192e-9;
    for (int scenario : {2, 3, 4, 5}) {
        ScenarioConfig config = ScenarioConfig::defaults(2);
        config.scenario_id = scenario;
        config.trials = 40;
        config.seed = 777;
        const ExperimentReport report = run_scenario(config);
        for (const DelayAggregate& agg : report.aggregates) {
            if (agg.delay_s <= threshold) continue;
            if (agg.corrupt_count == agg.trials) continue;  // nothing estimated
            CHECK(agg.median_robust_error < agg.median_naive_error);
        }
    }
}

TEST_CASE("corrupt rows survive the csv round trip") {
    ScenarioConfig config = ScenarioConfig::defaults(2);
    config.scenario_id = 4;
    config.delays = {1.0};  // deep in the corrupt regime
    config.trials = 2;
    config.seed = 13;
    const ExperimentReport report = run_scenario(config);
    REQUIRE(report.rows[0].status == LocalizationStatus::corrupt_system);
    const ExperimentReport back = report_from_csv(report_to_csv(report));
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0].status == LocalizationStatus::corrupt_system);
    CHECK(back.rows[0].band == ActionBand::corrupt);
    CHECK(std::isnan(back.rows[0].robust_error_m));
}

TEST_CASE("no false positives: full trust implies accuracy") {
    // across a quick sweep of every template, no trial with cfd >= 0.75 may
    // carry a large robust error
    for (int scenario : {1, 2, 3, 4, 5}) {
        ScenarioConfig config = ScenarioConfig::defaults(2);
        config.scenario_id = scenario;
        config.trials = 10;
        if (scenario >= 2) config.delays = {1e-8, 1e-6, 1e-3, 10.0};
        config.seed = 1234;
        const ExperimentReport report = run_scenario(config);
        for (const TrialRow& row : report.rows) {
            if (row.status == LocalizationStatus::estimate && row.cfd >= 0.75)
                CHECK(row.robust_error_m < 50.0);
        }
    }
}

TEST_SUITE_END();
