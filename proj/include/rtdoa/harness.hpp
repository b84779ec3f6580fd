#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rtdoa/robust_loc.hpp"

namespace rtdoa {

/// Standard study deployment: 20 km grid, four corner sensors (2D) or those
/// plus a fifth mid-grid sensor at low altitude (3D), 3 dB SNR everywhere.
SensorNetwork default_topology(int dim);

/// 25 log-spaced attack delays covering 1 ns .. 50 s.
std::vector<double> delay_sweep();

/// Attack templates of the scenario study. d is the swept delay:
///   1: none,  2: S1=d,  3: S1=S2=d,  4: (500, 500+d, 0, d),  5: (0, d, 2d, 500).
AttackVector scenario_attack(int scenario_id, double delay, std::size_t sensor_count);

struct ScenarioConfig {
    int dim = 2;
    double grid_half_extent = 10000.0;
    SensorNetwork network;
    Point source;
    Point calibration_source;
    std::optional<std::pair<Point, Point>> trajectory;  // defaults per dim when absent
    int trajectory_instants = 9;
    SignalParams signal;
    int scenario_id = 1;               // 1..5 template; 0 = explicit_attack
    AttackVector explicit_attack;      // used when scenario_id == 0
    // Optional per-instant schedule for trajectory runs; instant i uses
    // entry min(i, size-1). Overrides the template/explicit attack there.
    std::vector<AttackVector> attack_schedule;
    std::vector<double> delays;        // empty = delay_sweep() (templates 2..5)
    int calibration_samples = 15;
    SelectionSpec selection{160, 30, 12};
    double exponent_v = 15.0776;
    std::uint64_t seed = 1;
    int trials = 500;
    int threads = 0;  // 0 = hardware concurrency

    static ScenarioConfig defaults(int dim);
    static ScenarioConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    RobustOptions robust_options() const;
    void validate() const;
};

struct TrialRow {
    int scenario_id;
    double delay_s;
    int trial;
    double naive_error_m;
    double robust_error_m;  // NaN when corrupt
    double cfd;
    ActionBand band;
    LocalizationStatus status;
};

struct DelayAggregate {
    double delay_s = 0.0;
    int trials = 0;
    int corrupt_count = 0;
    double mean_robust_error = 0.0;  // over non-corrupt trials
    double ci95_robust_error = 0.0;  // Student-t half-width
    double mean_naive_error = 0.0;
    double median_robust_error = 0.0;
    double median_naive_error = 0.0;
    double mean_cfd = 0.0;
    double min_cfd = 0.0;

    double corrupt_fraction() const { return trials ? static_cast<double>(corrupt_count) / trials : 0.0; }
};

struct ExperimentReport {
    std::vector<TrialRow> rows;
    std::vector<DelayAggregate> aggregates;
};

/// Monte-Carlo run of one attack scenario over its delay sweep: per trial,
/// calibrate under the attack, localize one attacked snapshot robustly and
/// naively, and record errors, cfd and the action band. Deterministic per
/// (seed, scenario, delay index, trial); trials run on a thread pool.
ExperimentReport run_scenario(const ScenarioConfig& config);

struct TrajectoryRow {
    int instant;
    Point true_position;
    double naive_error_m;
    double robust_error_m;  // NaN when corrupt
    double naive_alt_error_m;   // 3D runs; 0 in 2D
    double robust_alt_error_m;
    double cfd;
    ActionBand band;
    LocalizationStatus status;
};

struct TrajectoryReport {
    std::vector<TrajectoryRow> rows;
    double cfd = 0.0;  // calibration happens once per schedule epoch
};

/// Localizes a moving source at equally spaced instants with a fixed attack
/// schedule; weights are calibrated once.
TrajectoryReport run_trajectory(const ScenarioConfig& config);

struct AppendixCell {
    int scenario;  // 1 = synchronized pair, 2 = non-synchronized pair
    double a;
    double q;
    double mean_weight_all;       // z-test weight from all m samples
    double mean_weight_selected;  // from the n selected samples
    double ci95_weight_selected;
    double min_weight_selected;
};

struct AppendixReport {
    std::vector<AppendixCell> cells;
    double mu = 7e-7;
    double sigma = 2.192e-9;
};

/// Calibration-attack study of the selection defense: for a synchronized and
/// a non-synchronized pair and each (a, q), the mean weight with and without
/// selection.
AppendixReport run_appendix_experiment(const std::vector<double>& a_values,
                                       const std::vector<double>& q_values,
                                       const SelectionSpec& selection, int trials, double v,
                                       std::uint64_t seed, int threads = 0);

enum class ReportFormat { csv, json, plotdata };

std::optional<ReportFormat> parse_format(const std::string& name);

void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path);
void emit_report(const TrajectoryReport& report, ReportFormat format,
                 const std::filesystem::path& path);
void emit_report(const AppendixReport& report, ReportFormat format,
                 const std::filesystem::path& path);

nlohmann::json report_to_json(const ExperimentReport& report);
std::string report_to_csv(const ExperimentReport& report);
ExperimentReport report_from_csv(const std::string& text);

}  // namespace rtdoa
