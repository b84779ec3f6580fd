#include "rtdoa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rtdoa/rng.hpp"

namespace rtdoa {

namespace {

constexpr double kAppendixMu = 7e-7;
constexpr double kAppendixSigma = 2.192e-9;

void parallel_for(int total, int threads, const std::function<void(int)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, total));
    if (threads == 1) {
        for (int k = 0; k < total; ++k) body(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int k = next.fetch_add(1); k < total; k = next.fetch_add(1)) body(k);
        });
    for (auto& th : pool) th.join();
}

// Student-t 97.5% quantile; exact-enough table for small samples, normal
// asymptote beyond.
double t_quantile_975(int dof) {
    static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                       2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                       2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                       2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
    if (dof < 1) return 0.0;
    if (dof <= 30) return table[dof - 1];
    return 1.96 + 2.4 / dof;
}

struct Stats {
    double mean = 0.0, ci95 = 0.0, min = 0.0, median = 0.0;
};

Stats summarize(std::vector<double> values) {
    Stats s;
    if (values.empty()) return s;
    double acc = 0.0;
    for (double v : values) acc += v;
    const auto n = static_cast<double>(values.size());
    s.mean = acc / n;
    if (values.size() > 1) {
        double var = 0.0;
        for (double v : values) var += (v - s.mean) * (v - s.mean);
        var /= (n - 1.0);
        s.ci95 = t_quantile_975(static_cast<int>(values.size()) - 1) * std::sqrt(var / n);
    }
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.median = values[values.size() / 2];
    return s;
}

Point source_at(const ScenarioConfig& config, int instant) {
    if (!config.trajectory) return config.source;
    const auto& [from, to] = *config.trajectory;
    const double t = config.trajectory_instants > 1
                         ? static_cast<double>(instant) / (config.trajectory_instants - 1)
                         : 0.0;
    if (config.dim == 2)
        return Point(from.x() + (to.x() - from.x()) * t, from.y() + (to.y() - from.y()) * t);
    return Point(from.x() + (to.x() - from.x()) * t, from.y() + (to.y() - from.y()) * t,
                 from.z() + (to.z() - from.z()) * t);
}

}  // namespace

SensorNetwork default_topology(int dim) {
    SensorNetwork net;
    net.snr_db.assign(dim == 2 ? 4 : 5, 3.0);
    if (dim == 2) {
        net.sensors = {Point(-8000.0, 8000.0), Point(8000.0, 8000.0), Point(8000.0, -8000.0),
                       Point(-8000.0, -8000.0)};
    } else if (dim == 3) {
        net.sensors = {Point(-8000.0, 8000.0, 600.0), Point(8000.0, 8000.0, 1250.0),
                       Point(8000.0, -8000.0, 900.0), Point(-8000.0, -8000.0, 700.0),
                       Point(5000.0, 3000.0, 400.0)};
    } else {
        throw std::invalid_argument("default_topology: dim must be 2 or 3");
    }
    return net;
}

std::vector<double> delay_sweep() {
    constexpr int kPoints = 25;
    const double lo = std::log10(1e-9);
    const double hi = std::log10(50.0);
    std::vector<double> out;
    out.reserve(kPoints);
    for (int k = 0; k < kPoints; ++k)
        out.push_back(std::pow(10.0, lo + (hi - lo) * k / (kPoints - 1)));
    return out;
}

AttackVector scenario_attack(int scenario_id, double delay, std::size_t sensor_count) {
    AttackVector a = AttackVector::zeros(sensor_count);
    if (sensor_count < 4 && scenario_id >= 2)
        throw std::invalid_argument("scenario_attack: templates need >= 4 sensors");
    switch (scenario_id) {
        case 1: break;
        case 2: a.offsets[0] = delay; break;
        case 3: a.offsets[0] = delay; a.offsets[1] = delay; break;
        case 4:
            a.offsets[0] = 500.0;
            a.offsets[1] = 500.0 + delay;
            a.offsets[3] = delay;
            break;
        case 5:
            a.offsets[1] = delay;
            a.offsets[2] = 2.0 * delay;
            a.offsets[3] = 500.0;
            break;
        default:
            throw std::invalid_argument("scenario_attack: template id must be 1..5");
    }
    return a;
}

ScenarioConfig ScenarioConfig::defaults(int dim) {
    ScenarioConfig c;
    c.dim = dim;
    c.network = default_topology(dim);
    if (dim == 2) {
        c.source = Point(3333.3, -889.1111);
        c.calibration_source = Point(0.0, -4000.0);
    } else {
        c.source = Point(3333.3, -889.1111, 350.0);
        c.calibration_source = Point(0.0, -4000.0, 0.0);
    }
    return c;
}

RobustOptions ScenarioConfig::robust_options() const {
    RobustOptions opts;
    opts.region = BoundingBox::centered(grid_half_extent);
    opts.z_min = 0.0;
    opts.z_max = grid_half_extent;
    return opts;
}

void ScenarioConfig::validate() const {
    network.validate(dim);
    signal.validate();
    selection.validate();
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (calibration_samples < 1) throw std::invalid_argument("config: calibration_samples >= 1");
    if (exponent_v <= 0.0) throw std::invalid_argument("config: exponent_v must be positive");
    if (scenario_id < 0 || scenario_id > 5) throw std::invalid_argument("config: scenario_id 0..5");
    if (scenario_id == 0 && attack_schedule.empty() && explicit_attack.size() != network.size())
        throw std::invalid_argument("config: explicit attack must cover every sensor");
    for (const AttackVector& a : attack_schedule)
        if (a.size() != network.size())
            throw std::invalid_argument("config: schedule entries must cover every sensor");
    if (source.dim() != dim || calibration_source.dim() != dim)
        throw std::invalid_argument("config: source dimensions must match dim");
    if (trajectory && (trajectory->first.dim() != dim || trajectory->second.dim() != dim))
        throw std::invalid_argument("config: trajectory dimensions must match dim");
}

namespace {

Point point_from_json(const nlohmann::json& j) {
    if (!j.is_array() || (j.size() != 2 && j.size() != 3))
        throw std::invalid_argument("config: a point must be an array of 2 or 3 numbers");
    if (j.size() == 2) return Point(j.at(0).get<double>(), j.at(1).get<double>());
    return Point(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

nlohmann::json point_to_json(const Point& p) {
    nlohmann::json out = nlohmann::json::array();
    for (int d = 0; d < p.dim(); ++d) out.push_back(p[d]);
    return out;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
    const int dim = j.value("dim", 2);
    ScenarioConfig c = defaults(dim);
    c.grid_half_extent = j.value("grid_half_extent_m", c.grid_half_extent);

    if (j.contains("sensors")) {
        const auto& s = j.at("sensors");
        if (s.is_string()) {
            const std::string name = s.get<std::string>();
            if (name == "default4") c.network = default_topology(2);
            else if (name == "default5_3d") c.network = default_topology(3);
            else throw std::invalid_argument("config: unknown sensors preset " + name);
        } else {
            c.network.sensors.clear();
            for (const auto& p : s) c.network.sensors.push_back(point_from_json(p));
            c.network.snr_db.assign(c.network.sensors.size(), 3.0);
        }
    }
    if (j.contains("snr_db")) c.network.snr_db = j.at("snr_db").get<std::vector<double>>();
    if (j.contains("signal_speed")) c.network.signal_speed = j.at("signal_speed").get<double>();

    if (j.contains("source")) c.source = point_from_json(j.at("source"));
    if (j.contains("calibration_source"))
        c.calibration_source = point_from_json(j.at("calibration_source"));
    if (j.contains("trajectory")) {
        const auto& t = j.at("trajectory");
        c.trajectory = {point_from_json(t.at("from")), point_from_json(t.at("to"))};
        c.trajectory_instants = t.value("instants", 9);
    }

    if (j.contains("noise")) {
        const auto& noise = j.at("noise");
        const std::string regime = noise.value("regime", "fixed");
        if (regime == "fixed") c.signal.regime = SnrRegime::fixed;
        else if (regime == "low_snr") c.signal.regime = SnrRegime::low_snr;
        else if (regime == "high_snr") c.signal.regime = SnrRegime::high_snr;
        else throw std::invalid_argument("config: unknown noise regime " + regime);
        c.signal.fixed_sigma = noise.value("sigma", c.signal.fixed_sigma);
        c.signal.t_int = noise.value("t_int", c.signal.t_int);
        c.signal.bandwidth = noise.value("bandwidth", c.signal.bandwidth);
        c.signal.f_center = noise.value("f_center", c.signal.f_center);
        c.signal.f_low = noise.value("f_low", c.signal.f_low);
        c.signal.f_high = noise.value("f_high", c.signal.f_high);
        c.signal.low_snr_f0_squared = noise.value("f0_squared_variant", false);
        c.signal.correlated_noise = noise.value("correlated", false);
    }

    if (j.contains("attack")) {
        const auto& attack = j.at("attack");
        if (attack.contains("template")) {
            c.scenario_id = attack.at("template").get<int>();
            if (attack.contains("delays")) {
                if (attack.at("delays").is_string()) c.delays.clear();  // "sweep25"
                else c.delays = attack.at("delays").get<std::vector<double>>();
            }
        } else if (attack.contains("offsets")) {
            c.scenario_id = 0;
            c.explicit_attack.offsets = attack.at("offsets").get<std::vector<double>>();
        } else if (attack.contains("schedule")) {
            c.scenario_id = 0;
            for (const auto& entry : attack.at("schedule"))
                c.attack_schedule.push_back(AttackVector{entry.get<std::vector<double>>()});
        }
    }

    c.calibration_samples = j.value("calibration_samples", c.calibration_samples);
    if (j.contains("selection")) {
        const auto& sel = j.at("selection");
        c.selection.m = sel.value("m", c.selection.m);
        c.selection.n = sel.value("n", c.selection.n);
        c.selection.b = sel.value("b", c.selection.b);
    }
    c.exponent_v = j.value("exponent_v", c.exponent_v);
    c.seed = j.value("seed", c.seed);
    c.trials = j.value("trials", c.trials);
    c.threads = j.value("threads", c.threads);
    c.validate();
    return c;
}

nlohmann::json ScenarioConfig::to_json() const {
    nlohmann::json j;
    j["dim"] = dim;
    j["grid_half_extent_m"] = grid_half_extent;
    j["sensors"] = nlohmann::json::array();
    for (const Point& p : network.sensors) j["sensors"].push_back(point_to_json(p));
    j["snr_db"] = network.snr_db;
    j["signal_speed"] = network.signal_speed;
    j["source"] = point_to_json(source);
    j["calibration_source"] = point_to_json(calibration_source);
    if (trajectory)
        j["trajectory"] = {{"from", point_to_json(trajectory->first)},
                           {"to", point_to_json(trajectory->second)},
                           {"instants", trajectory_instants}};
    j["noise"] = {{"regime", signal.regime == SnrRegime::fixed
                                 ? "fixed"
                                 : signal.regime == SnrRegime::low_snr ? "low_snr" : "high_snr"},
                  {"sigma", signal.fixed_sigma}};
    if (!attack_schedule.empty()) {
        nlohmann::json schedule = nlohmann::json::array();
        for (const AttackVector& a : attack_schedule) schedule.push_back(a.offsets);
        j["attack"] = {{"schedule", schedule}};
    } else if (scenario_id == 0)
        j["attack"] = {{"offsets", explicit_attack.offsets}};
    else if (delays.empty())
        j["attack"] = {{"template", scenario_id}, {"delays", "sweep25"}};
    else
        j["attack"] = {{"template", scenario_id}, {"delays", delays}};
    j["calibration_samples"] = calibration_samples;
    j["selection"] = {{"m", selection.m}, {"n", selection.n}, {"b", selection.b}};
    j["exponent_v"] = exponent_v;
    j["seed"] = seed;
    j["trials"] = trials;
    j["threads"] = threads;
    return j;
}

ExperimentReport run_scenario(const ScenarioConfig& config) {
    config.validate();
    const RobustOptions opts = config.robust_options();
    std::vector<double> delays = config.delays;
    if (delays.empty()) delays = config.scenario_id <= 1 ? std::vector<double>{0.0} : delay_sweep();
    if (config.scenario_id == 0) delays = {0.0};

    ExperimentReport report;
    report.rows.resize(delays.size() * static_cast<std::size_t>(config.trials));

    for (std::size_t d_idx = 0; d_idx < delays.size(); ++d_idx) {
        const double delay = delays[d_idx];
        const AttackVector attack =
            config.scenario_id == 0 ? config.explicit_attack
                                    : scenario_attack(config.scenario_id, delay, config.network.size());
        parallel_for(config.trials, config.threads, [&, d_idx, delay](int trial) {
            RngEngine rng = make_stream(config.seed,
                                        {static_cast<std::uint64_t>(config.scenario_id),
                                         static_cast<std::uint64_t>(d_idx),
                                         static_cast<std::uint64_t>(trial)});
            const TdoaSet calib = synthesize_tdoa_set(config.network, config.calibration_source,
                                                      attack, config.signal,
                                                      config.calibration_samples, rng);
            const WeightTable table = define_weights(config.network, config.calibration_source,
                                                     calib, config.exponent_v, config.dim);
            const TdoaSet snapshot =
                synthesize_tdoa_set(config.network, config.source, attack, config.signal, 1, rng);
            const LocalizationResult robust =
                robust_localize(table, config.network, snapshot, config.signal, config.dim, opts);
            const LocalizationResult naive =
                naive_localize(config.network, snapshot, config.signal, config.dim, opts);

            TrialRow row;
            row.scenario_id = config.scenario_id;
            row.delay_s = delay;
            row.trial = trial;
            row.naive_error_m = distance(*naive.position, config.source);
            row.robust_error_m = robust.position
                                     ? distance(*robust.position, config.source)
                                     : std::numeric_limits<double>::quiet_NaN();
            row.cfd = table.cfd;
            row.status = robust.status;
            row.band = recommend_action(table.cfd, robust.status);
            report.rows[d_idx * static_cast<std::size_t>(config.trials) +
                        static_cast<std::size_t>(trial)] = row;
        });
    }

    for (std::size_t d_idx = 0; d_idx < delays.size(); ++d_idx) {
        DelayAggregate agg;
        agg.delay_s = delays[d_idx];
        std::vector<double> robust_errors, naive_errors, cfds;
        for (int t = 0; t < config.trials; ++t) {
            const TrialRow& row =
                report.rows[d_idx * static_cast<std::size_t>(config.trials) + static_cast<std::size_t>(t)];
            ++agg.trials;
            naive_errors.push_back(row.naive_error_m);
            cfds.push_back(row.cfd);
            if (row.status == LocalizationStatus::corrupt_system) ++agg.corrupt_count;
            else robust_errors.push_back(row.robust_error_m);
        }
        const Stats rs = summarize(robust_errors);
        const Stats ns = summarize(naive_errors);
        const Stats cs = summarize(cfds);
        agg.mean_robust_error = rs.mean;
        agg.ci95_robust_error = rs.ci95;
        agg.median_robust_error = rs.median;
        agg.mean_naive_error = ns.mean;
        agg.median_naive_error = ns.median;
        agg.mean_cfd = cs.mean;
        agg.min_cfd = cs.min;
        report.aggregates.push_back(agg);
    }
    return report;
}

TrajectoryReport run_trajectory(const ScenarioConfig& config) {
    ScenarioConfig c = config;
    if (!c.trajectory) {
        if (c.dim == 2)
            c.trajectory = {Point(-6000.0, -4000.0), Point(6000.0, 4000.0)};
        else
            c.trajectory = {Point(-7000.0, -2000.0, 350.0), Point(7000.0, -2000.0, 350.0)};
    }
    c.validate();
    const RobustOptions opts = c.robust_options();
    const auto attack_at = [&](int instant) -> AttackVector {
        if (!c.attack_schedule.empty()) {
            const auto idx = std::min(static_cast<std::size_t>(instant), c.attack_schedule.size() - 1);
            return c.attack_schedule[idx];
        }
        if (c.scenario_id == 0) return c.explicit_attack;
        return scenario_attack(c.scenario_id, c.delays.empty() ? 0.0 : c.delays[0], c.network.size());
    };

    // Weights are recalibrated once per schedule epoch: whenever the attack
    // vector changes between instants.
    TrajectoryReport report;
    WeightTable table;
    AttackVector current;
    std::uint64_t epoch = 0;
    for (int instant = 0; instant < c.trajectory_instants; ++instant) {
        const AttackVector attack = attack_at(instant);
        if (instant == 0 || attack.offsets != current.offsets) {
            current = attack;
            RngEngine calib_rng = make_stream(c.seed, {0, epoch++});
            const TdoaSet calib = synthesize_tdoa_set(c.network, c.calibration_source, attack,
                                                      c.signal, c.calibration_samples, calib_rng);
            table = define_weights(c.network, c.calibration_source, calib, c.exponent_v, c.dim);
            if (instant == 0) report.cfd = table.cfd;
        }

        const Point truth = source_at(c, instant);
        RngEngine rng = make_stream(c.seed, {1, static_cast<std::uint64_t>(instant)});
        const TdoaSet snapshot = synthesize_tdoa_set(c.network, truth, attack, c.signal, 1, rng);
        const LocalizationResult robust =
            robust_localize(table, c.network, snapshot, c.signal, c.dim, opts);
        const LocalizationResult naive = naive_localize(c.network, snapshot, c.signal, c.dim, opts);

        TrajectoryRow row;
        row.instant = instant;
        row.true_position = truth;
        row.naive_error_m = distance(*naive.position, truth);
        row.robust_error_m = robust.position ? distance(*robust.position, truth)
                                             : std::numeric_limits<double>::quiet_NaN();
        row.naive_alt_error_m = c.dim == 3 ? std::abs(naive.position->z() - truth.z()) : 0.0;
        row.robust_alt_error_m =
            c.dim == 3 && robust.position ? std::abs(robust.position->z() - truth.z()) : 0.0;
        row.cfd = table.cfd;
        row.status = robust.status;
        row.band = recommend_action(table.cfd, robust.status);
        report.rows.push_back(row);
    }
    return report;
}

AppendixReport run_appendix_experiment(const std::vector<double>& a_values,
                                       const std::vector<double>& q_values,
                                       const SelectionSpec& selection, int trials, double v,
                                       std::uint64_t seed, int threads) {
    selection.validate();
    if (trials < 1) throw std::invalid_argument("appendix: trials must be >= 1");
    AppendixReport report;

    for (int scenario = 1; scenario <= 2; ++scenario) {
        const bool shifted_is_attack = scenario == 1;
        for (std::size_t ai = 0; ai < a_values.size(); ++ai) {
            for (std::size_t qi = 0; qi < q_values.size(); ++qi) {
                std::vector<double> weights_all(static_cast<std::size_t>(trials));
                std::vector<double> weights_sel(static_cast<std::size_t>(trials));
                parallel_for(trials, threads, [&](int trial) {
                    RngEngine rng = make_stream(seed, {static_cast<std::uint64_t>(scenario), ai, qi,
                                                       static_cast<std::uint64_t>(trial)});
                    CalibrationAttackSpec spec{q_values[qi], a_values[ai], selection.m};
                    const std::vector<double> samples = calibration_attack_samples(
                        kAppendixMu, kAppendixSigma, spec, shifted_is_attack, rng);

                    const auto weight_of = [&](std::span<const double> data) {
                        std::vector<double> errors(data.begin(), data.end());
                        for (double& e : errors) e -= kAppendixMu;
                        const double p = ztest_pvalue(errors, kAppendixSigma);
                        return p == 0.0 ? 0.0 : std::pow(p, 1.0 / v);
                    };
                    weights_all[static_cast<std::size_t>(trial)] = weight_of(samples);
                    const std::vector<double> selected = select_measurements(samples, selection);
                    weights_sel[static_cast<std::size_t>(trial)] = weight_of(selected);
                });
                const Stats all = summarize(std::move(weights_all));
                const Stats sel = summarize(std::move(weights_sel));
                report.cells.push_back({scenario, a_values[ai], q_values[qi], all.mean, sel.mean,
                                        sel.ci95, sel.min});
            }
        }
    }
    return report;
}

std::optional<ReportFormat> parse_format(const std::string& name) {
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    if (name == "plotdata") return ReportFormat::plotdata;
    return std::nullopt;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string status_name(LocalizationStatus s) {
    return s == LocalizationStatus::estimate ? "estimate" : "corrupt_system";
}

}  // namespace

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "scenario_id,delay_s,trial,naive_error_m,robust_error_m,cfd,band,status\n";
    for (const TrialRow& r : report.rows)
        out << r.scenario_id << ',' << r.delay_s << ',' << r.trial << ',' << r.naive_error_m << ','
            << r.robust_error_m << ',' << r.cfd << ',' << to_string(r.band) << ','
            << status_name(r.status) << '\n';
    return out.str();
}

ExperimentReport report_from_csv(const std::string& text) {
    ExperimentReport report;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string field;
        TrialRow r;
        std::getline(fields, field, ','); r.scenario_id = std::stoi(field);
        std::getline(fields, field, ','); r.delay_s = std::stod(field);
        std::getline(fields, field, ','); r.trial = std::stoi(field);
        std::getline(fields, field, ','); r.naive_error_m = std::stod(field);
        std::getline(fields, field, ','); r.robust_error_m = std::stod(field);
        std::getline(fields, field, ','); r.cfd = std::stod(field);
        std::getline(fields, field, ',');
        r.band = field == "full_trust"      ? ActionBand::full_trust
                 : field == "fair_trust"    ? ActionBand::fair_trust
                 : field == "probable_zone" ? ActionBand::probable_zone
                                            : ActionBand::corrupt;
        std::getline(fields, field, ',');
        r.status = field == "estimate" ? LocalizationStatus::estimate
                                       : LocalizationStatus::corrupt_system;
        report.rows.push_back(r);
    }
    return report;
}

nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const TrialRow& r : report.rows) {
        nlohmann::json row;
        row["scenario_id"] = r.scenario_id;
        row["delay_s"] = r.delay_s;
        row["trial"] = r.trial;
        row["naive_error_m"] = r.naive_error_m;
        if (std::isnan(r.robust_error_m)) row["robust_error_m"] = nullptr;
        else row["robust_error_m"] = r.robust_error_m;
        row["cfd"] = r.cfd;
        row["band"] = to_string(r.band);
        row["status"] = status_name(r.status);
        j["rows"].push_back(row);
    }
    j["aggregates"] = nlohmann::json::array();
    for (const DelayAggregate& a : report.aggregates)
        j["aggregates"].push_back({{"delay_s", a.delay_s},
                                   {"trials", a.trials},
                                   {"corrupt_fraction", a.corrupt_fraction()},
                                   {"mean_robust_error_m", a.mean_robust_error},
                                   {"ci95_robust_error_m", a.ci95_robust_error},
                                   {"median_robust_error_m", a.median_robust_error},
                                   {"mean_naive_error_m", a.mean_naive_error},
                                   {"median_naive_error_m", a.median_naive_error},
                                   {"mean_cfd", a.mean_cfd},
                                   {"min_cfd", a.min_cfd}});
    return j;
}

void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
    switch (format) {
        case ReportFormat::csv:
            write_file(path, report_to_csv(report));
            return;
        case ReportFormat::json:
            write_file(path, report_to_json(report).dump(2) + "\n");
            return;
        case ReportFormat::plotdata: {
            std::ostringstream out;
            out.precision(17);
            out << "# delay_s mean_robust_m ci95_m corrupt_fraction mean_naive_m mean_cfd\n";
            for (const DelayAggregate& a : report.aggregates)
                out << a.delay_s << ' ' << a.mean_robust_error << ' ' << a.ci95_robust_error << ' '
                    << a.corrupt_fraction() << ' ' << a.mean_naive_error << ' ' << a.mean_cfd
                    << '\n';
            write_file(path, out.str());
            return;
        }
    }
}

void emit_report(const TrajectoryReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
    if (format == ReportFormat::json) {
        nlohmann::json j;
        j["cfd"] = report.cfd;
        j["rows"] = nlohmann::json::array();
        for (const TrajectoryRow& r : report.rows) {
            nlohmann::json row;
            row["instant"] = r.instant;
            row["true_position"] = point_to_json(r.true_position);
            row["naive_error_m"] = r.naive_error_m;
            if (std::isnan(r.robust_error_m)) row["robust_error_m"] = nullptr;
            else row["robust_error_m"] = r.robust_error_m;
            row["naive_alt_error_m"] = r.naive_alt_error_m;
            row["robust_alt_error_m"] = r.robust_alt_error_m;
            row["cfd"] = r.cfd;
            row["band"] = to_string(r.band);
            row["status"] = status_name(r.status);
            j["rows"].push_back(row);
        }
        write_file(path, j.dump(2) + "\n");
        return;
    }
    std::ostringstream out;
    out.precision(17);
    const char sep = format == ReportFormat::csv ? ',' : ' ';
    if (format == ReportFormat::csv)
        out << "instant,naive_error_m,robust_error_m,naive_alt_error_m,robust_alt_error_m,cfd,band,status\n";
    else
        out << "# instant naive_error_m robust_error_m naive_alt_error_m robust_alt_error_m cfd\n";
    for (const TrajectoryRow& r : report.rows) {
        out << r.instant << sep << r.naive_error_m << sep << r.robust_error_m << sep
            << r.naive_alt_error_m << sep << r.robust_alt_error_m << sep << r.cfd;
        if (format == ReportFormat::csv) out << sep << to_string(r.band) << sep << status_name(r.status);
        out << '\n';
    }
    write_file(path, out.str());
}

void emit_report(const AppendixReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
    if (format == ReportFormat::json) {
        nlohmann::json j;
        j["mu"] = report.mu;
        j["sigma"] = report.sigma;
        j["cells"] = nlohmann::json::array();
        for (const AppendixCell& c : report.cells)
            j["cells"].push_back({{"scenario", c.scenario},
                                  {"a", c.a},
                                  {"q", c.q},
                                  {"mean_weight_all", c.mean_weight_all},
                                  {"mean_weight_selected", c.mean_weight_selected},
                                  {"ci95_weight_selected", c.ci95_weight_selected},
                                  {"min_weight_selected", c.min_weight_selected}});
        write_file(path, j.dump(2) + "\n");
        return;
    }
    std::ostringstream out;
    out.precision(17);
    const char sep = format == ReportFormat::csv ? ',' : ' ';
    if (format == ReportFormat::csv)
        out << "scenario,a,q,mean_weight_all,mean_weight_selected,ci95_weight_selected,min_weight_selected\n";
    else
        out << "# scenario a q mean_weight_all mean_weight_selected ci95 min\n";
    for (const AppendixCell& c : report.cells)
        out << c.scenario << sep << c.a << sep << c.q << sep << c.mean_weight_all << sep
            << c.mean_weight_selected << sep << c.ci95_weight_selected << sep
            << c.min_weight_selected << '\n';
    write_file(path, out.str());
}

}  // namespace rtdoa
