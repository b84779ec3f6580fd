#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rtdoa/harness.hpp"
#include "rtdoa/protocol.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitCorruptOnly = 3;

rtdoa::ScenarioConfig load_config(const std::string& path, int dim) {
    if (path.empty()) return rtdoa::ScenarioConfig::defaults(dim);
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    json j;
    in >> j;
    return rtdoa::ScenarioConfig::from_json(j);
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "csv";
    std::uint64_t seed = 0;
    int trials = 0;
    bool fail_on_corrupt = false;

    void apply(rtdoa::ScenarioConfig& config) const {
        if (seed) config.seed = seed;
        if (trials) config.trials = trials;
    }
    rtdoa::ReportFormat report_format() const {
        const auto f = rtdoa::parse_format(format);
        if (!f) throw std::invalid_argument("unknown format: " + format);
        return *f;
    }
    fs::path out(const std::string& name) const {
        fs::create_directories(out_dir);
        return fs::path(out_dir) / name;
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON scenario config file");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--format", opts.format, "csv|json|plotdata")->default_str("csv");
    cmd->add_option("--seed", opts.seed, "override RNG seed");
    cmd->add_option("--trials", opts.trials, "override trial count");
    cmd->add_flag("--fail-on-corrupt", opts.fail_on_corrupt,
                  "exit 3 when every localization is corrupt_system");
}

const char* extension(rtdoa::ReportFormat f) {
    switch (f) {
        case rtdoa::ReportFormat::csv: return ".csv";
        case rtdoa::ReportFormat::json: return ".json";
        case rtdoa::ReportFormat::plotdata: return ".dat";
    }
    return ".dat";
}

rtdoa::WeightTable calibrate_once(const rtdoa::ScenarioConfig& config) {
    rtdoa::RngEngine rng = rtdoa::make_stream(config.seed, {0});
    const rtdoa::AttackVector attack =
        config.scenario_id == 0
            ? config.explicit_attack
            : rtdoa::scenario_attack(config.scenario_id, config.delays.empty() ? 0.0 : config.delays[0],
                                     config.network.size());
    const rtdoa::TdoaSet batch =
        rtdoa::synthesize_tdoa_set(config.network, config.calibration_source, attack, config.signal,
                                   config.calibration_samples, rng);
    return rtdoa::define_weights(config.network, config.calibration_source, batch,
                                 config.exponent_v, config.dim);
}

int cmd_calibrate(const CommonOpts& opts) {
    rtdoa::ScenarioConfig config = load_config(opts.config_path, 2);
    opts.apply(config);
    const rtdoa::WeightTable table = calibrate_once(config);
    const json j = table.to_json();
    std::ofstream out(opts.out("weights.json"));
    out << j.dump(2) << "\n";
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_locate(const CommonOpts& opts, const std::string& weights_path) {
    rtdoa::ScenarioConfig config = load_config(opts.config_path, 2);
    opts.apply(config);

    rtdoa::WeightTable table;
    if (weights_path.empty()) {
        table = calibrate_once(config);
    } else {
        std::ifstream in(weights_path);
        if (!in) throw std::invalid_argument("cannot read weights file: " + weights_path);
        json j;
        in >> j;
        table = rtdoa::WeightTable::from_json(j);
    }

    const rtdoa::AttackVector attack =
        config.scenario_id == 0
            ? config.explicit_attack
            : rtdoa::scenario_attack(config.scenario_id, config.delays.empty() ? 0.0 : config.delays[0],
                                     config.network.size());
    rtdoa::RngEngine rng = rtdoa::make_stream(config.seed, {1});
    const rtdoa::TdoaSet snapshot =
        rtdoa::synthesize_tdoa_set(config.network, config.source, attack, config.signal, 1, rng);
    const rtdoa::LocalizationResult result = rtdoa::robust_localize(
        table, config.network, snapshot, config.signal, config.dim, config.robust_options());
    const rtdoa::ActionBand band = rtdoa::recommend_action(table.cfd, result.status);
    std::cout << rtdoa::result_to_json(result, table.cfd, band).dump(2) << "\n";
    if (opts.fail_on_corrupt && result.status == rtdoa::LocalizationStatus::corrupt_system)
        return kExitCorruptOnly;
    return 0;
}

int cmd_montecarlo(const CommonOpts& opts, std::vector<int> scenarios) {
    rtdoa::ScenarioConfig config = load_config(opts.config_path, 2);
    opts.apply(config);
    if (scenarios.empty()) scenarios = {1, 2, 3, 4, 5};
    const rtdoa::ReportFormat format = opts.report_format();

    bool any_estimate = false;
    for (int scenario : scenarios) {
        rtdoa::ScenarioConfig c = config;
        c.scenario_id = scenario;
        const rtdoa::ExperimentReport report = rtdoa::run_scenario(c);
        const fs::path path = opts.out("scenario" + std::to_string(scenario) + extension(format));
        rtdoa::emit_report(report, format, path);
        for (const rtdoa::DelayAggregate& a : report.aggregates) {
            if (a.corrupt_count < a.trials) any_estimate = true;
            std::cout << "scenario " << scenario << " delay " << a.delay_s << "s: mean robust "
                      << a.mean_robust_error << " m, mean naive " << a.mean_naive_error
                      << " m, corrupt " << 100.0 * a.corrupt_fraction() << "%, cfd "
                      << a.mean_cfd << "\n";
        }
        std::cout << "wrote " << path.string() << "\n";
    }
    if (opts.fail_on_corrupt && !any_estimate) return kExitCorruptOnly;
    return 0;
}

int cmd_trajectory(const CommonOpts& opts) {
    rtdoa::ScenarioConfig config = load_config(opts.config_path, 2);
    opts.apply(config);
    const rtdoa::TrajectoryReport report = rtdoa::run_trajectory(config);
    const rtdoa::ReportFormat format = opts.report_format();
    const fs::path path = opts.out(std::string("trajectory") + extension(format));
    rtdoa::emit_report(report, format, path);
    bool any_estimate = false;
    for (const rtdoa::TrajectoryRow& r : report.rows) {
        if (r.status == rtdoa::LocalizationStatus::estimate) any_estimate = true;
        std::cout << "instant " << r.instant << ": naive " << r.naive_error_m << " m, robust "
                  << r.robust_error_m << " m, band " << rtdoa::to_string(r.band) << "\n";
    }
    std::cout << "cfd " << report.cfd << ", wrote " << path.string() << "\n";
    if (opts.fail_on_corrupt && !any_estimate) return kExitCorruptOnly;
    return 0;
}

int cmd_appendix(const CommonOpts& opts) {
    rtdoa::ScenarioConfig config = load_config(opts.config_path, 2);
    opts.apply(config);
    const std::vector<double> a_values{3.0, 6.0, 15000.0};
    const std::vector<double> q_values{0.0, 0.1, 0.2, 0.3, 0.4, 0.45, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    const rtdoa::AppendixReport report = rtdoa::run_appendix_experiment(
        a_values, q_values, config.selection, config.trials, config.exponent_v, config.seed,
        config.threads);
    const rtdoa::ReportFormat format = opts.report_format();
    const fs::path path = opts.out(std::string("appendix") + extension(format));
    rtdoa::emit_report(report, format, path);
    for (const rtdoa::AppendixCell& c : report.cells)
        std::cout << "scenario " << c.scenario << " a=" << c.a << " q=" << c.q << ": all-m "
                  << c.mean_weight_all << ", selected-n " << c.mean_weight_selected << "\n";
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_protocol(const CommonOpts& opts, const std::string& adversary_name, double jam_q,
                 double relay_latency, int samples) {
    rtdoa::ScenarioConfig config = load_config(opts.config_path, 2);
    opts.apply(config);

    rtdoa::AdversaryModel adversary;
    if (adversary_name == "none") adversary.kind = rtdoa::AdversaryKind::none;
    else if (adversary_name == "weak") adversary.kind = rtdoa::AdversaryKind::weak_replay;
    else if (adversary_name == "strong") adversary.kind = rtdoa::AdversaryKind::strong_jam_replay;
    else throw std::invalid_argument("unknown adversary: " + adversary_name);
    adversary.relay_latency = relay_latency;
    adversary.jam_proportion = jam_q;

    rtdoa::RngEngine key_rng = rtdoa::make_stream(config.seed, {99});
    const rtdoa::KeyMaterial keys = rtdoa::KeyMaterial::generate(key_rng);
    rtdoa::SessionConfig session;
    session.target_samples = samples;
    session.sigma = config.signal.fixed_sigma;
    const rtdoa::SessionResult result = rtdoa::run_calibration_session(
        config.network, config.calibration_source, keys, adversary, session, config.seed);

    const fs::path log_path = opts.out("protocol_events.log");
    std::ofstream log(log_path);
    for (const std::string& line : result.event_log) log << line << "\n";

    const rtdoa::WeightTable table = rtdoa::define_weights(
        config.network, config.calibration_source, result.samples, config.exponent_v, config.dim);
    std::cout << "challenges issued: " << result.challenges_issued
              << ", accepted measurements: " << result.accepted
              << ", duplicates discarded: " << result.discarded_duplicates
              << ", frames ignored: " << result.ignored_frames << "\n";
    std::cout << "weights from session samples: " << table.to_json().dump(2) << "\n";
    std::cout << "wrote " << log_path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TDOA localization robust to timing attacks: simulation toolkit"};
    app.require_subcommand(1);

    CommonOpts calibrate_opts, locate_opts, mc_opts, traj_opts, appendix_opts, proto_opts;
    std::string weights_path;
    std::vector<int> scenarios;
    std::string adversary = "none";
    double jam_q = 0.3;
    double relay_latency = 1e-6;
    int samples = 15;

    add_common(app.add_subcommand("calibrate", "compute a weight table from a calibration pass"),
               calibrate_opts);
    auto* locate = app.add_subcommand("locate", "single robust localization");
    add_common(locate, locate_opts);
    locate->add_option("--weights", weights_path, "weight table JSON from `calibrate`");
    auto* mc = app.add_subcommand("montecarlo", "scenario sweep Monte Carlo");
    add_common(mc, mc_opts);
    mc->add_option("--scenario", scenarios, "scenario template ids (default 1..5)");
    add_common(app.add_subcommand("trajectory", "trajectory study"), traj_opts);
    add_common(app.add_subcommand("appendix", "calibration-attack selection study"), appendix_opts);
    auto* proto = app.add_subcommand("protocol-sim", "challenge-response session simulation");
    add_common(proto, proto_opts);
    proto->add_option("--adversary", adversary, "none|weak|strong");
    proto->add_option("--jam-proportion", jam_q, "strong adversary jam rate");
    proto->add_option("--relay-latency", relay_latency, "replay path latency (s)");
    proto->add_option("--samples", samples, "calibration samples to collect");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("calibrate")) return cmd_calibrate(calibrate_opts);
        if (app.got_subcommand("locate")) return cmd_locate(locate_opts, weights_path);
        if (app.got_subcommand("montecarlo")) return cmd_montecarlo(mc_opts, scenarios);
        if (app.got_subcommand("trajectory")) return cmd_trajectory(traj_opts);
        if (app.got_subcommand("appendix")) return cmd_appendix(appendix_opts);
        if (app.got_subcommand("protocol-sim"))
            return cmd_protocol(proto_opts, adversary, jam_q, relay_latency, samples);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
