#include "rtdoa/robust_loc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rtdoa {

std::string to_string(ActionBand band) {
    switch (band) {
        case ActionBand::full_trust: return "full_trust";
        case ActionBand::fair_trust: return "fair_trust";
        case ActionBand::probable_zone: return "probable_zone";
        case ActionBand::corrupt: return "corrupt";
    }
    return "unknown";
}

Point geometric_seed(const WlsProblem& problem, const RobustOptions& opts) {
    const double speed = problem.network.signal_speed;

    struct ActivePair {
        Hyperbola hyperbola;
        double weight;
    };
    std::vector<ActivePair> active;
    for (std::size_t k = 0; k < problem.pairs.size(); ++k) {
        if (problem.weights[k] <= 0.0) continue;
        const auto [i, j] = problem.pairs[k];
        Hyperbola h{problem.network.sensors[static_cast<std::size_t>(i)].xy(),
                    problem.network.sensors[static_cast<std::size_t>(j)].xy(),
                    problem.tdoa[k] * speed};
        if (h.degenerate()) continue;  // infeasible range difference; solver still sees the pair
        active.push_back({h, problem.weights[k]});
    }

    std::vector<Point> points;
    std::vector<double> point_weights;
    for (std::size_t a = 0; a < active.size(); ++a) {
        for (std::size_t b = a + 1; b < active.size(); ++b) {
            const IntersectionResult r = hyperbola_intersections(
                active[a].hyperbola, active[b].hyperbola, opts.region, opts.intersection_tol,
                opts.seed_dedup_tol);
            for (const Point& p : r.points) {
                points.push_back(p);
                point_weights.push_back(std::min(active[a].weight, active[b].weight));
            }
        }
    }

    Point xy = opts.region.center();
    if (!points.empty()) {
        double total = 0.0;
        for (double w : point_weights) total += w;
        if (total > 0.0)
            xy = weighted_median_seed(points, point_weights);
    }
    if (problem.dimension == 2) return xy;

    // Altitude from a coarse scan of the objective at the xy seed; keeps LM
    // out of mirror basins that near-coplanar sensor arrays create.
    constexpr int kZSamples = 201;
    double best_z = opts.z_min;
    double best_objective = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kZSamples; ++k) {
        const double z = opts.z_min + (opts.z_max - opts.z_min) * k / (kZSamples - 1);
        const double obj = wls_objective(Point(xy.x(), xy.y(), z), problem);
        if (obj < best_objective) {
            best_objective = obj;
            best_z = z;
        }
    }
    return Point(xy.x(), xy.y(), best_z);
}

namespace {

LocalizationResult solve_gated(const SensorNetwork& network, const TdoaSet& measurement,
                               std::vector<double> weights, const SignalParams& params, int dim,
                               const RobustOptions& opts) {
    WlsProblem problem;
    problem.network = network;
    problem.pairs = measurement.pairs;
    problem.tdoa = measurement.snapshot();
    problem.dimension = dim;
    problem.weights = std::move(weights);
    problem.sigma.reserve(measurement.pairs.size());
    for (const auto& [i, j] : measurement.pairs)
        problem.sigma.push_back(pair_sigma(network, i, j, params));
    problem.validate();

    const Point seed = geometric_seed(problem, opts);
    return lm_solve(problem, seed, opts.solver);
}

}  // namespace

LocalizationResult robust_localize(const WeightTable& weights, const SensorNetwork& network,
                                   const TdoaSet& measurement, const SignalParams& params, int dim,
                                   const RobustOptions& opts) {
    if (weights.pairs != measurement.pairs)
        throw std::invalid_argument("robust_localize: weight table and measurement pairs differ");
    if (weights.nonzero_count() < static_cast<std::size_t>(dim)) {
        LocalizationResult result;
        result.status = LocalizationStatus::corrupt_system;
        result.diagnostic = "fewer trusted pairs than dimensions";
        return result;
    }
    return solve_gated(network, measurement, weights.weights, params, dim, opts);
}

LocalizationResult naive_localize(const SensorNetwork& network, const TdoaSet& measurement,
                                  const SignalParams& params, int dim, const RobustOptions& opts) {
    return solve_gated(network, measurement, std::vector<double>(measurement.pairs.size(), 1.0),
                       params, dim, opts);
}

ActionBand recommend_action(double cfd, LocalizationStatus status) {
    if (cfd < 0.0 || cfd > 1.0) throw std::invalid_argument("recommend_action: cfd outside [0,1]");
    if (status == LocalizationStatus::corrupt_system) return ActionBand::corrupt;
    if (cfd >= 0.75) return ActionBand::full_trust;
    if (cfd >= 0.3) return ActionBand::fair_trust;
    return ActionBand::probable_zone;
}

nlohmann::json result_to_json(const LocalizationResult& result, double cfd, ActionBand band) {
    nlohmann::json j;
    j["status"] = result.status == LocalizationStatus::estimate ? "estimate" : "corrupt_system";
    if (result.position) {
        nlohmann::json pos = nlohmann::json::array();
        for (int d = 0; d < result.position->dim(); ++d) pos.push_back((*result.position)[d]);
        j["position"] = pos;
    }
    j["cfd"] = cfd;
    j["band"] = to_string(band);
    j["residuals"] = result.residuals;
    j["objective"] = result.objective_value;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    if (!result.diagnostic.empty()) j["diagnostic"] = result.diagnostic;
    return j;
}

}  // namespace rtdoa
