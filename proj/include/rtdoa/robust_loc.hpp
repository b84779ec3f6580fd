#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rtdoa/calibration.hpp"
#include "rtdoa/solver.hpp"

namespace rtdoa {

enum class ActionBand { full_trust, fair_trust, probable_zone, corrupt };

std::string to_string(ActionBand band);

/// Region and solver controls for a robust localization call. z_min/z_max
/// bound the altitude scan that seeds 3D solves.
struct RobustOptions {
    BoundingBox region = BoundingBox::centered(10000.0);
    double z_min = 0.0;
    double z_max = 10000.0;
    double intersection_tol = 1e-3;  // meters
    double seed_dedup_tol = 0.1;     // meters
    SolverOptions solver;
};

/// Geometric initial estimate: weighted median of the pairwise intersection
/// points of the hyperbolae of positive-weight pairs (each point weighted by
/// the smaller of its two pair weights). Degenerate measurements are left
/// out of the seed. Falls back to the region center when nothing intersects.
/// For dim == 3, the xy seed comes from sensor xy-projections and the
/// altitude from a coarse objective scan over [z_min, z_max].
Point geometric_seed(const WlsProblem& problem, const RobustOptions& opts);

/// Trust-gated localization: if fewer than `dim` pairs carry nonzero weight
/// the system is reported corrupt; otherwise a weighted LM solve from the
/// geometric seed. Per-pair sigmas are recomputed from the network SNR (or
/// the fixed override) in `params`.
LocalizationResult robust_localize(const WeightTable& weights, const SensorNetwork& network,
                                   const TdoaSet& measurement, const SignalParams& params, int dim,
                                   const RobustOptions& opts = {});

/// Same pipeline with every pair trusted equally; the naive baseline.
LocalizationResult naive_localize(const SensorNetwork& network, const TdoaSet& measurement,
                                  const SignalParams& params, int dim,
                                  const RobustOptions& opts = {});

/// Maps the confidence metric to a recommended course of action; a corrupt
/// status dominates any cfd. Band edges are upper-inclusive: 0.75 is still
/// full trust, 0.3 still fair trust.
ActionBand recommend_action(double cfd, LocalizationStatus status);

nlohmann::json result_to_json(const LocalizationResult& result, double cfd, ActionBand band);

}  // namespace rtdoa
