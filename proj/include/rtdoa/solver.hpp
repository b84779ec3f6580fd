#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rtdoa/geometry.hpp"
#include "rtdoa/measurement.hpp"

namespace rtdoa {

/// Levenberg-Marquardt controls. Damping scales the diagonal of J^T J
/// (Marquardt form), which makes the accepted-step trajectory invariant to
/// rescaling all weights.
struct SolverOptions {
    double initial_damping = 0.01;
    int max_iterations = 200;
    double step_tolerance = 1e-6;  // meters
    double damping_up = 10.0;
    double damping_down = 10.0;

    void validate() const;
};

enum class LocalizationStatus { estimate, corrupt_system };

struct LocalizationResult {
    LocalizationStatus status = LocalizationStatus::estimate;
    std::optional<Point> position;
    std::vector<double> residuals;  // seconds, per pair of the input problem
    double objective_value = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string diagnostic;
};

/// One weighted-least-squares localization instance: a snapshot of per-pair
/// TDOAs with per-pair noise stds and calibration weights.
struct WlsProblem {
    SensorNetwork network;
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> tdoa;    // seconds, one snapshot per pair
    std::vector<double> sigma;   // seconds
    std::vector<double> weights; // >= 0
    int dimension = 2;

    static WlsProblem from_snapshot(const SensorNetwork& network, const TdoaSet& snapshot,
                                    std::vector<double> weights, int dimension);
    std::size_t positive_weight_count() const;
    void validate() const;
};

/// Sum over pairs of (w/sigma^2) ((d_i - d_j)/c - tdoa)^2.
double wls_objective(const Point& candidate, const WlsProblem& problem);

/// Weighted residual vector r_k = sqrt(w_k)/sigma_k * ((d_i-d_j)/c - tdoa_k)
/// and its Jacobian with respect to the candidate coordinates. Zero-weight
/// pairs contribute identically-zero rows. Exposed for gradient checks.
void weighted_residuals(const Point& candidate, const WlsProblem& problem, Eigen::VectorXd& r,
                        Eigen::MatrixXd& jacobian);

/// Minimizes wls_objective from seed_point. Requires at least `dimension`
/// pairs with positive weight; throws otherwise. Non-convergence within
/// max_iterations still returns an estimate, flagged via converged=false.
LocalizationResult lm_solve(const WlsProblem& problem, const Point& seed_point,
                            const SolverOptions& opts = {});

/// Per-pair signed residuals (d_i - d_j)/c - tdoa at an estimate, seconds.
std::vector<double> residuals(const Point& estimate, const TdoaSet& measurements,
                              const SensorNetwork& network);
std::vector<double> residuals(const Point& estimate, const std::vector<std::pair<int, int>>& pairs,
                              const std::vector<double>& tdoa, const SensorNetwork& network);

}  // namespace rtdoa
