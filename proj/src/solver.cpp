#include "rtdoa/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace rtdoa {

void SolverOptions::validate() const {
    if (initial_damping <= 0.0 || step_tolerance <= 0.0 || damping_up <= 0.0 || damping_down <= 0.0)
        throw std::invalid_argument("SolverOptions: all factors must be positive");
    if (max_iterations < 1) throw std::invalid_argument("SolverOptions: max_iterations must be >= 1");
}

WlsProblem WlsProblem::from_snapshot(const SensorNetwork& network, const TdoaSet& snapshot,
                                     std::vector<double> weights, int dimension) {
    WlsProblem p;
    p.network = network;
    p.pairs = snapshot.pairs;
    p.tdoa = snapshot.snapshot();
    p.sigma = snapshot.sigma;
    p.weights = std::move(weights);
    p.dimension = dimension;
    p.validate();
    return p;
}

std::size_t WlsProblem::positive_weight_count() const {
    std::size_t n = 0;
    for (double w : weights)
        if (w > 0.0) ++n;
    return n;
}

void WlsProblem::validate() const {
    if (dimension != 2 && dimension != 3) throw std::invalid_argument("WlsProblem: dimension");
    network.validate(dimension);
    if (pairs.size() != tdoa.size() || pairs.size() != sigma.size() || pairs.size() != weights.size())
        throw std::invalid_argument("WlsProblem: pair-aligned vectors must have equal size");
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (sigma[k] <= 0.0) throw std::invalid_argument("WlsProblem: sigma must be positive");
        if (weights[k] < 0.0) throw std::invalid_argument("WlsProblem: negative weight");
        const auto [i, j] = pairs[k];
        if (j < 0 || i <= j || static_cast<std::size_t>(i) >= network.size())
            throw std::invalid_argument("WlsProblem: invalid pair");
    }
}

namespace {

constexpr double kMinDistance = 1e-9;  // Jacobian guard near sensor positions

double candidate_coord(const Point& p, int c) { return c < p.dim() ? p[c] : 0.0; }

}  // namespace

double wls_objective(const Point& candidate, const WlsProblem& problem) {
    if (candidate.dim() != problem.dimension)
        throw std::invalid_argument("wls_objective: candidate dimension mismatch");
    const double c = problem.network.signal_speed;
    double acc = 0.0;
    for (std::size_t k = 0; k < problem.pairs.size(); ++k) {
        if (problem.weights[k] == 0.0) continue;
        const auto [i, j] = problem.pairs[k];
        const double r = true_tdoa(problem.network.sensors[static_cast<std::size_t>(i)],
                                   problem.network.sensors[static_cast<std::size_t>(j)], candidate,
                                   c) -
                         problem.tdoa[k];
        acc += problem.weights[k] / (problem.sigma[k] * problem.sigma[k]) * r * r;
    }
    return acc;
}

void weighted_residuals(const Point& candidate, const WlsProblem& problem, Eigen::VectorXd& r,
                        Eigen::MatrixXd& jacobian) {
    const int dim = problem.dimension;
    const double c = problem.network.signal_speed;
    const auto rows = static_cast<Eigen::Index>(problem.pairs.size());
    r.setZero(rows);
    jacobian.setZero(rows, dim);

    for (Eigen::Index k = 0; k < rows; ++k) {
        const double w = problem.weights[static_cast<std::size_t>(k)];
        if (w == 0.0) continue;
        const auto [i, j] = problem.pairs[static_cast<std::size_t>(k)];
        const Point& si = problem.network.sensors[static_cast<std::size_t>(i)];
        const Point& sj = problem.network.sensors[static_cast<std::size_t>(j)];
        const double di = std::max(distance(si, candidate), kMinDistance);
        const double dj = std::max(distance(sj, candidate), kMinDistance);
        const double scale = std::sqrt(w) / problem.sigma[static_cast<std::size_t>(k)];
        r[k] = scale * ((di - dj) / c - problem.tdoa[static_cast<std::size_t>(k)]);
        for (int d = 0; d < dim; ++d) {
            const double x = candidate_coord(candidate, d);
            jacobian(k, d) = scale / c * ((x - si[d]) / di - (x - sj[d]) / dj);
        }
    }
}

LocalizationResult lm_solve(const WlsProblem& problem, const Point& seed_point,
                            const SolverOptions& opts) {
    problem.validate();
    opts.validate();
    if (seed_point.dim() != problem.dimension)
        throw std::invalid_argument("lm_solve: seed dimension mismatch");
    if (problem.positive_weight_count() < static_cast<std::size_t>(problem.dimension))
        throw std::invalid_argument("lm_solve: not enough positive-weight pairs");

    const int dim = problem.dimension;
    Point x = seed_point;
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    weighted_residuals(x, problem, r, jac);
    double objective = r.squaredNorm();
    double damping = opts.initial_damping;

    LocalizationResult result;
    result.converged = false;
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd gradient = jac.transpose() * r;
        if (gradient.norm() == 0.0) {
            result.converged = true;
            break;
        }

        bool stepped = false;
        double step_norm = 0.0;
        while (damping < 1e18) {
            Eigen::MatrixXd damped = jtj;
            for (int d = 0; d < dim; ++d)
                damped(d, d) += damping * std::max(jtj(d, d), 1e-30);
            const Eigen::VectorXd delta = damped.ldlt().solve(-gradient);
            Point trial = x;
            for (int d = 0; d < dim; ++d) trial[d] += delta[d];
            Eigen::VectorXd r_trial;
            Eigen::MatrixXd jac_trial;
            weighted_residuals(trial, problem, r_trial, jac_trial);
            const double objective_trial = r_trial.squaredNorm();
            if (objective_trial <= objective) {
                x = trial;
                r.swap(r_trial);
                jac.swap(jac_trial);
                objective = objective_trial;
                damping /= opts.damping_down;
                step_norm = delta.norm();
                stepped = true;
                break;
            }
            damping *= opts.damping_up;
        }
        if (!stepped) {  // no further descent possible at any damping
            result.converged = true;
            break;
        }
        if (step_norm < opts.step_tolerance) {
            result.converged = true;
            ++iter;
            break;
        }
    }

    result.status = LocalizationStatus::estimate;
    result.position = x;
    result.objective_value = objective;
    result.iterations = iter;
    result.residuals = residuals(x, problem.pairs, problem.tdoa, problem.network);
    if (!result.converged) result.diagnostic = "max iterations reached before step tolerance";
    return result;
}

std::vector<double> residuals(const Point& estimate, const std::vector<std::pair<int, int>>& pairs,
                              const std::vector<double>& tdoa, const SensorNetwork& network) {
    if (!estimate.finite()) throw std::invalid_argument("residuals: estimate not finite");
    std::vector<double> out;
    out.reserve(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [i, j] = pairs[k];
        out.push_back(true_tdoa(network.sensors[static_cast<std::size_t>(i)],
                                network.sensors[static_cast<std::size_t>(j)], estimate,
                                network.signal_speed) -
                      tdoa[k]);
    }
    return out;
}

std::vector<double> residuals(const Point& estimate, const TdoaSet& measurements,
                              const SensorNetwork& network) {
    return residuals(estimate, measurements.pairs, measurements.snapshot(), network);
}

}  // namespace rtdoa
