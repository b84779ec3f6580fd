#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rtdoa/harness.hpp"
#include "rtdoa/solver.hpp"

using namespace rtdoa;

TEST_SUITE_BEGIN("solver");

namespace {

SignalParams tiny_noise() {
    SignalParams p;
    p.fixed_sigma = 1e-30;
    return p;
}

WlsProblem noiseless_problem(const SensorNetwork& net, const Point& src,
                             std::vector<double> weights, int dim, double sigma = 2.192e-9) {
    WlsProblem problem;
    problem.network = net;
    problem.pairs = sensor_pairs(static_cast<int>(net.size()));
    for (const auto& [i, j] : problem.pairs)
        problem.tdoa.push_back(true_tdoa(net.sensors[static_cast<std::size_t>(i)],
                                         net.sensors[static_cast<std::size_t>(j)], src,
                                         net.signal_speed));
    problem.sigma.assign(problem.pairs.size(), sigma);
    problem.weights = std::move(weights);
    problem.dimension = dim;
    return problem;
}

}  // namespace

TEST_CASE("wls_objective basics") {
    const SensorNetwork net = default_topology(2);
    const Point src(3333.3, -889.1111);
    WlsProblem problem = noiseless_problem(net, src, std::vector<double>(6, 1.0), 2);

    CHECK(wls_objective(src, problem) < 1e-18);

    WlsProblem zero_w = problem;
    zero_w.weights.assign(6, 0.0);
    CHECK(wls_objective(Point(100.0, 100.0), zero_w) == 0.0);
    CHECK(wls_objective(Point(-5000.0, 3000.0), zero_w) == 0.0);

    WlsProblem doubled = problem;
    for (double& w : doubled.weights) w *= 2.0;
    const Point candidate(1500.0, -3000.0);
    CHECK(wls_objective(candidate, doubled) ==
          doctest::Approx(2.0 * wls_objective(candidate, problem)));
}

TEST_CASE("lm_solve recovers noiseless sources against the brute-force oracle") {
    const SensorNetwork net = default_topology(2);
    RngEngine rng = make_stream(41);
    std::uniform_real_distribution<double> coord(-8000.0, 8000.0);
    for (int rep = 0; rep < 10; ++rep) {
        const Point src(coord(rng), coord(rng));
        WlsProblem problem = noiseless_problem(net, src, std::vector<double>(6, 1.0), 2);
        const LocalizationResult result = lm_solve(problem, Point(coord(rng), coord(rng)));
        REQUIRE(result.position);
        CHECK(distance(*result.position, src) < 1e-3);

        const Point oracle = oracles::grid_refine_minimize(
            [&](const Point& p) { return wls_objective(p, problem); }, BoundingBox::centered(10000.0));
        CHECK(distance(*result.position, oracle) < 1e-2);
    }
}

TEST_CASE("two independent pairs suffice in 2D") {
    const SensorNetwork net = default_topology(2);
    const Point src(3333.3, -889.1111);
    // keep only pairs (1,0) and (3,2)
    std::vector<double> weights{1.0, 0.0, 0.0, 0.0, 0.0, 1.0};
    WlsProblem problem = noiseless_problem(net, src, weights, 2);
    const LocalizationResult result = lm_solve(problem, Point(0.0, 0.0));
    REQUIRE(result.position);

    // oracle: the two hyperbolae intersect at the source
    const Hyperbola h1{net.sensors[1], net.sensors[0], problem.tdoa[0] * net.signal_speed};
    const Hyperbola h2{net.sensors[3], net.sensors[2], problem.tdoa[5] * net.signal_speed};
    const auto crossing =
        hyperbola_intersections(h1, h2, BoundingBox::centered(10000.0), 1e-3);
    REQUIRE(crossing.points.size() == 1);
    CHECK(distance(*result.position, crossing.points.front()) < 1e-2);
    CHECK(distance(*result.position, src) < 1e-2);
}

TEST_CASE("seed at the optimum converges immediately") {
    const SensorNetwork net = default_topology(2);
    const Point src(3333.3, -889.1111);
    WlsProblem problem = noiseless_problem(net, src, std::vector<double>(6, 1.0), 2);
    const LocalizationResult result = lm_solve(problem, src);
    CHECK(result.iterations <= 2);
    CHECK(result.converged);
    CHECK(result.objective_value < 1e-12);
}

TEST_CASE("insufficient pairs is an error, non-convergence is a flag") {
    const SensorNetwork net = default_topology(2);
    const Point src(0.0, 0.0);
    SUBCASE("one positive weight in 2D") {
        WlsProblem problem = noiseless_problem(net, src, {1, 0, 0, 0, 0, 0}, 2);
        CHECK_THROWS_AS(lm_solve(problem, Point(1.0, 1.0)), std::invalid_argument);
    }
    SUBCASE("iteration starvation flags but still estimates") {
        WlsProblem problem = noiseless_problem(net, Point(4321.0, -1234.0),
                                               std::vector<double>(6, 1.0), 2);
        SolverOptions opts;
        opts.max_iterations = 1;
        const LocalizationResult result = lm_solve(problem, Point(-8000.0, 8000.0), opts);
        CHECK(result.status == LocalizationStatus::estimate);
        CHECK_FALSE(result.converged);
        CHECK_FALSE(result.diagnostic.empty());
    }
}

TEST_CASE("analytic Jacobian matches central differences") {
    const SensorNetwork net = default_topology(2);
    RngEngine rng = make_stream(43);
    std::uniform_real_distribution<double> coord(-9000.0, 9000.0);
    WlsProblem problem = noiseless_problem(net, Point(1000.0, 1000.0), std::vector<double>(6, 1.0), 2);

    int checked = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const Point x(coord(rng), coord(rng));
        bool near_sensor = false;
        for (const Point& s : net.sensors)
            if (distance(s, x) < 10.0) near_sensor = true;
        if (near_sensor) continue;
        ++checked;

        Eigen::VectorXd r;
        Eigen::MatrixXd jac;
        weighted_residuals(x, problem, r, jac);
        const double h = 1e-2;
        for (int d = 0; d < 2; ++d) {
            Point hi = x, lo = x;
            hi[d] += h;
            lo[d] -= h;
            Eigen::VectorXd r_hi, r_lo;
            Eigen::MatrixXd j_unused;
            weighted_residuals(hi, problem, r_hi, j_unused);
            weighted_residuals(lo, problem, r_lo, j_unused);
            for (Eigen::Index k = 0; k < r.size(); ++k) {
                const double fd = (r_hi[k] - r_lo[k]) / (2 * h);
                const double scale = std::max(std::abs(fd), 1e-12);
                CHECK(std::abs(jac(k, d) - fd) / scale < 1e-5);
            }
        }
    }
    CHECK(checked >= 95);
}

TEST_CASE("weight rescaling leaves the argmin unchanged") {
    const SensorNetwork net = default_topology(2);
    const Point src(-2500.0, 4000.0);
    SignalParams params;
    RngEngine rng = make_stream(47);
    const TdoaSet snapshot = synthesize_tdoa_set(net, src, AttackVector::zeros(4), params, 1, rng);

    WlsProblem problem = WlsProblem::from_snapshot(net, snapshot, std::vector<double>(6, 1.0), 2);
    WlsProblem scaled = problem;
    for (double& w : scaled.weights) w *= 7.25e4;

    const Point seed(1000.0, 1000.0);
    const LocalizationResult a = lm_solve(problem, seed);
    const LocalizationResult b = lm_solve(scaled, seed);
    REQUIRE(a.position);
    REQUIRE(b.position);
    CHECK(distance(*a.position, *b.position) < 1e-6);
}

TEST_CASE("residual analysis per attack type") {
    const SensorNetwork net = default_topology(2);
    const Point src(3333.3, -889.1111);
    SignalParams params;  // 2.192 ns

    // no attack: residual magnitudes at the noise scale
    RngEngine rng = make_stream(53);
    const TdoaSet clean = synthesize_tdoa_set(net, src, AttackVector::zeros(4), params, 1, rng);
    WlsProblem clean_problem = WlsProblem::from_snapshot(net, clean, std::vector<double>(6, 1.0), 2);
    const LocalizationResult clean_result = lm_solve(clean_problem, Point(0.0, 0.0));
    double clean_max = 0.0;
    for (double r : clean_result.residuals) clean_max = std::max(clean_max, std::abs(r));
    CHECK(clean_max < 1e-8);

    SUBCASE("weak attack leaves microsecond residuals on several pairs") {
        const AttackVector attack = weak_attack({{0, 2.47e-6}}, 4);
        const TdoaSet set = synthesize_tdoa_set(net, src, attack, params, 1, rng);
        WlsProblem problem = WlsProblem::from_snapshot(net, set, std::vector<double>(6, 1.0), 2);
        const LocalizationResult result = lm_solve(problem, Point(0.0, 0.0));
        int large = 0;
        for (double r : result.residuals)
            if (std::abs(r) >= 100 * clean_max) ++large;
        CHECK(large >= 3);
    }
    SUBCASE("strong attack is invisible to residuals") {
        const AttackVector attack = strong_attack(net, src, Point(-3030.7, 5474.8));
        const TdoaSet set = synthesize_tdoa_set(net, src, attack, params, 1, rng);
        WlsProblem problem = WlsProblem::from_snapshot(net, set, std::vector<double>(6, 1.0), 2);
        const LocalizationResult result = lm_solve(problem, Point(0.0, 0.0));
        double strong_max = 0.0;
        for (double r : result.residuals) strong_max = std::max(strong_max, std::abs(r));
        CHECK(strong_max < 10 * clean_max);
    }
}

TEST_CASE("residuals at the true source of noiseless measurements are zero") {
    const SensorNetwork net = default_topology(2);
    const Point src(1234.0, 4321.0);
    RngEngine rng = make_stream(59);
    const TdoaSet set = synthesize_tdoa_set(net, src, AttackVector::zeros(4), tiny_noise(), 1, rng);
    for (double r : residuals(src, set, net)) CHECK(std::abs(r) < 1e-15);
}

TEST_SUITE_END();
