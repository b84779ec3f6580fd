#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rtdoa/attacks.hpp"
#include "rtdoa/harness.hpp"
#include "rtdoa/solver.hpp"

using namespace rtdoa;

TEST_SUITE_BEGIN("attacks");

TEST_CASE("weak_attack") {
    const AttackVector a = weak_attack({{0, 2.47e-6}}, 4);
    CHECK(a.offsets == std::vector<double>{2.47e-6, 0.0, 0.0, 0.0});
    CHECK(weak_attack({}, 4).offsets == std::vector<double>(4, 0.0));
    CHECK(weak_attack({{1, -5e-9}}, 4).offsets[1] == -5e-9);
    CHECK_THROWS_AS(weak_attack({{7, 1e-9}}, 4), std::invalid_argument);
}

TEST_CASE("strong_attack reproduces the target's TDOAs") {
    const SensorNetwork net = default_topology(2);
    const Point src(3333.3, -889.1111);

    SUBCASE("target equals source: all zeros") {
        const AttackVector a = strong_attack(net, src, src);
        for (double v : a.offsets) CHECK(v == 0.0);
    }
    SUBCASE("noiseless synthesis equals target TDOAs") {
        const Point target(-3030.66103068, 5474.84993068);
        const AttackVector a = strong_attack(net, src, target);
        SignalParams tiny;
        tiny.fixed_sigma = 1e-30;
        RngEngine rng = make_stream(2);
        const TdoaSet set = synthesize_tdoa_set(net, src, a, tiny, 1, rng);
        for (std::size_t k = 0; k < set.pairs.size(); ++k) {
            const auto [i, j] = set.pairs[k];
            const double target_tdoa = true_tdoa(net.sensors[static_cast<std::size_t>(i)],
                                                 net.sensors[static_cast<std::size_t>(j)], target,
                                                 net.signal_speed);
            CHECK(std::abs(set.value(k) - target_tdoa) < 1e-15);
        }
    }
    SUBCASE("naive solve lands near the target") {
        const Point target(-3030.66103068, 5474.84993068);
        CHECK(distance(src, target) == doctest::Approx(9000.0).epsilon(1e-9));
        const AttackVector a = strong_attack(net, src, target);
        SignalParams params;  // sigma 2.192 ns
        RngEngine rng = make_stream(3);
        const TdoaSet snapshot = synthesize_tdoa_set(net, src, a, params, 1, rng);
        // brute-force oracle finds the global optimum of the attacked problem
        WlsProblem problem = WlsProblem::from_snapshot(net, snapshot,
                                                       std::vector<double>(6, 1.0), 2);
        const Point opt = oracles::grid_refine_minimize(
            [&](const Point& p) { return wls_objective(p, problem); },
            BoundingBox::centered(10000.0));
        CHECK(distance(opt, target) < 5.0);
    }
}

TEST_CASE("strong_attack is translation equivariant") {
    SensorNetwork net = default_topology(2);
    const Point src(1111.0, -2222.0), target(-4000.0, 3500.0);
    const AttackVector base = strong_attack(net, src, target);

    const double dx = 1234.5, dy = -987.6;
    SensorNetwork shifted = net;
    for (Point& s : shifted.sensors) s = Point(s.x() + dx, s.y() + dy);
    const AttackVector moved = strong_attack(shifted, Point(src.x() + dx, src.y() + dy),
                                             Point(target.x() + dx, target.y() + dy));
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(base.offsets[i] == doctest::Approx(moved.offsets[i]).epsilon(1e-9));
}

TEST_CASE("constant clock shift leaves pair deltas unchanged") {
    AttackVector a{{1e-6, -2e-6, 0.0, 5e-7}};
    AttackVector b = a;
    for (double& v : b.offsets) v += 0.25;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < i; ++j) CHECK(a.delta(i, j) == doctest::Approx(b.delta(i, j)));
}

TEST_CASE("calibration_attack_samples") {
    const double mu = 7e-7, sigma = 2.192e-9;
    SUBCASE("q=0: all clean") {
        RngEngine rng = make_stream(4);
        const auto s = calibration_attack_samples(mu, sigma, {0.0, 6.0, 400}, true, rng);
        REQUIRE(s.size() == 400);
        CHECK(std::abs(oracles::mean(s) - mu) < 4 * sigma / std::sqrt(400.0));
    }
    SUBCASE("q=1, a=6: all shifted") {
        RngEngine rng = make_stream(5);
        const auto s = calibration_attack_samples(mu, sigma, {1.0, 6.0, 400}, true, rng);
        CHECK(std::abs(oracles::mean(s) - (mu + 6 * sigma)) < 4 * sigma / std::sqrt(400.0));
    }
    SUBCASE("q=0.3, m=160 gives a 48/112 split") {
        RngEngine rng = make_stream(6);
        const auto s = calibration_attack_samples(mu, sigma, {0.3, 3.0, 160}, true, rng);
        REQUIRE(s.size() == 160);
        int shifted = 0;
        for (double v : s)
            if (v > mu + 1.5 * sigma) ++shifted;
        // 48 shifted by 3 sigma; the 1.5-sigma midpoint misclassifies a few tails
        CHECK(shifted > 30);
        CHECK(shifted < 66);
    }
    SUBCASE("scenario flag flips which mode is shifted") {
        RngEngine rng_a = make_stream(7);
        RngEngine rng_b = make_stream(7);
        const auto s1 = calibration_attack_samples(mu, sigma, {0.25, 100.0, 160}, true, rng_a);
        const auto s2 = calibration_attack_samples(mu, sigma, {0.25, 100.0, 160}, false, rng_b);
        int high1 = 0, high2 = 0;
        for (double v : s1)
            if (v > mu + 50 * sigma) ++high1;
        for (double v : s2)
            if (v > mu + 50 * sigma) ++high2;
        CHECK(high1 == 40);   // attacked proportion shifted
        CHECK(high2 == 120);  // remainder shifted
    }
    SUBCASE("round-half-to-even split") {
        // q*m = 0.25*10 = 2.5 -> 2 with banker's rounding
        RngEngine rng = make_stream(8);
        const auto s = calibration_attack_samples(mu, sigma, {0.25, 1000.0, 10}, true, rng);
        int shifted = 0;
        for (double v : s)
            if (v > mu + 500 * sigma) ++shifted;
        CHECK(shifted == 2);
    }
    SUBCASE("validation") {
        RngEngine rng = make_stream(9);
        CHECK_THROWS_AS(calibration_attack_samples(mu, sigma, {1.5, 3.0, 10}, true, rng),
                        std::invalid_argument);
        CHECK_THROWS_AS(calibration_attack_samples(mu, -1.0, {0.5, 3.0, 10}, true, rng),
                        std::invalid_argument);
    }
}

TEST_SUITE_END();
