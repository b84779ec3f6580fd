#pragma once

#include <map>
#include <vector>

#include "rtdoa/geometry.hpp"
#include "rtdoa/rng.hpp"

namespace rtdoa {

/// Per-sensor clock offsets a_i in seconds, signed. An all-equal vector
/// leaves every pairwise delay difference a_i - a_j at zero.
struct AttackVector {
    std::vector<double> offsets;

    static AttackVector zeros(std::size_t sensor_count) {
        return AttackVector{std::vector<double>(sensor_count, 0.0)};
    }
    double delta(int i, int j) const {
        return offsets[static_cast<std::size_t>(i)] - offsets[static_cast<std::size_t>(j)];
    }
    std::size_t size() const { return offsets.size(); }
};

/// Offsets for the listed sensors, zero elsewhere. Throws on an index
/// outside [0, sensor_count).
AttackVector weak_attack(const std::map<int, double>& delays, std::size_t sensor_count);

/// Delays that steer the estimate to `target`: a_i is the propagation-delay
/// difference between the target and the true source as seen from sensor i.
/// Noiseless synthesis under this vector reproduces the target's TDOAs
/// exactly.
AttackVector strong_attack(const SensorNetwork& network, const Point& true_source,
                           const Point& target);

/// Mixture parameters for a calibration-channel attack: proportion q of m
/// samples attacked, attack size a in units of sigma.
struct CalibrationAttackSpec {
    double q = 0.0;
    double a = 0.0;
    int m = 1;

    void validate() const;
};

/// Draws a two-Gaussian sample mixture: round(q*m) samples from one mode and
/// the rest from the other, shuffled. With shifted_is_attack the attacked
/// portion is the shifted one (replay drags samples away from mu); without
/// it the attacked portion sits at mu and the legitimate samples carry the
/// timing-offset shift (compensating replay).
std::vector<double> calibration_attack_samples(double mu, double sigma,
                                               const CalibrationAttackSpec& spec,
                                               bool shifted_is_attack, RngEngine& rng);

}  // namespace rtdoa
