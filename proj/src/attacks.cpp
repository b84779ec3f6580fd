#include "rtdoa/attacks.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <stdexcept>

namespace rtdoa {

AttackVector weak_attack(const std::map<int, double>& delays, std::size_t sensor_count) {
    AttackVector out = AttackVector::zeros(sensor_count);
    for (const auto& [sensor, offset] : delays) {
        if (sensor < 0 || static_cast<std::size_t>(sensor) >= sensor_count)
            throw std::invalid_argument("weak_attack: unknown sensor index");
        out.offsets[static_cast<std::size_t>(sensor)] = offset;
    }
    return out;
}

AttackVector strong_attack(const SensorNetwork& network, const Point& true_source,
                           const Point& target) {
    AttackVector out = AttackVector::zeros(network.size());
    for (std::size_t i = 0; i < network.size(); ++i) {
        out.offsets[i] = propagation_delay(network.sensors[i], target, network.signal_speed) -
                         propagation_delay(network.sensors[i], true_source, network.signal_speed);
    }
    return out;
}

void CalibrationAttackSpec::validate() const {
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("calibration attack: q outside [0,1]");
    if (m < 1) throw std::invalid_argument("calibration attack: m must be >= 1");
}

std::vector<double> calibration_attack_samples(double mu, double sigma,
                                               const CalibrationAttackSpec& spec,
                                               bool shifted_is_attack, RngEngine& rng) {
    spec.validate();
    if (sigma <= 0.0) throw std::invalid_argument("calibration attack: sigma must be positive");

    // round-half-to-even, matching the default FP rounding mode
    const int attacked = static_cast<int>(std::nearbyint(spec.q * spec.m));
    const int shifted = shifted_is_attack ? attacked : spec.m - attacked;

    std::normal_distribution<double> shifted_dist(mu + spec.a * sigma, sigma);
    std::normal_distribution<double> clean_dist(mu, sigma);
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(spec.m));
    for (int k = 0; k < shifted; ++k) samples.push_back(shifted_dist(rng));
    for (int k = shifted; k < spec.m; ++k) samples.push_back(clean_dist(rng));
    std::shuffle(samples.begin(), samples.end(), rng);
    return samples;
}

}  // namespace rtdoa
