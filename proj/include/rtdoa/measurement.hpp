#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "rtdoa/attacks.hpp"
#include "rtdoa/geometry.hpp"
#include "rtdoa/rng.hpp"

namespace rtdoa {

enum class SnrRegime { low_snr, high_snr, fixed };

/// Signal parameters feeding the TDOA noise model. In the `fixed` regime the
/// noise std is taken from fixed_sigma and the other fields are unused.
struct SignalParams {
    SnrRegime regime = SnrRegime::fixed;
    double fixed_sigma = 2.192e-9;  // s
    double t_int = 0.06;            // s, integration time
    double bandwidth = 1e6;         // Hz, f_high - f_low
    double f_center = 30000.0;      // Hz
    double f_low = 0.0;             // Hz
    double f_high = 0.0;            // Hz
    // The low-SNR formula as printed carries W^2/(12 f0); this switches to
    // the dimensionally consistent W^2/(12 f0^2) variant.
    bool low_snr_f0_squared = false;
    // Draw pair noise from the full cross-correlated covariance instead of
    // the per-pair diagonal approximation.
    bool correlated_noise = false;

    void validate() const;
};

/// TDOA measurements for an ordered pair list: n samples and a noise std per
/// pair. A single-snapshot set has n == 1.
struct TdoaSet {
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::vector<double>> samples;  // [pair][repetition], seconds
    std::vector<double> sigma;                 // per pair, seconds

    int sample_count() const { return samples.empty() ? 0 : static_cast<int>(samples.front().size()); }
    double value(std::size_t pair_index) const { return samples[pair_index][0]; }
    std::vector<double> snapshot() const;  // first sample of every pair
    std::vector<double> sample_means() const;

    void validate(std::size_t sensor_count) const;
};

/// Aggregated linear SNR of a sensor pair:
/// 1/gamma_ij = (1/gamma_i + 1/gamma_j + 1/(gamma_i gamma_j)) / 2.
double aggregate_snr(double gamma_i, double gamma_j);

double snr_db_to_linear(double snr_db);

/// Noise std of a pair's TDOA for the selected regime.
double tdoa_noise_std(double gamma_ij, const SignalParams& params);

/// Noise std for the pair (i, j) of a network, combining the sensors' SNRs.
double pair_sigma(const SensorNetwork& network, int i, int j, const SignalParams& params);

/// TDOA covariance for equal per-pair variance sigma^2: diagonal sigma^2,
/// off-diagonal sigma^2/2.
Eigen::MatrixXd covariance_matrix(double sigma, int pair_count);

/// Synthesizes n noisy TDOA samples per pair for a source observed by the
/// network while the clocks carry `attack` offsets:
/// value = Delta_ij + a_i - a_j + e, e ~ N(0, sigma_ij).
TdoaSet synthesize_tdoa_set(const SensorNetwork& network, const Point& source,
                            const AttackVector& attack, const SignalParams& params, int n,
                            RngEngine& rng);

}  // namespace rtdoa
