#include "rtdoa/measurement.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rtdoa {

void SignalParams::validate() const {
    switch (regime) {
        case SnrRegime::fixed:
            if (fixed_sigma <= 0.0) throw std::invalid_argument("fixed regime needs a positive sigma");
            return;
        case SnrRegime::low_snr:
            if (t_int <= 0.0 || bandwidth <= 0.0 || f_center <= 0.0)
                throw std::invalid_argument("low-SNR regime needs positive T_int, W and f0");
            return;
        case SnrRegime::high_snr:
            if (t_int <= 0.0 || f_high <= f_low)
                throw std::invalid_argument("high-SNR regime needs positive T_int and f_high > f_low");
            return;
    }
    throw std::invalid_argument("unknown SNR regime");
}

std::vector<double> TdoaSet::snapshot() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.front());
    return out;
}

std::vector<double> TdoaSet::sample_means() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        double acc = 0.0;
        for (double v : s) acc += v;
        out.push_back(acc / static_cast<double>(s.size()));
    }
    return out;
}

void TdoaSet::validate(std::size_t sensor_count) const {
    if (pairs.size() != samples.size() || pairs.size() != sigma.size())
        throw std::invalid_argument("TdoaSet: pairs, samples and sigma must align");
    const int n = sample_count();
    if (n < 1) throw std::invalid_argument("TdoaSet: needs at least one sample");
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [i, j] = pairs[k];
        if (i <= j || i < 0 || static_cast<std::size_t>(i) >= sensor_count)
            throw std::invalid_argument("TdoaSet: invalid pair index");
        if (sigma[k] <= 0.0) throw std::invalid_argument("TdoaSet: sigma must be positive");
        if (static_cast<int>(samples[k].size()) != n)
            throw std::invalid_argument("TdoaSet: ragged sample counts");
    }
}

double aggregate_snr(double gamma_i, double gamma_j) {
    if (gamma_i <= 0.0 || gamma_j <= 0.0)
        throw std::invalid_argument("aggregate_snr: SNRs must be positive");
    const double inv = 0.5 * (1.0 / gamma_i + 1.0 / gamma_j + 1.0 / (gamma_i * gamma_j));
    return 1.0 / inv;
}

double snr_db_to_linear(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

double tdoa_noise_std(double gamma_ij, const SignalParams& params) {
    params.validate();
    if (params.regime == SnrRegime::fixed) return params.fixed_sigma;
    if (gamma_ij <= 0.0) throw std::invalid_argument("tdoa_noise_std: SNR must be positive");

    constexpr double pi = std::numbers::pi;
    if (params.regime == SnrRegime::low_snr) {
        const double w = params.bandwidth;
        const double f0 = params.f_center;
        const double denom = params.low_snr_f0_squared ? 12.0 * f0 * f0 : 12.0 * f0;
        return std::sqrt(1.0 / (8.0 * pi * pi)) / gamma_ij / std::sqrt(params.t_int * w) / f0 /
               std::sqrt(1.0 + w * w / denom);
    }
    const double f1 = params.f_low;
    const double f2 = params.f_high;
    return std::sqrt(3.0 / (4.0 * pi * pi * params.t_int)) / std::sqrt(gamma_ij) /
           std::sqrt(f2 * f2 * f2 - f1 * f1 * f1);
}

double pair_sigma(const SensorNetwork& network, int i, int j, const SignalParams& params) {
    if (params.regime == SnrRegime::fixed) return params.fixed_sigma;
    const double gi = snr_db_to_linear(network.snr_db.at(static_cast<std::size_t>(i)));
    const double gj = snr_db_to_linear(network.snr_db.at(static_cast<std::size_t>(j)));
    return tdoa_noise_std(aggregate_snr(gi, gj), params);
}

Eigen::MatrixXd covariance_matrix(double sigma, int pair_count) {
    if (sigma <= 0.0) throw std::invalid_argument("covariance_matrix: sigma must be positive");
    if (pair_count < 1) throw std::invalid_argument("covariance_matrix: pair_count must be >= 1");
    const double var = sigma * sigma;
    Eigen::MatrixXd k = Eigen::MatrixXd::Constant(pair_count, pair_count, var / 2);
    k.diagonal().setConstant(var);
    return k;
}

namespace {

// Closed-form square root of sigma^2/2 (I + 1 1^T): sqrt = sigma/sqrt(2) (I + alpha 1 1^T)
// with (1 + alpha k)^2 = 1 + k.
Eigen::MatrixXd covariance_sqrt(double sigma, int k) {
    const double alpha = (std::sqrt(static_cast<double>(k) + 1.0) - 1.0) / static_cast<double>(k);
    Eigen::MatrixXd root = Eigen::MatrixXd::Constant(k, k, alpha);
    root.diagonal().array() += 1.0;
    return sigma / std::sqrt(2.0) * root;
}

}  // namespace

TdoaSet synthesize_tdoa_set(const SensorNetwork& network, const Point& source,
                            const AttackVector& attack, const SignalParams& params, int n,
                            RngEngine& rng) {
    if (n < 1) throw std::invalid_argument("synthesize_tdoa_set: n must be >= 1");
    if (attack.size() != network.size())
        throw std::invalid_argument("synthesize_tdoa_set: attack length must match sensor count");
    params.validate();

    TdoaSet set;
    set.pairs = sensor_pairs(static_cast<int>(network.size()));
    const std::size_t k = set.pairs.size();
    set.sigma.reserve(k);
    set.samples.assign(k, std::vector<double>(static_cast<std::size_t>(n)));

    std::vector<double> base(k);
    for (std::size_t p = 0; p < k; ++p) {
        const auto [i, j] = set.pairs[p];
        base[p] = true_tdoa(network.sensors[static_cast<std::size_t>(i)],
                            network.sensors[static_cast<std::size_t>(j)], source,
                            network.signal_speed) +
                  attack.delta(i, j);
        set.sigma.push_back(pair_sigma(network, i, j, params));
    }

    std::normal_distribution<double> unit(0.0, 1.0);
    if (params.correlated_noise) {
        // Cross-pair correlation per the sigma^2/2 off-diagonal model; only
        // meaningful when all pairs share one sigma, which the fixed regime
        // and a flat SNR profile both give.
        const Eigen::MatrixXd root = covariance_sqrt(set.sigma.front(), static_cast<int>(k));
        Eigen::VectorXd z(static_cast<Eigen::Index>(k));
        for (int rep = 0; rep < n; ++rep) {
            for (std::size_t p = 0; p < k; ++p) z[static_cast<Eigen::Index>(p)] = unit(rng);
            const Eigen::VectorXd noise = root * z;
            for (std::size_t p = 0; p < k; ++p)
                set.samples[p][static_cast<std::size_t>(rep)] =
                    base[p] + noise[static_cast<Eigen::Index>(p)];
        }
    } else {
        for (int rep = 0; rep < n; ++rep)
            for (std::size_t p = 0; p < k; ++p)
                set.samples[p][static_cast<std::size_t>(rep)] = base[p] + set.sigma[p] * unit(rng);
    }
    return set;
}

}  // namespace rtdoa
