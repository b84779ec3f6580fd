#pragma once

#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rtdoa/geometry.hpp"
#include "rtdoa/measurement.hpp"

namespace rtdoa {

/// Per-pair trust weights from a calibration pass, plus the confidence
/// metric. Weights are the raw p-values raised to 1/v and normalized to sum
/// one (all-zero p-values stay all-zero); cfd is computed from the
/// pre-normalization values.
struct WeightTable {
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> raw_pvalues;
    std::vector<double> weights;
    double cfd = 0.0;
    double v = 15.0776;

    std::size_t nonzero_count() const;
    nlohmann::json to_json() const;
    static WeightTable from_json(const nlohmann::json& j);
};

/// Two-sided z-test p-value for the hypothesis that the error samples have
/// zero mean, given the known per-sample std: erfc(|mean| sqrt(n) / (sigma sqrt(2))).
double ztest_pvalue(std::span<const double> errors, double sigma);

/// Exponent maximizing p1^(1/v) - p2^(1/v) over v > 0 for 0 < p2 < p1 < 1:
/// (|ln p2| - |ln p1|) / ln(|ln p2| / |ln p1|).
double optimal_exponent(double p1, double p2);

/// Mean of the exponentiated 2nd and 3rd largest p-values (2D), or of the
/// 2nd..4th largest (3D). Ties rank by position in the input.
double confidence_metric(std::span<const double> raw_pvalues, double v, int dim);

/// Algorithm that turns an n-sample calibration batch from a source of known
/// coordinates into a WeightTable: per pair, errors = samples - true TDOA,
/// p-value from the z-test with the pair's sigma, weight = p^(1/v).
WeightTable define_weights(const SensorNetwork& network, const Point& calib_source,
                           const TdoaSet& batch, double v, int dim);

/// Parameters of the jam-resistant measurement selection: m received
/// samples, n kept, b histogram bins.
struct SelectionSpec {
    int m = 160;
    int n = 30;
    int b = 12;

    void validate() const;
};

/// Picks the n samples nearest the center of the tallest mode: histogram
/// with b uniform bins over the sample range, densest bin expanded by
/// denser-first neighbors until >= n samples accumulate, Gaussian KDE peak
/// of that subset, then the n nearest samples from the full input.
std::vector<double> select_measurements(std::span<const double> samples, const SelectionSpec& spec);

}  // namespace rtdoa
