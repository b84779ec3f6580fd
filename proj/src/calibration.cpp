#include "rtdoa/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rtdoa {

std::size_t WeightTable::nonzero_count() const {
    std::size_t n = 0;
    for (double w : weights)
        if (w > 0.0) ++n;
    return n;
}

nlohmann::json WeightTable::to_json() const {
    nlohmann::json j;
    j["pairs"] = nlohmann::json::array();
    for (const auto& [i, k] : pairs) j["pairs"].push_back({i, k});
    j["raw_pvalues"] = raw_pvalues;
    j["weights"] = weights;
    j["cfd"] = cfd;
    j["v"] = v;
    return j;
}

WeightTable WeightTable::from_json(const nlohmann::json& j) {
    WeightTable t;
    for (const auto& p : j.at("pairs")) t.pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    t.raw_pvalues = j.at("raw_pvalues").get<std::vector<double>>();
    t.weights = j.at("weights").get<std::vector<double>>();
    t.cfd = j.at("cfd").get<double>();
    t.v = j.at("v").get<double>();
    if (t.pairs.size() != t.raw_pvalues.size() || t.pairs.size() != t.weights.size())
        throw std::invalid_argument("WeightTable: misaligned arrays");
    return t;
}

double ztest_pvalue(std::span<const double> errors, double sigma) {
    if (errors.empty()) throw std::invalid_argument("ztest_pvalue: needs at least one sample");
    if (sigma <= 0.0) throw std::invalid_argument("ztest_pvalue: sigma must be positive");
    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= static_cast<double>(errors.size());
    const double z = std::abs(mean) * std::sqrt(static_cast<double>(errors.size())) / sigma;
    // erfc underflows to exactly 0 around z/sqrt(2) > 27; that is the
    // "fully distrusted" state. Subnormal p-values are kept as-is, they
    // still order barely-trusted pairs.
    return std::erfc(z / std::sqrt(2.0));
}

double optimal_exponent(double p1, double p2) {
    if (!(p2 > 0.0 && p2 < p1 && p1 < 1.0))
        throw std::invalid_argument("optimal_exponent: need 0 < p2 < p1 < 1");
    const double alpha = -std::log(p1);
    const double beta = -std::log(p2);
    return (beta - alpha) / std::log(beta / alpha);
}

double confidence_metric(std::span<const double> raw_pvalues, double v, int dim) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("confidence_metric: dim must be 2 or 3");
    const std::size_t needed = dim == 2 ? 3 : 4;
    if (raw_pvalues.size() < needed)
        throw std::invalid_argument("confidence_metric: too few p-values");
    if (v <= 0.0) throw std::invalid_argument("confidence_metric: v must be positive");

    std::vector<double> sorted(raw_pvalues.begin(), raw_pvalues.end());
    std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
    double acc = 0.0;
    for (std::size_t k = 1; k < needed; ++k) acc += std::pow(sorted[k], 1.0 / v);
    return acc / static_cast<double>(needed - 1);
}

WeightTable define_weights(const SensorNetwork& network, const Point& calib_source,
                           const TdoaSet& batch, double v, int dim) {
    batch.validate(network.size());
    if (v <= 0.0) throw std::invalid_argument("define_weights: v must be positive");

    WeightTable table;
    table.pairs = batch.pairs;
    table.v = v;
    table.raw_pvalues.reserve(batch.pairs.size());
    table.weights.reserve(batch.pairs.size());

    std::vector<double> errors;
    for (std::size_t k = 0; k < batch.pairs.size(); ++k) {
        const auto [i, j] = batch.pairs[k];
        const double truth = true_tdoa(network.sensors[static_cast<std::size_t>(i)],
                                       network.sensors[static_cast<std::size_t>(j)], calib_source,
                                       network.signal_speed);
        errors.assign(batch.samples[k].begin(), batch.samples[k].end());
        for (double& e : errors) e -= truth;
        const double p = ztest_pvalue(errors, batch.sigma[k]);
        table.raw_pvalues.push_back(p);
        table.weights.push_back(p == 0.0 ? 0.0 : std::pow(p, 1.0 / v));
    }

    table.cfd = confidence_metric(table.raw_pvalues, v, dim);

    const double total = std::accumulate(table.weights.begin(), table.weights.end(), 0.0);
    if (total > 0.0)
        for (double& w : table.weights) w /= total;
    return table;
}

void SelectionSpec::validate() const {
    if (n < 1 || m < n) throw std::invalid_argument("SelectionSpec: need 1 <= n <= m");
    if (b < 2) throw std::invalid_argument("SelectionSpec: need b >= 2");
}

namespace {

struct BinWindow {
    int lo, hi;
};

// Expands [lo,hi] around the densest bin until the window holds at least n
// samples, preferring the denser neighbor; ties go toward the side whose
// center is closer to the window's density-weighted mean.
BinWindow accumulate_bins(const std::vector<int>& counts, const std::vector<double>& bin_sums,
                          double range_lo, double width, int start, int n) {
    const int b = static_cast<int>(counts.size());
    int lo = start, hi = start;
    long long acc = counts[static_cast<std::size_t>(start)];
    double sum = bin_sums[static_cast<std::size_t>(start)];
    while (acc < n && (lo > 0 || hi < b - 1)) {
        const long long left = lo > 0 ? counts[static_cast<std::size_t>(lo - 1)] : -1;
        const long long right = hi < b - 1 ? counts[static_cast<std::size_t>(hi + 1)] : -1;
        bool take_left;
        if (left > right) {
            take_left = true;
        } else if (right > left) {
            take_left = false;
        } else {
            const double mean = acc > 0 ? sum / static_cast<double>(acc)
                                        : range_lo + (lo + hi + 1) * width / 2;
            const double lc = range_lo + (lo - 1 + 0.5) * width;
            const double rc = range_lo + (hi + 1 + 0.5) * width;
            take_left = lo > 0 && (hi == b - 1 || std::abs(lc - mean) <= std::abs(rc - mean));
        }
        if (take_left) {
            --lo;
            acc += counts[static_cast<std::size_t>(lo)];
            sum += bin_sums[static_cast<std::size_t>(lo)];
        } else {
            ++hi;
            acc += counts[static_cast<std::size_t>(hi)];
            sum += bin_sums[static_cast<std::size_t>(hi)];
        }
    }
    return {lo, hi};
}

// Gaussian KDE peak with Silverman bandwidth, evaluated on a 512-point grid
// over the subset range.
double kde_peak(const std::vector<double>& subset) {
    const auto s = static_cast<double>(subset.size());
    if (subset.size() < 2) return subset.front();

    double mean = 0.0;
    for (double x : subset) mean += x;
    mean /= s;
    double var = 0.0;
    for (double x : subset) var += (x - mean) * (x - mean);
    var /= (s - 1.0);
    const double sd = std::sqrt(var);

    std::vector<double> sorted = subset;
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&](double q) {
        const double pos = q * (s - 1.0);
        const auto idx = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(idx);
        return idx + 1 < sorted.size() ? sorted[idx] * (1 - frac) + sorted[idx + 1] * frac
                                       : sorted[idx];
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    const double h = 0.9 * spread * std::pow(s, -0.2);
    if (h <= 0.0) return sorted[sorted.size() / 2];

    const double lo = sorted.front();
    const double hi = sorted.back();
    constexpr int kGrid = 512;
    double best_x = lo;
    double best_density = -1.0;
    for (int g = 0; g < kGrid; ++g) {
        const double x = lo + (hi - lo) * g / (kGrid - 1);
        double density = 0.0;
        for (double v : subset) {
            const double u = (x - v) / h;
            density += std::exp(-0.5 * u * u);
        }
        if (density > best_density) {
            best_density = density;
            best_x = x;
        }
    }
    return best_x;
}

}  // namespace

std::vector<double> select_measurements(std::span<const double> samples, const SelectionSpec& spec) {
    spec.validate();
    if (static_cast<int>(samples.size()) != spec.m)
        throw std::invalid_argument("select_measurements: sample count must equal spec.m");

    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double range_lo = *lo_it;
    const double range = std::max(*hi_it - range_lo, std::numeric_limits<double>::min());
    const double width = range / spec.b;

    std::vector<int> counts(static_cast<std::size_t>(spec.b), 0);
    std::vector<double> bin_sums(static_cast<std::size_t>(spec.b), 0.0);
    std::vector<int> bin_of(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        int bin = static_cast<int>((samples[k] - range_lo) / width);
        bin = std::clamp(bin, 0, spec.b - 1);
        bin_of[k] = bin;
        ++counts[static_cast<std::size_t>(bin)];
        bin_sums[static_cast<std::size_t>(bin)] += samples[k];
    }

    const int densest = static_cast<int>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    const BinWindow win = accumulate_bins(counts, bin_sums, range_lo, width, densest, spec.n);

    std::vector<double> subset;
    for (std::size_t k = 0; k < samples.size(); ++k)
        if (bin_of[k] >= win.lo && bin_of[k] <= win.hi) subset.push_back(samples[k]);

    const double peak = kde_peak(subset);

    // n samples of the full input nearest the peak; stable on distance ties.
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(samples[a] - peak) < std::abs(samples[b] - peak);
    });
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(spec.n));
    for (int k = 0; k < spec.n; ++k) out.push_back(samples[order[static_cast<std::size_t>(k)]]);
    return out;
}

}  // namespace rtdoa
