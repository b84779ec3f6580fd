#include "rtdoa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rtdoa {

Point Point::zero(int dim) {
    if (dim == 2) return Point(0.0, 0.0);
    if (dim == 3) return Point(0.0, 0.0, 0.0);
    throw std::invalid_argument("Point dimension must be 2 or 3");
}

bool Point::finite() const {
    for (int i = 0; i < dim_; ++i)
        if (!std::isfinite(coords_[static_cast<std::size_t>(i)])) return false;
    return true;
}

void SensorNetwork::validate(int localization_dim) const {
    if (localization_dim != 2 && localization_dim != 3)
        throw std::invalid_argument("localization dimension must be 2 or 3");
    if (signal_speed <= 0.0) throw std::invalid_argument("signal_speed must be positive");
    const std::size_t min_sensors = localization_dim == 2 ? 3 : 4;
    if (sensors.size() < min_sensors)
        throw std::invalid_argument("not enough sensors for requested dimension");
    if (!snr_db.empty() && snr_db.size() != sensors.size())
        throw std::invalid_argument("snr_db size must match sensor count");
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        if (!sensors[i].finite()) throw std::invalid_argument("sensor position not finite");
        for (std::size_t j = i + 1; j < sensors.size(); ++j)
            if (distance(sensors[i], sensors[j]) == 0.0)
                throw std::invalid_argument("sensor positions must be distinct");
    }
}

std::vector<std::pair<int, int>> sensor_pairs(int sensor_count) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(sensor_count) * (sensor_count - 1) / 2);
    for (int j = 0; j < sensor_count; ++j)
        for (int i = j + 1; i < sensor_count; ++i) pairs.emplace_back(i, j);
    std::sort(pairs.begin(), pairs.end(),
              [](auto a, auto b) { return std::pair(a.second, a.first) < std::pair(b.second, b.first); });
    return pairs;
}

double distance(const Point& p, const Point& q) {
    if (p.dim() != q.dim()) throw std::invalid_argument("distance: dimension mismatch");
    double acc = 0.0;
    for (int i = 0; i < p.dim(); ++i) {
        const double d = p[i] - q[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double propagation_delay(const Point& sensor, const Point& source, double speed) {
    if (speed <= 0.0) throw std::invalid_argument("propagation_delay: speed must be positive");
    return distance(sensor, source) / speed;
}

double true_tdoa(const Point& si, const Point& sj, const Point& source, double speed) {
    return propagation_delay(si, source, speed) - propagation_delay(sj, source, speed);
}

double BoundingBox::radius() const {
    const double dx = (max_x - min_x) / 2;
    const double dy = (max_y - min_y) / 2;
    return std::sqrt(dx * dx + dy * dy);
}

namespace {

// Parametric form of one branch in the focal frame. rd == 0 degenerates to
// the perpendicular bisector of the foci; otherwise
// p(t) = M + sign * a cosh(t) ex + b sinh(t) ey, which stays exactly on the
// curve so root refinement can bisect in t.
struct BranchCurve {
    Point mid;
    double ex_x, ex_y, ey_x, ey_y;
    double a, b, sign;
    bool is_line;
    double t_max;

    Point at(double t) const {
        if (is_line) return Point(mid.x() + t * ey_x, mid.y() + t * ey_y);
        const double u = sign * a * std::cosh(t);
        const double v = b * std::sinh(t);
        return Point(mid.x() + u * ex_x + v * ey_x, mid.y() + u * ex_y + v * ey_y);
    }
};

BranchCurve make_branch(const Hyperbola& h, const BoundingBox& bbox) {
    const Point A = h.focus_a.xy();
    const Point B = h.focus_b.xy();
    const double baseline = distance(A, B);
    const double c_f = baseline / 2;
    const double a = std::abs(h.range_difference) / 2;

    BranchCurve curve;
    curve.mid = Point((A.x() + B.x()) / 2, (A.y() + B.y()) / 2);
    curve.ex_x = (B.x() - A.x()) / baseline;
    curve.ex_y = (B.y() - A.y()) / baseline;
    curve.ey_x = -curve.ex_y;
    curve.ey_y = curve.ex_x;
    curve.a = a;
    curve.b = std::sqrt(std::max(c_f * c_f - a * a, 0.0));
    // rd > 0 puts the branch nearer focus_b, which sits on the +ex side.
    curve.sign = h.range_difference > 0 ? 1.0 : -1.0;
    curve.is_line = a < 1e-12;

    // Reach far enough that the curve exits a box this large.
    const double reach = bbox.radius() + distance(curve.mid, bbox.center()) + baseline;
    if (curve.is_line) {
        curve.t_max = reach;
    } else {
        curve.t_max = std::asinh(reach / std::max(curve.b, 1e-9));
        curve.t_max = std::max(curve.t_max, std::acosh(std::max(reach / a, 1.0)));
    }
    return curve;
}

double implicit_value(const Point& p, const Hyperbola& h) {
    return distance(p, h.focus_a.xy()) - distance(p, h.focus_b.xy()) - h.range_difference;
}

}  // namespace

IntersectionResult hyperbola_intersections(const Hyperbola& h1, const Hyperbola& h2,
                                           const BoundingBox& bbox, double tol,
                                           double dedup_tol) {
    IntersectionResult result;
    if (h1.degenerate() || h2.degenerate()) {
        result.degenerate = true;
        return result;
    }
    // Identical curves: every sampled point is an "intersection"; flag instead.
    const bool same_foci = distance(h1.focus_a.xy(), h2.focus_a.xy()) < dedup_tol &&
                           distance(h1.focus_b.xy(), h2.focus_b.xy()) < dedup_tol;
    if (same_foci && std::abs(h1.range_difference - h2.range_difference) < tol) {
        result.degenerate = true;
        return result;
    }

    constexpr int kSamples = 1024;
    const BranchCurve curve = make_branch(h1, bbox);
    const auto param = [&](int k) {
        return -curve.t_max + 2 * curve.t_max * k / (kSamples - 1);
    };
    std::vector<double> vals(kSamples);
    for (int k = 0; k < kSamples; ++k) vals[k] = implicit_value(curve.at(param(k)), h2);

    for (int k = 0; k + 1 < kSamples; ++k) {
        const bool crossing = vals[k] == 0.0 ||
                              (vals[k] < 0.0) != (vals[static_cast<std::size_t>(k) + 1] < 0.0);
        if (!crossing) continue;
        double t_lo = param(k), t_hi = param(k + 1);
        double f_lo = vals[static_cast<std::size_t>(k)];
        for (int iter = 0; iter < 64; ++iter) {
            const double t_mid = (t_lo + t_hi) / 2;
            const double f_mid = implicit_value(curve.at(t_mid), h2);
            if ((f_lo <= 0.0) == (f_mid <= 0.0)) {
                t_lo = t_mid;
                f_lo = f_mid;
            } else {
                t_hi = t_mid;
            }
        }
        const Point p = curve.at((t_lo + t_hi) / 2);
        if (!bbox.contains(p, dedup_tol)) continue;
        if (std::abs(implicit_value(p, h1)) > tol || std::abs(implicit_value(p, h2)) > tol) continue;
        bool dup = false;
        for (const Point& q : result.points)
            if (distance(p, q) < dedup_tol) {
                dup = true;
                break;
            }
        if (!dup) result.points.push_back(p);
    }
    return result;
}

Point weighted_median_seed(const std::vector<Point>& points, const std::vector<double>& weights) {
    if (points.empty()) throw std::invalid_argument("weighted_median_seed: empty input");
    if (points.size() != weights.size())
        throw std::invalid_argument("weighted_median_seed: size mismatch");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("weighted_median_seed: negative weight");
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("weighted_median_seed: all weights zero");

    const int dim = points.front().dim();
    Point out = Point::zero(dim);
    std::vector<std::size_t> order(points.size());
    for (int c = 0; c < dim; ++c) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return points[a][c] < points[b][c];
        });
        double cum = 0.0;
        for (std::size_t idx : order) {
            cum += weights[idx];
            if (cum >= total / 2) {
                out[c] = points[idx][c];
                break;
            }
        }
    }
    return out;
}

}  // namespace rtdoa
