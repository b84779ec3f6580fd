#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

namespace rtdoa {

constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// A 2D or 3D point in meters. Dimension is carried with the value so that
/// mixed-dimension arithmetic is caught early instead of silently reading
/// a stale z coordinate.
class Point {
  public:
    Point() = default;
    Point(double x, double y) : coords_{x, y, 0.0}, dim_(2) {}
    Point(double x, double y, double z) : coords_{x, y, z}, dim_(3) {}

    static Point zero(int dim);

    int dim() const { return dim_; }
    double operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return coords_[static_cast<std::size_t>(i)]; }
    double x() const { return coords_[0]; }
    double y() const { return coords_[1]; }
    double z() const { return coords_[2]; }

    /// Drops the altitude coordinate; identity for 2D points.
    Point xy() const { return Point(coords_[0], coords_[1]); }

    bool finite() const;

  private:
    std::array<double, 3> coords_{0.0, 0.0, 0.0};
    int dim_ = 2;
};

/// Fixed sensor deployment: positions, per-sensor SNR in dB and the
/// propagation speed of the signal being localized.
struct SensorNetwork {
    std::vector<Point> sensors;
    std::vector<double> snr_db;
    double signal_speed = kSpeedOfLight;

    std::size_t size() const { return sensors.size(); }
    int dim() const { return sensors.empty() ? 2 : sensors.front().dim(); }

    /// Throws std::invalid_argument unless the network can support a
    /// localization run in `localization_dim` dimensions (>= dim+1
    /// sensors, distinct positions, positive speed).
    void validate(int localization_dim) const;
};

/// Canonical pair list for N sensors: (i, j) with i > j, enumerated in the
/// order (1,0), (2,0), ..., (2,1), (3,1), ... so it lines up with the usual
/// Delta_12, Delta_13, ... presentation.
std::vector<std::pair<int, int>> sensor_pairs(int sensor_count);

double distance(const Point& p, const Point& q);
double propagation_delay(const Point& sensor, const Point& source, double speed);

/// TDOA between sensors si and sj for a source: (d(si,src) - d(sj,src)) / speed.
/// Antisymmetric in (si, sj).
double true_tdoa(const Point& si, const Point& sj, const Point& source, double speed);

/// One branch of the hyperbola d(p, focus_a) - d(p, focus_b) = range_difference.
/// range_difference is in meters and signed; |range_difference| greater than
/// the focal baseline means no realizable branch.
struct Hyperbola {
    Point focus_a;
    Point focus_b;
    double range_difference = 0.0;

    double baseline() const { return distance(focus_a, focus_b); }
    bool degenerate() const { return std::abs(range_difference) > baseline(); }
};

struct BoundingBox {
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

    static BoundingBox centered(double half_extent) {
        return {-half_extent, -half_extent, half_extent, half_extent};
    }
    bool contains(const Point& p, double margin = 0.0) const {
        return p.x() >= min_x - margin && p.x() <= max_x + margin &&
               p.y() >= min_y - margin && p.y() <= max_y + margin;
    }
    double radius() const;
    Point center() const { return Point((min_x + max_x) / 2, (min_y + max_y) / 2); }
};

struct IntersectionResult {
    std::vector<Point> points;
    bool degenerate = false;
};

/// Numerical intersection of two hyperbola branches inside bbox. Points are
/// found by sampling one branch parametrically and refining sign changes of
/// the other branch's implicit equation; duplicates within dedup_tol meters
/// are merged. `tol` bounds the residual |d(p,fa)-d(p,fb)-rd| of accepted
/// points, in meters.
IntersectionResult hyperbola_intersections(const Hyperbola& h1, const Hyperbola& h2,
                                           const BoundingBox& bbox, double tol,
                                           double dedup_tol = 0.1);

/// Coordinate-wise weighted median: per coordinate, the smallest value whose
/// cumulative weight reaches half of the total. Invariant under positive
/// rescaling of all weights.
Point weighted_median_seed(const std::vector<Point>& points, const std::vector<double>& weights);

}  // namespace rtdoa
