#ifndef HLIFT_GEOMETRY_HPP
#define HLIFT_GEOMETRY_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hlift {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_same_dimension(Index a, Index b, const char* what)
{
    if (a != b)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs "
                                    + std::to_string(b) + ")");
}

/// A point in the single coordinate chart, stored by its coordinates.
class ChartPoint {
public:
    explicit ChartPoint(Vector coords) : coords_(std::move(coords))
    {
        if (coords_.size() < 1)
            throw std::invalid_argument("ChartPoint: dimension must be at least 1");
        if (!all_finite(coords_))
            throw std::invalid_argument("ChartPoint: non-finite coordinate");
    }

    ChartPoint(std::initializer_list<double> values) : ChartPoint(from_list(values)) {}

    const Vector& coords() const { return coords_; }
    Index dimension() const { return coords_.size(); }
    double operator[](Index i) const { return coords_[i]; }

private:
    static Vector from_list(std::initializer_list<double> values)
    {
        Vector v(static_cast<Index>(values.size()));
        Index i = 0;
        for (double x : values)
            v[i++] = x;
        return v;
    }

    Vector coords_;
};

/// Fiber coordinates `vec` attached at `base`.
struct TangentVector {
    TangentVector(ChartPoint base_point, Vector fiber) : base(std::move(base_point)), vec(std::move(fiber))
    {
        require_same_dimension(base.dimension(), vec.size(), "TangentVector");
        if (!all_finite(vec))
            throw std::invalid_argument("TangentVector: non-finite fiber coordinate");
    }

    ChartPoint base;
    Vector vec;
};

enum class PathKind { Segment, PolylineHermite, CircleLoop, Custom };

inline const char* to_string(PathKind kind)
{
    switch (kind) {
    case PathKind::Segment:
        return "segment";
    case PathKind::PolylineHermite:
        return "polyline-hermite";
    case PathKind::CircleLoop:
        return "circle-loop";
    case PathKind::Custom:
        return "custom";
    }
    return "custom";
}

/// C^1 curve t -> gamma(t) on the fixed parameter domain [0,1], with its velocity.
/// Evaluators are pure; a PathCurve can be copied and shared freely.
class PathCurve {
public:
    using Evaluator = std::function<Vector(double)>;

    PathCurve(Index dimension, Evaluator position, Evaluator velocity, PathKind kind = PathKind::Custom)
        : dim_(dimension), position_(std::move(position)), velocity_(std::move(velocity)), kind_(kind)
    {
        if (dim_ < 1)
            throw std::invalid_argument("PathCurve: dimension must be at least 1");
        if (!position_ || !velocity_)
            throw std::invalid_argument("PathCurve: missing evaluator");
    }

    Index dimension() const { return dim_; }
    PathKind kind() const { return kind_; }

    Vector position(double t) const { return position_(t); }
    Vector velocity(double t) const { return velocity_(t); }

    ChartPoint start() const { return ChartPoint(position(0.0)); }
    ChartPoint end() const { return ChartPoint(position(1.0)); }

private:
    Index dim_;
    Evaluator position_;
    Evaluator velocity_;
    PathKind kind_;
};

inline PathCurve path_segment(const ChartPoint& a, const ChartPoint& b)
{
    require_same_dimension(a.dimension(), b.dimension(), "path_segment");
    Vector from = a.coords();
    Vector delta = b.coords() - a.coords();
    return PathCurve(
        from.size(), [from, delta](double t) -> Vector { return from + t * delta; },
        [delta](double) -> Vector { return delta; }, PathKind::Segment);
}

namespace detail {

// Piecewise cubic Hermite data; tangents are d/dt of the curve.
struct HermiteKnots {
    std::vector<double> times;
    std::vector<Vector> points;
    std::vector<Vector> tangents;

    std::size_t interval(double t) const
    {
        if (t <= times.front())
            return 0;
        if (t >= times.back())
            return times.size() - 2;
        auto it = std::upper_bound(times.begin(), times.end(), t);
        return static_cast<std::size_t>(std::distance(times.begin(), it)) - 1;
    }

    Vector position(double t) const
    {
        std::size_t k = interval(t);
        double h = times[k + 1] - times[k];
        double s = (t - times[k]) / h;
        double s2 = s * s;
        double s3 = s2 * s;
        double h00 = 2 * s3 - 3 * s2 + 1;
        double h10 = s3 - 2 * s2 + s;
        double h01 = -2 * s3 + 3 * s2;
        double h11 = s3 - s2;
        return h00 * points[k] + h10 * h * tangents[k] + h01 * points[k + 1] + h11 * h * tangents[k + 1];
    }

    Vector velocity(double t) const
    {
        std::size_t k = interval(t);
        double h = times[k + 1] - times[k];
        double s = (t - times[k]) / h;
        double s2 = s * s;
        double d00 = (6 * s2 - 6 * s) / h;
        double d10 = 3 * s2 - 4 * s + 1;
        double d01 = (-6 * s2 + 6 * s) / h;
        double d11 = 3 * s2 - 2 * s;
        return d00 * points[k] + d10 * tangents[k] + d01 * points[k + 1] + d11 * tangents[k + 1];
    }
};

} // namespace detail

/// C^1 cubic Hermite interpolant through `points` at `times`. Interior tangents are
/// centered differences, end tangents one-sided. Times must run from 0 to 1.
inline PathCurve path_polyline(const std::vector<ChartPoint>& points, const std::vector<double>& times)
{
    if (points.size() < 2)
        throw std::invalid_argument("path_polyline: need at least 2 points");
    if (times.size() != points.size())
        throw std::invalid_argument("path_polyline: times and points differ in length");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("path_polyline: times must be strictly increasing");
    if (times.front() != 0.0 || times.back() != 1.0)
        throw std::invalid_argument("path_polyline: times must start at 0 and end at 1");
    Index n = points.front().dimension();
    for (const auto& p : points)
        require_same_dimension(n, p.dimension(), "path_polyline");

    auto knots = std::make_shared<detail::HermiteKnots>();
    knots->times = times;
    for (const auto& p : points)
        knots->points.push_back(p.coords());
    std::size_t m = points.size();
    knots->tangents.resize(m);
    knots->tangents[0] = (knots->points[1] - knots->points[0]) / (times[1] - times[0]);
    knots->tangents[m - 1] = (knots->points[m - 1] - knots->points[m - 2]) / (times[m - 1] - times[m - 2]);
    for (std::size_t k = 1; k + 1 < m; ++k)
        knots->tangents[k] = (knots->points[k + 1] - knots->points[k - 1]) / (times[k + 1] - times[k - 1]);

    return PathCurve(
        n, [knots](double t) { return knots->position(t); }, [knots](double t) { return knots->velocity(t); },
        PathKind::PolylineHermite);
}

/// Closed loop traversed once: center + r (cos 2 pi t e_i + sin 2 pi t e_j).
inline PathCurve path_circle(const ChartPoint& center, double radius, Index i = 0, Index j = 1)
{
    Index n = center.dimension();
    if (n < 2)
        throw std::invalid_argument("path_circle: needs dimension >= 2");
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
        throw std::invalid_argument("path_circle: invalid plane indices");
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw std::invalid_argument("path_circle: radius must be positive");
    Vector c = center.coords();
    constexpr double two_pi = 2.0 * std::numbers::pi;
    auto position = [c, radius, i, j](double t) -> Vector {
        // Pin both ends to the same point so the loop closes exactly.
        double angle = (t >= 1.0) ? 0.0 : two_pi * t;
        Vector x = c;
        x[i] += radius * std::cos(angle);
        x[j] += radius * std::sin(angle);
        return x;
    };
    auto velocity = [n, radius, i, j](double t) -> Vector {
        double angle = two_pi * t;
        Vector d = Vector::Zero(n);
        d[i] = -two_pi * radius * std::sin(angle);
        d[j] = two_pi * radius * std::cos(angle);
        return d;
    };
    return PathCurve(n, position, velocity, PathKind::CircleLoop);
}

inline PathCurve path_reverse(const PathCurve& path)
{
    return PathCurve(
        path.dimension(), [path](double t) { return path.position(1.0 - t); },
        [path](double t) -> Vector { return -path.velocity(1.0 - t); }, path.kind());
}

} // namespace hlift

#endif // HLIFT_GEOMETRY_HPP
