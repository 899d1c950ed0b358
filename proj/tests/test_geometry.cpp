#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace hlift;
using hlift::test::vec;

namespace {

// Central difference of the position with h = 1e-6 against the declared velocity.
void expect_velocity_consistent(const PathCurve& path)
{
    constexpr double h = 1e-6;
    for (int k = 0; k <= 100; ++k) {
        double t = k / 100.0;
        double lo = std::max(0.0, t - h);
        double hi = std::min(1.0, t + h);
        Vector fd = (path.position(hi) - path.position(lo)) / (hi - lo);
        Vector v = path.velocity(t);
        EXPECT_LE((fd - v).norm(), 1e-4 * (1.0 + v.norm())) << "t=" << t << " kind=" << to_string(path.kind());
    }
}

std::vector<PathCurve> sample_paths()
{
    std::vector<PathCurve> paths;
    paths.push_back(path_segment(ChartPoint{0.0, 0.0}, ChartPoint{3.0, 4.0}));
    paths.push_back(path_polyline({ChartPoint{0.0}, ChartPoint{1.0}, ChartPoint{0.0}}, {0.0, 0.5, 1.0}));
    paths.push_back(path_polyline({ChartPoint{0.0, 1.0}, ChartPoint{2.0, -1.0}, ChartPoint{0.5, 0.5}, ChartPoint{3.0, 3.0}},
                                  {0.0, 0.2, 0.7, 1.0}));
    paths.push_back(path_circle(ChartPoint{1.0, -2.0}, 0.75));
    paths.push_back(path_reverse(path_circle(ChartPoint{0.0, 0.0, 0.0}, 2.0, 2, 0)));
    return paths;
}

} // namespace

TEST(ChartPoint, RejectsEmptyAndNonFinite)
{
    EXPECT_THROW(ChartPoint(Vector(0)), std::invalid_argument);
    EXPECT_THROW(ChartPoint(vec({1.0, NAN})), std::invalid_argument);
    EXPECT_THROW(TangentVector(ChartPoint{0.0}, vec({1.0, 2.0})), std::invalid_argument);
}

TEST(PathSegment, AffineInterpolation)
{
    PathCurve path = path_segment(ChartPoint{0.0}, ChartPoint{1.0});
    EXPECT_DOUBLE_EQ(path.position(0.5)[0], 0.5);
    EXPECT_DOUBLE_EQ(path.velocity(0.5)[0], 1.0);
    EXPECT_EQ(path.kind(), PathKind::Segment);
}

TEST(PathSegment, DegenerateSegmentIsConstant)
{
    PathCurve path = path_segment(ChartPoint{2.0, 3.0}, ChartPoint{2.0, 3.0});
    for (double t : {0.0, 0.3, 1.0}) {
        EXPECT_TRUE(path.velocity(t).isZero(0.0));
        EXPECT_EQ(path.position(t), vec({2.0, 3.0}));
    }
}

TEST(PathSegment, PythagoreanSpeed)
{
    PathCurve path = path_segment(ChartPoint{0.0, 0.0}, ChartPoint{3.0, 4.0});
    for (double t : {0.0, 0.25, 0.9, 1.0})
        EXPECT_DOUBLE_EQ(path.velocity(t).norm(), 5.0);
}

TEST(PathSegment, DimensionMismatch)
{
    EXPECT_THROW(path_segment(ChartPoint{0.0}, ChartPoint{1.0, 2.0}), std::invalid_argument);
}

TEST(PathPolyline, TwoPointsReduceToSegment)
{
    PathCurve poly = path_polyline({ChartPoint{0.0}, ChartPoint{1.0}}, {0.0, 1.0});
    PathCurve seg = path_segment(ChartPoint{0.0}, ChartPoint{1.0});
    for (int k = 0; k <= 50; ++k) {
        double t = k / 50.0;
        EXPECT_NEAR(poly.position(t)[0], seg.position(t)[0], 1e-15);
        EXPECT_NEAR(poly.velocity(t)[0], seg.velocity(t)[0], 1e-14);
    }
}

TEST(PathPolyline, PeakInterpolatedWithContinuousVelocity)
{
    PathCurve path = path_polyline({ChartPoint{0.0}, ChartPoint{1.0}, ChartPoint{0.0}}, {0.0, 0.5, 1.0});
    EXPECT_NEAR(path.position(0.5)[0], 1.0, 1e-15);
    double left = path.velocity(0.5 - 1e-12)[0];
    double right = path.velocity(0.5 + 1e-12)[0];
    EXPECT_NEAR(left, right, 1e-9);
}

TEST(PathPolyline, SixteenKnotSineWithinOnePercent)
{
    std::vector<ChartPoint> points;
    std::vector<double> times;
    for (int k = 0; k < 16; ++k) {
        double t = k / 15.0;
        times.push_back(t);
        points.push_back(ChartPoint{std::sin(2 * std::numbers::pi * t)});
    }
    times.back() = 1.0;
    PathCurve path = path_polyline(points, times);
    double worst = 0.0;
    for (int k = 0; k <= 10000; ++k) {
        double t = k / 10000.0;
        worst = std::max(worst, std::abs(path.position(t)[0] - std::sin(2 * std::numbers::pi * t)));
    }
    EXPECT_LT(worst, 1e-2);
}

TEST(PathPolyline, InterpolatesKnotsExactly)
{
    std::vector<ChartPoint> points = {ChartPoint{0.0, 1.0}, ChartPoint{2.0, -1.0}, ChartPoint{0.5, 0.5},
                                      ChartPoint{3.0, 3.0}};
    std::vector<double> times = {0.0, 0.2, 0.7, 1.0};
    PathCurve path = path_polyline(points, times);
    for (std::size_t k = 0; k < points.size(); ++k)
        EXPECT_LE((path.position(times[k]) - points[k].coords()).norm(), 1e-12);
}

TEST(PathPolyline, RejectsBadKnots)
{
    EXPECT_THROW(path_polyline({ChartPoint{0.0}}, {0.0}), std::invalid_argument);
    EXPECT_THROW(path_polyline({ChartPoint{0.0}, ChartPoint{1.0}, ChartPoint{2.0}}, {0.0, 0.6, 0.5}),
                 std::invalid_argument);
    EXPECT_THROW(path_polyline({ChartPoint{0.0}, ChartPoint{1.0}}, {0.0, 0.5}), std::invalid_argument);
    EXPECT_THROW(path_polyline({ChartPoint{0.0}, ChartPoint{1.0}}, {0.0, 0.5, 1.0}), std::invalid_argument);
}

TEST(PathReverse, SwapsEndpointsAndNegatesVelocity)
{
    PathCurve rev = path_reverse(path_segment(ChartPoint{0.0}, ChartPoint{1.0}));
    EXPECT_DOUBLE_EQ(rev.position(0.0)[0], 1.0);
    for (double t : {0.0, 0.4, 1.0})
        EXPECT_DOUBLE_EQ(rev.velocity(t)[0], -1.0);
}

TEST(PathReverse, IsAnInvolution)
{
    for (const auto& path : sample_paths()) {
        PathCurve twice = path_reverse(path_reverse(path));
        for (int k = 0; k <= 100; ++k) {
            double t = k / 100.0;
            EXPECT_LE((twice.position(t) - path.position(t)).norm(), 1e-12);
            EXPECT_LE((twice.velocity(t) - path.velocity(t)).norm(), 1e-12);
        }
    }
}

TEST(PathCurve, VelocityMatchesFiniteDifferences)
{
    for (const auto& path : sample_paths())
        expect_velocity_consistent(path);
}

TEST(PathCircle, ClosesExactly)
{
    PathCurve loop = path_circle(ChartPoint{0.5, 0.5}, 0.3);
    EXPECT_EQ(loop.position(0.0), loop.position(1.0));
    EXPECT_NEAR((loop.position(0.25) - vec({0.5, 0.8})).norm(), 0.0, 1e-15);
    EXPECT_THROW(path_circle(ChartPoint{0.0}, 1.0), std::invalid_argument);
    EXPECT_THROW(path_circle(ChartPoint{0.0, 0.0}, -1.0), std::invalid_argument);
    EXPECT_THROW(path_circle(ChartPoint{0.0, 0.0}, 1.0, 1, 1), std::invalid_argument);
}
