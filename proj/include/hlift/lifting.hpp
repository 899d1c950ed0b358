#ifndef HLIFT_LIFTING_HPP
#define HLIFT_LIFTING_HPP

#include "hlift/connections.hpp"
#include "hlift/geometry.hpp"
#include "hlift/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlift {

struct LiftSample {
    double t;
    Vector base;  // gamma(t), read from the path
    Vector fiber; // c(t)
};

/// Horizontal lift of a path sampled on the dense grid. The fiber is the only
/// integrated state; bases are evaluated from the path.
struct LiftTrajectory {
    std::vector<LiftSample> samples;
    LiftStatus status = LiftStatus::Complete;
    double t_stop = 1.0;
    double norm_at_stop = 0.0;
    IntegrationStats stats;
    std::string diagnostic;

    bool complete() const { return status == LiftStatus::Complete; }
    bool escaped() const { return status == LiftStatus::Escaped; }
    /// Last accepted time before the escape threshold was crossed.
    std::optional<double> t_escape() const
    {
        if (status == LiftStatus::Escaped)
            return t_stop;
        return std::nullopt;
    }
    const Vector& final_fiber() const { return samples.back().fiber; }
};

class TransportEscaped : public std::runtime_error {
public:
    TransportEscaped(LiftStatus status, double t_stop)
        : std::runtime_error(std::string("parallel transport failed: lift ") + to_string(status) + " at t="
                             + std::to_string(t_stop)),
          status_(status),
          t_stop_(t_stop)
    {
    }

    LiftStatus status() const { return status_; }
    double t_escape() const { return t_stop_; }

private:
    LiftStatus status_;
    double t_stop_;
};

inline OdeRhs lift_rhs(const ConnectionField& conn, const PathCurve& path)
{
    return [&conn, &path](double t, const Vector& c) -> Vector {
        Vector velocity = path.velocity(t);
        if (velocity.isZero(0.0))
            return Vector::Zero(c.size());
        return -(conn(path.position(t), c) * velocity);
    };
}

inline void check_lift_inputs(const ConnectionField& conn, const PathCurve& path, const Vector& v0)
{
    require_same_dimension(conn.dimension(), path.dimension(), "horizontal_lift(path)");
    require_same_dimension(conn.dimension(), v0.size(), "horizontal_lift(v0)");
    if (!v0.allFinite())
        throw std::invalid_argument("horizontal_lift: non-finite initial vector");
}

/// Integrate the lift from (t_begin, c0) toward t_end in either direction. Used for
/// lifts seeded in the interior of the parameter interval.
inline RawTrajectory lift_between(const ConnectionField& conn, const PathCurve& path, double t_begin, double t_end,
                                  const Vector& c0, const IntegratorOptions& opts = {})
{
    check_lift_inputs(conn, path, c0);
    return integrate_adaptive(lift_rhs(conn, path), t_begin, t_end, c0, opts);
}

/// Solve Dc = -Gamma(gamma(t), c(t)) gamma'(t), c(0) = v0 on [0, 1].
inline LiftTrajectory horizontal_lift(const ConnectionField& conn, const PathCurve& path, const Vector& v0,
                                      const IntegratorOptions& opts = {})
{
    RawTrajectory raw = lift_between(conn, path, 0.0, 1.0, v0, opts);
    LiftTrajectory lift;
    lift.status = raw.status;
    lift.t_stop = raw.t_stop;
    lift.norm_at_stop = raw.norm_at_stop;
    lift.stats = raw.stats;
    lift.diagnostic = std::move(raw.diagnostic);
    lift.samples.reserve(raw.t.size());
    for (std::size_t i = 0; i < raw.t.size(); ++i)
        lift.samples.push_back({raw.t[i], path.position(raw.t[i]), std::move(raw.y[i])});
    return lift;
}

inline TangentVector parallel_transport(const ConnectionField& conn, const PathCurve& path, const Vector& v0,
                                        const IntegratorOptions& opts = {})
{
    LiftTrajectory lift = horizontal_lift(conn, path, v0, opts);
    if (!lift.complete())
        throw TransportEscaped(lift.status, lift.t_stop);
    return TangentVector(ChartPoint(path.position(1.0)), lift.final_fiber());
}

/// Largest normalized residual |Dc + Gamma(gamma, c) gamma'| / (1 + |gamma'| |Gamma|) over
/// interior samples, with Dc from three-point differences. An escaped lift is checked
/// only on its grid samples before the escape point.
inline double horizontality_defect(const ConnectionField& conn, const LiftTrajectory& traj, const PathCurve& path)
{
    std::size_t count = traj.samples.size();
    if (traj.status != LiftStatus::Complete && count > 0)
        --count;
    if (count < 3)
        throw std::invalid_argument("horizontality_defect: need at least 3 samples");
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < count; ++i) {
        const auto& prev = traj.samples[i - 1];
        const auto& cur = traj.samples[i];
        const auto& next = traj.samples[i + 1];
        double hl = cur.t - prev.t;
        double hr = next.t - cur.t;
        // Second-order difference on a possibly non-uniform stencil.
        Vector derivative = -hr / (hl * (hl + hr)) * prev.fiber + (hr - hl) / (hl * hr) * cur.fiber
                            + hl / (hr * (hl + hr)) * next.fiber;
        Matrix gamma = conn(cur.base, cur.fiber);
        Vector velocity = path.velocity(cur.t);
        double residual = (derivative + gamma * velocity).norm();
        double scale = 1.0 + velocity.norm() * gamma.operatorNorm();
        worst = std::max(worst, residual / scale);
    }
    return worst;
}

/// |transport back along the reversed path of transport(v0) - v0|.
inline double round_trip_defect(const ConnectionField& conn, const PathCurve& path, const Vector& v0,
                                const IntegratorOptions& opts = {})
{
    TangentVector there = parallel_transport(conn, path, v0, opts);
    TangentVector back = parallel_transport(conn, path_reverse(path), there.vec, opts);
    return (back.vec - v0).norm();
}

/// Centered finite-difference Jacobian of v -> transport(v) at v0.
/// Default step is 1e-5 (1 + |v0|).
inline Matrix transport_jacobian(const ConnectionField& conn, const PathCurve& path, const Vector& v0,
                                 std::optional<double> step = std::nullopt, const IntegratorOptions& opts = {})
{
    double h = step.value_or(1e-5 * (1.0 + v0.norm()));
    if (!(h > 0.0) || !std::isfinite(h))
        throw std::invalid_argument("transport_jacobian: step must be positive");
    Index n = v0.size();
    Matrix jac(n, n);
    for (Index j = 0; j < n; ++j) {
        Vector plus = v0;
        Vector minus = v0;
        plus[j] += h;
        minus[j] -= h;
        Vector fp = parallel_transport(conn, path, plus, opts).vec;
        Vector fm = parallel_transport(conn, path, minus, opts).vec;
        jac.col(j) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

/// Transport of v0 once around a closed loop.
inline TangentVector holonomy(const ConnectionField& conn, const PathCurve& loop, const Vector& v0,
                              const IntegratorOptions& opts = {})
{
    Vector gap = loop.position(1.0) - loop.position(0.0);
    if (gap.norm() > 1e-10)
        throw std::invalid_argument("holonomy: path is not closed (gap " + std::to_string(gap.norm()) + ")");
    TangentVector result = parallel_transport(conn, loop, v0, opts);
    return TangentVector(ChartPoint(loop.position(0.0)), result.vec);
}

} // namespace hlift

#endif // HLIFT_LIFTING_HPP
