#ifndef HLIFT_INTEGRATOR_HPP
#define HLIFT_INTEGRATOR_HPP

#include "hlift/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlift {

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double escape_norm = 1e8;
    double min_step = 1e-12;
    std::size_t max_steps = 1'000'000;
    std::size_t dense_samples = 201;

    void validate() const
    {
        auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
        if (!positive(rtol) || rtol < 1e-14)
            throw std::invalid_argument("IntegratorOptions: rtol must be >= 1e-14");
        if (!positive(atol))
            throw std::invalid_argument("IntegratorOptions: atol must be positive");
        if (!positive(escape_norm))
            throw std::invalid_argument("IntegratorOptions: escape_norm must be positive");
        if (!positive(min_step))
            throw std::invalid_argument("IntegratorOptions: min_step must be positive");
        if (max_steps == 0)
            throw std::invalid_argument("IntegratorOptions: max_steps must be positive");
        if (dense_samples < 2)
            throw std::invalid_argument("IntegratorOptions: need at least 2 dense samples");
    }
};

enum class LiftStatus { Complete, Escaped, StepCollapse };

inline const char* to_string(LiftStatus status)
{
    switch (status) {
    case LiftStatus::Complete:
        return "complete";
    case LiftStatus::Escaped:
        return "escaped";
    case LiftStatus::StepCollapse:
        return "step-collapse";
    }
    return "step-collapse";
}

struct IntegrationStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    double max_derivative_norm = 0.0;
};

/// Output of integrate_adaptive. Samples lie on the uniform dense grid over
/// [t_begin, t_end] up to where integration stopped; when it stopped early the
/// stopping state is appended as the final sample.
struct RawTrajectory {
    std::vector<double> t;
    std::vector<Vector> y;
    LiftStatus status = LiftStatus::Complete;
    double t_stop = 0.0;
    double norm_at_stop = 0.0;
    IntegrationStats stats;
    std::string diagnostic;
};

using OdeRhs = std::function<Vector(double, const Vector&)>;

namespace detail {

// Dormand-Prince 5(4) tableau with Shampine's dense-output weights.
namespace dp {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
} // namespace dp

// Continuous extension over one accepted step [t, t + h].
struct DenseStep {
    double t = 0.0;
    double h = 0.0;
    Vector r1, r2, r3, r4, r5;

    Vector operator()(double x) const
    {
        double s = (x - t) / h;
        double s1 = 1.0 - s;
        return r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
    }
};

inline double error_norm(const Vector& err, const Vector& y0, const Vector& y1, double atol, double rtol)
{
    double sum = 0.0;
    for (Index i = 0; i < err.size(); ++i) {
        double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        double r = err[i] / scale;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(err.size()));
}

inline double initial_step(const OdeRhs& f, double t0, const Vector& y0, const Vector& f0, double direction,
                           double span, const IntegratorOptions& opts)
{
    Vector sk = (opts.atol + opts.rtol * y0.array().abs()).matrix();
    double n = static_cast<double>(y0.size());
    double dnf = std::sqrt((f0.array() / sk.array()).square().sum() / n);
    double dny = std::sqrt((y0.array() / sk.array()).square().sum() / n);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h = std::min(h, span);
    Vector y1 = y0 + direction * h * f0;
    Vector f1 = f(t0 + direction * h, y1);
    double der2 = f1.allFinite() ? std::sqrt(((f1 - f0).array() / sk.array()).square().sum() / n) / h
                                 : std::numeric_limits<double>::infinity();
    double der12 = std::max(std::abs(der2), dnf);
    double h1 = (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 5.0);
    return std::min({100 * h, h1, span});
}

} // namespace detail

/// Adaptive Dormand-Prince 5(4) with PI step control from y(t_begin) = y0 toward t_end
/// (either direction). Stops Escaped once an accepted state has norm >= escape_norm,
/// and StepCollapse when the step size drops below min_step or max_steps is exceeded.
inline RawTrajectory integrate_adaptive(const OdeRhs& f, double t_begin, double t_end, const Vector& y0,
                                        const IntegratorOptions& opts = {})
{
    using namespace detail::dp;
    opts.validate();
    if (!y0.allFinite())
        throw std::invalid_argument("integrate_adaptive: non-finite initial state");
    if (!std::isfinite(t_begin) || !std::isfinite(t_end) || t_begin == t_end)
        throw std::invalid_argument("integrate_adaptive: invalid time interval");

    constexpr double safety = 0.9;
    constexpr double fac_min = 0.2;  // largest shrink 1/5
    constexpr double fac_max = 10.0; // largest growth
    constexpr double beta = 0.04;
    constexpr double expo1 = 0.2 - beta * 0.75;

    const double direction = t_end > t_begin ? 1.0 : -1.0;
    const double span = std::abs(t_end - t_begin);
    const std::size_t grid_count = opts.dense_samples;
    auto grid_time = [&](std::size_t k) {
        if (k + 1 == grid_count)
            return t_end;
        return t_begin + (t_end - t_begin) * static_cast<double>(k) / static_cast<double>(grid_count - 1);
    };

    RawTrajectory out;
    out.t.reserve(grid_count + 1);
    out.y.reserve(grid_count + 1);
    out.t.push_back(t_begin);
    out.y.push_back(y0);
    std::size_t next_grid = 1;

    double t = t_begin;
    Vector y = y0;
    Vector k1 = f(t, y);
    if (!k1.allFinite())
        throw std::domain_error("integrate_adaptive: non-finite derivative at the initial state");
    out.stats.max_derivative_norm = k1.norm();

    if (y.norm() >= opts.escape_norm) {
        out.status = LiftStatus::Escaped;
        out.t_stop = t;
        out.norm_at_stop = y.norm();
        return out;
    }

    double h = detail::initial_step(f, t, y, k1, direction, span, opts);
    double fac_old = 1e-4;
    bool last_rejected = false;
    Vector k2, k3, k4, k5, k6, k7, y_stage, y_new;

    auto stop = [&](LiftStatus status, std::string why) {
        out.status = status;
        out.t_stop = t;
        out.norm_at_stop = y.norm();
        out.diagnostic = std::move(why);
        if (out.t.back() != t) {
            out.t.push_back(t);
            out.y.push_back(y);
        }
        return out;
    };

    while (true) {
        if (out.stats.steps + out.stats.rejected >= opts.max_steps)
            return stop(LiftStatus::StepCollapse, "max_steps exceeded");
        if (h < opts.min_step)
            return stop(LiftStatus::StepCollapse, "step size fell below min_step");

        double remaining = std::abs(t_end - t);
        bool final_step = h >= remaining;
        if (final_step)
            h = remaining;
        double hs = direction * h;

        y_stage = y + hs * a21 * k1;
        k2 = f(t + c2 * hs, y_stage);
        y_stage = y + hs * (a31 * k1 + a32 * k2);
        k3 = f(t + c3 * hs, y_stage);
        y_stage = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        k4 = f(t + c4 * hs, y_stage);
        y_stage = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        k5 = f(t + c5 * hs, y_stage);
        y_stage = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        double t_new = final_step ? t_end : t + hs;
        k6 = f(t + hs, y_stage);
        y_new = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        k7 = f(t_new, y_new);

        double err = std::numeric_limits<double>::infinity();
        if (y_new.allFinite() && k7.allFinite()) {
            Vector e = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            err = detail::error_norm(e, y, y_new, opts.atol, opts.rtol);
            if (!std::isfinite(err))
                err = std::numeric_limits<double>::infinity();
        }

        if (err > 1.0) {
            ++out.stats.rejected;
            double shrink = std::isfinite(err) ? std::min(1.0 / fac_min, std::pow(err, expo1) / safety) : 1.0 / fac_min;
            h /= shrink;
            last_rejected = true;
            continue;
        }

        double fac11 = std::pow(err, expo1);
        double fac = fac11 / std::pow(fac_old, beta);
        fac = std::clamp(fac / safety, 1.0 / fac_max, 1.0 / fac_min);
        double h_next = h / fac;
        fac_old = std::max(err, 1e-4);
        if (last_rejected)
            h_next = std::min(h_next, h);
        last_rejected = false;

        detail::DenseStep dense;
        dense.t = t;
        dense.h = hs;
        Vector diff = y_new - y;
        Vector bspl = hs * k1 - diff;
        dense.r1 = y;
        dense.r2 = diff;
        dense.r3 = bspl;
        dense.r4 = diff - hs * k7 - bspl;
        dense.r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

        ++out.stats.steps;
        while (next_grid < grid_count) {
            double tg = grid_time(next_grid);
            if (direction * (tg - t_new) > 0.0)
                break;
            out.t.push_back(tg);
            out.y.push_back(next_grid + 1 == grid_count && final_step ? y_new : dense(tg));
            ++next_grid;
        }

        t = t_new;
        y = y_new;
        k1 = k7;
        out.stats.max_derivative_norm = std::max(out.stats.max_derivative_norm, k1.norm());

        if (final_step) {
            out.status = LiftStatus::Complete;
            out.t_stop = t;
            out.norm_at_stop = y.norm();
            return out;
        }
        if (y.norm() >= opts.escape_norm)
            return stop(LiftStatus::Escaped, "state norm reached escape_norm");
        h = h_next;
    }
}

/// integrate_adaptive over the unit interval [0, 1].
inline RawTrajectory integrate_adaptive(const OdeRhs& f, const Vector& y0, const IntegratorOptions& opts = {})
{
    return integrate_adaptive(f, 0.0, 1.0, y0, opts);
}

} // namespace hlift

#endif // HLIFT_INTEGRATOR_HPP
