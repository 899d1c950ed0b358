#ifndef HLIFT_UVB_HPP
#define HLIFT_UVB_HPP

#include "hlift/connections.hpp"
#include "hlift/geometry.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hlift {

/// Scalar weight w(v) on vertical directions. The auxiliary metric on R^n_B + R^n_V
/// at fiber point v is <(u, a), (u', a')> = u.u' + w(v)^2 a.a'.
class FiberWeight {
public:
    enum class Mode { Euclidean, Normalized, Custom };

    static FiberWeight euclidean() { return FiberWeight(Mode::Euclidean, "euclidean", {}); }
    static FiberWeight normalized() { return FiberWeight(Mode::Normalized, "normalized", {}); }
    static FiberWeight custom(std::function<double(const Vector&)> fn, std::string label = "custom")
    {
        if (!fn)
            throw std::invalid_argument("FiberWeight: missing custom function");
        return FiberWeight(Mode::Custom, std::move(label), std::move(fn));
    }

    Mode mode() const { return mode_; }
    const std::string& name() const { return name_; }

    double operator()(const Vector& v) const
    {
        double w = 1.0;
        switch (mode_) {
        case Mode::Euclidean:
            return 1.0;
        case Mode::Normalized:
            w = 1.0 / std::sqrt(1.0 + v.squaredNorm());
            break;
        case Mode::Custom:
            w = fn_(v);
            break;
        }
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::domain_error("FiberWeight: weight must be positive and finite");
        return w;
    }

private:
    FiberWeight(Mode mode, std::string name, std::function<double(const Vector&)> fn)
        : mode_(mode), name_(std::move(name)), fn_(std::move(fn))
    {
    }

    Mode mode_;
    std::string name_;
    std::function<double(const Vector&)> fn_;
};

struct AngleSpectrum {
    std::vector<double> angles; // ascending, radians

    double theta_min() const { return angles.front(); }
    std::size_t size() const { return angles.size(); }
};

class RankDeficient : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

namespace detail {

inline Matrix orthonormal_columns(const Matrix& frame)
{
    Eigen::ColPivHouseholderQR<Matrix> qr(frame);
    qr.setThreshold(1e-13);
    if (qr.rank() < frame.cols())
        throw RankDeficient("principal_angles: frame is rank deficient");
    // Q = A P R^-1 rather than the Householder product: entries of Q that are tiny
    // relative to 1 then keep their relative precision, which the small-angle sines need.
    Index k = frame.cols();
    Matrix r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    Matrix q = (frame * qr.colsPermutation()) * r.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
    // One more pass restores orthogonality lost to the conditioning of R.
    Eigen::HouseholderQR<Matrix> again(q);
    Matrix r2 = again.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    return q * r2.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
}

} // namespace detail

/// Principal angles between the column spans of two equal-width frames (Euclidean inner
/// product). Cosines come from the singular values of Qa^T Qb, sines from those of
/// Qb - Qa Qa^T Qb; each angle uses whichever is better conditioned. Singular values
/// are clamped into [0, 1].
inline AngleSpectrum principal_angles_between(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("principal_angles_between: frames differ in shape");
    Matrix qa = detail::orthonormal_columns(a);
    Matrix qb = detail::orthonormal_columns(b);
    Matrix cross = qa.transpose() * qb;
    Vector cosines = Eigen::JacobiSVD<Matrix>(cross).singularValues();           // descending
    Vector sines = Eigen::JacobiSVD<Matrix>(qb - qa * cross).singularValues(); // descending
    Index n = cosines.size();
    AngleSpectrum spectrum;
    spectrum.angles.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        double c = std::clamp(cosines[i], 0.0, 1.0);
        double s = std::clamp(sines[n - 1 - i], 0.0, 1.0);
        spectrum.angles[static_cast<std::size_t>(i)] = (s * s < 0.5) ? std::asin(s) : std::acos(c);
    }
    std::sort(spectrum.angles.begin(), spectrum.angles.end());
    return spectrum;
}

/// Principal angles between H_(p,v) and V_(p,v) under the weighted metric.
inline AngleSpectrum principal_angles(const ConnectionField& conn, const ChartPoint& p, const Vector& v,
                                      const FiberWeight& weight = FiberWeight::normalized())
{
    Index n = conn.dimension();
    require_same_dimension(n, p.dimension(), "principal_angles(p)");
    require_same_dimension(n, v.size(), "principal_angles(v)");
    double w = weight(v);
    // Scaling the vertical block by w is an isometry from the weighted metric to the
    // Euclidean one; it maps V onto itself.
    Matrix horizontal = horizontal_basis(conn, p, v);
    horizontal.bottomRows(n) *= w;
    return principal_angles_between(horizontal, vertical_basis(n));
}

/// Principal angles between graph(A) = {(u, A u)} and the vertical space:
/// theta_i = arccot(s_i) with s_i the singular values of A.
inline AngleSpectrum graph_principal_angles(const Matrix& slope)
{
    if (slope.rows() != slope.cols())
        throw std::invalid_argument("graph_principal_angles: slope must be square");
    Vector s = Eigen::JacobiSVD<Matrix>(slope).singularValues();
    AngleSpectrum spectrum;
    for (Index i = 0; i < s.size(); ++i)
        spectrum.angles.push_back(std::atan2(1.0, s[i]));
    std::sort(spectrum.angles.begin(), spectrum.angles.end());
    return spectrum;
}

enum class Verdict { UVB, NotUVB, Inconclusive };

inline const char* to_string(Verdict verdict)
{
    switch (verdict) {
    case Verdict::UVB:
        return "UVB";
    case Verdict::NotUVB:
        return "NotUVB";
    case Verdict::Inconclusive:
        return "Inconclusive";
    }
    return "Inconclusive";
}

/// Cutoffs that turn a finite fiber scan into a verdict.
struct ClassifierThresholds {
    double epsilon = 1e-3;       // radians
    double decay_exponent = -0.4; // NotUVB needs beta <= this on some direction
    double flat_exponent = -0.1;  // UVB needs beta >= this on every direction
};

struct FiberScanReport {
    Vector point;
    std::string weight;
    std::vector<Vector> directions;
    std::vector<double> radii;
    std::vector<std::vector<double>> theta_min; // [direction][radius]
    std::vector<double> beta;
    Verdict verdict = Verdict::Inconclusive;
    double epsilon = 1e-3;
};

/// Geometric grid 2^0, 2^1, ..., 2^max_exponent.
inline std::vector<double> default_radii(int max_exponent = 20)
{
    std::vector<double> radii;
    for (int k = 0; k <= max_exponent; ++k)
        radii.push_back(std::ldexp(1.0, k));
    return radii;
}

/// +e_1, -e_1, ..., +e_n, -e_n.
inline std::vector<Vector> default_directions(Index n)
{
    std::vector<Vector> dirs;
    for (Index i = 0; i < n; ++i) {
        dirs.push_back(Vector::Unit(n, i));
        dirs.push_back(-Vector::Unit(n, i));
    }
    return dirs;
}

/// Least-squares slope of log(theta) against log(r) over radii within the top decade.
inline double decay_exponent(const std::vector<double>& radii, const std::vector<double>& theta)
{
    if (radii.size() < 2 || radii.size() != theta.size())
        throw std::invalid_argument("decay_exponent: need at least two matching samples");
    double r_max = radii.back();
    std::size_t first = radii.size() - 2;
    while (first > 0 && radii[first - 1] >= r_max / 10.0 * (1.0 - 1e-12))
        --first;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double m = static_cast<double>(radii.size() - first);
    for (std::size_t i = first; i < radii.size(); ++i) {
        double x = std::log(radii[i]);
        double y = std::log(theta[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

/// NotUVB when some direction decays strictly over the top two decades, ends below
/// epsilon and has beta <= decay_exponent. UVB when every sample stays >= epsilon and
/// every beta >= flat_exponent. Anything else, or fewer than 4 radii, is Inconclusive.
inline Verdict uvb_classify(const FiberScanReport& report, const ClassifierThresholds& thresholds = {})
{
    const auto& radii = report.radii;
    if (radii.size() < 4 || report.theta_min.empty())
        return Verdict::Inconclusive;
    double r_max = radii.back();
    std::size_t window = radii.size() - 1;
    while (window > 0 && radii[window - 1] >= r_max / 100.0 * (1.0 - 1e-12))
        --window;

    bool all_bounded = true;
    for (std::size_t d = 0; d < report.theta_min.size(); ++d) {
        const auto& theta = report.theta_min[d];
        bool decreasing = true;
        for (std::size_t i = window + 1; i < theta.size(); ++i)
            decreasing = decreasing && theta[i] < theta[i - 1];
        if (decreasing && theta.back() < thresholds.epsilon && report.beta[d] <= thresholds.decay_exponent)
            return Verdict::NotUVB;
        double lowest = *std::min_element(theta.begin(), theta.end());
        if (lowest < thresholds.epsilon || report.beta[d] < thresholds.flat_exponent)
            all_bounded = false;
    }
    return all_bounded ? Verdict::UVB : Verdict::Inconclusive;
}

inline Verdict uvb_classify(const FiberScanReport& report, double epsilon)
{
    ClassifierThresholds thresholds;
    thresholds.epsilon = epsilon;
    return uvb_classify(report, thresholds);
}

/// theta_min at v = r d over every (direction, radius) pair, the per-direction decay
/// exponent, and the resulting verdict.
inline FiberScanReport fiber_scan(const ConnectionField& conn, const ChartPoint& p, std::vector<Vector> directions,
                                  std::vector<double> radii, const FiberWeight& weight = FiberWeight::normalized(),
                                  const ClassifierThresholds& thresholds = {})
{
    Index n = conn.dimension();
    require_same_dimension(n, p.dimension(), "fiber_scan(p)");
    if (directions.empty())
        directions = default_directions(n);
    if (radii.empty())
        radii = default_radii();
    for (const auto& d : directions) {
        require_same_dimension(n, d.size(), "fiber_scan(direction)");
        if (std::abs(d.norm() - 1.0) > 1e-12)
            throw std::invalid_argument("fiber_scan: directions must be unit vectors");
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0) || !std::isfinite(radii[i]))
            throw std::invalid_argument("fiber_scan: radii must be positive");
        if (i > 0 && !(radii[i] > radii[i - 1]))
            throw std::invalid_argument("fiber_scan: radii must be strictly increasing");
    }

    FiberScanReport report;
    report.point = p.coords();
    report.weight = weight.name();
    report.epsilon = thresholds.epsilon;
    report.theta_min.assign(directions.size(), std::vector<double>(radii.size()));
    for (std::size_t d = 0; d < directions.size(); ++d) {
        for (std::size_t r = 0; r < radii.size(); ++r) {
            try {
                report.theta_min[d][r] = principal_angles(conn, p, radii[r] * directions[d], weight).theta_min();
            } catch (const std::exception& e) {
                throw std::runtime_error("fiber_scan: direction " + std::to_string(d) + ", radius "
                                         + std::to_string(radii[r]) + ": " + e.what());
            }
        }
        report.beta.push_back(radii.size() >= 2 ? decay_exponent(radii, report.theta_min[d]) : 0.0);
    }
    report.directions = std::move(directions);
    report.radii = std::move(radii);
    report.verdict = uvb_classify(report, thresholds);
    return report;
}

} // namespace hlift

#endif // HLIFT_UVB_HPP
