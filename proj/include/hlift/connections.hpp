#ifndef HLIFT_CONNECTIONS_HPP
#define HLIFT_CONNECTIONS_HPP

#include "hlift/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hlift {

/// A general connection on a chart domain, stored by its coefficient map.
///
/// The horizontal space at (p, v) is the graph {(u, -Gamma(p, v) u)} over the basal
/// factor, so the lift of a path solves Dc = -Gamma(gamma, c) gamma'. Nothing
/// requires Gamma to be linear in v; `linear_in_fiber` records when it is.
class ConnectionField {
public:
    using CoefficientMap = std::function<Matrix(const Vector& p, const Vector& v)>;

    ConnectionField(std::string name, Index dimension, CoefficientMap map, bool linear_in_fiber,
                    std::optional<double> growth_hint, std::string params = {})
        : name_(std::move(name)),
          params_(std::move(params)),
          dim_(dimension),
          map_(std::move(map)),
          linear_(linear_in_fiber),
          growth_hint_(growth_hint)
    {
        if (dim_ < 1)
            throw std::invalid_argument("ConnectionField: dimension must be at least 1");
        if (!map_)
            throw std::invalid_argument("ConnectionField: missing coefficient map");
    }

    const std::string& name() const { return name_; }
    /// Human-readable parameter summary, e.g. "lambda=1".
    const std::string& params() const { return params_; }
    Index dimension() const { return dim_; }
    bool is_linear_in_fiber() const { return linear_; }
    std::optional<double> growth_hint() const { return growth_hint_; }

    /// Gamma(p, v). Throws on mismatched dimensions, non-finite input or output.
    Matrix operator()(const Vector& p, const Vector& v) const
    {
        require_same_dimension(dim_, p.size(), "coeff(p)");
        require_same_dimension(dim_, v.size(), "coeff(v)");
        if (!p.allFinite() || !v.allFinite())
            throw std::invalid_argument("coeff: non-finite input");
        Matrix g = map_(p, v);
        if (g.rows() != dim_ || g.cols() != dim_)
            throw std::logic_error("coeff: coefficient map returned wrong shape");
        if (!g.allFinite())
            throw std::domain_error("coeff: non-finite coefficient for connection " + name_);
        return g;
    }

private:
    std::string name_;
    std::string params_;
    Index dim_;
    CoefficientMap map_;
    bool linear_;
    std::optional<double> growth_hint_;
};

inline Matrix coeff(const ConnectionField& conn, const ChartPoint& p, const Vector& v) { return conn(p.coords(), v); }

/// Raw 2n x n frame of H_(p,v): column j is (e_j, -Gamma(p,v) e_j).
inline Matrix horizontal_basis(const ConnectionField& conn, const ChartPoint& p, const Vector& v)
{
    Index n = conn.dimension();
    Matrix frame(2 * n, n);
    frame.topRows(n).setIdentity();
    frame.bottomRows(n) = -coeff(conn, p, v);
    return frame;
}

/// 2n x n frame of the vertical space {0} x R^n.
inline Matrix vertical_basis(Index n)
{
    Matrix frame = Matrix::Zero(2 * n, n);
    frame.bottomRows(n).setIdentity();
    return frame;
}

/// Christoffel array at a point: entry [k](i, j) is Gamma^k_ij.
using ChristoffelArray = std::vector<Matrix>;
using ChristoffelField = std::function<ChristoffelArray(const Vector& p)>;

/// Linear connection from Christoffel symbols: (Gamma(p,v) u)^k = sum_ij Gamma^k_ij(p) u^i v^j,
/// so the lift is the classical transport equation Dc^k = -Gamma^k_ij gamma'^i c^j.
inline ConnectionField make_linear_connection(Index n, ChristoffelField christoffel, std::string name = "christoffel",
                                              std::string params = {})
{
    if (n < 1)
        throw std::invalid_argument("make_linear_connection: dimension must be at least 1");
    if (!christoffel)
        throw std::invalid_argument("make_linear_connection: missing Christoffel field");
    auto map = [n, christoffel = std::move(christoffel)](const Vector& p, const Vector& v) -> Matrix {
        ChristoffelArray symbols = christoffel(p);
        if (static_cast<Index>(symbols.size()) != n)
            throw std::invalid_argument("make_linear_connection: Christoffel array has wrong leading extent");
        Matrix g(n, n);
        for (Index k = 0; k < n; ++k) {
            const Matrix& gk = symbols[static_cast<std::size_t>(k)];
            if (gk.rows() != n || gk.cols() != n)
                throw std::invalid_argument("make_linear_connection: Christoffel slice has wrong shape");
            g.row(k) = (gk * v).transpose();
        }
        return g;
    };
    return ConnectionField(std::move(name), n, std::move(map), true, 1.0, std::move(params));
}

/// One term coeff * prod_m p_m^monomial[m] contributing to Gamma^k_ij.
struct PolynomialTerm {
    Index k = 0;
    Index i = 0;
    Index j = 0;
    double coeff = 0.0;
    std::vector<int> monomial;
};

inline ChristoffelField polynomial_christoffel(Index n, std::vector<PolynomialTerm> terms)
{
    for (const auto& term : terms) {
        if (term.k < 0 || term.k >= n || term.i < 0 || term.i >= n || term.j < 0 || term.j >= n)
            throw std::invalid_argument("christoffel term: index out of range");
        if (!term.monomial.empty() && static_cast<Index>(term.monomial.size()) != n)
            throw std::invalid_argument("christoffel term: monomial length must equal the dimension");
        for (int e : term.monomial)
            if (e < 0)
                throw std::invalid_argument("christoffel term: negative exponent");
        if (!std::isfinite(term.coeff))
            throw std::invalid_argument("christoffel term: non-finite coefficient");
    }
    return [n, terms = std::move(terms)](const Vector& p) {
        ChristoffelArray symbols(static_cast<std::size_t>(n), Matrix::Zero(n, n));
        for (const auto& term : terms) {
            double value = term.coeff;
            for (std::size_t m = 0; m < term.monomial.size(); ++m)
                value *= std::pow(p[static_cast<Index>(m)], term.monomial[m]);
            symbols[static_cast<std::size_t>(term.k)](term.i, term.j) += value;
        }
        return symbols;
    };
}

/// Levi-Civita symbols of the round unit-sphere metric 4 delta / (1 + |p|^2)^2 in
/// stereographic coordinates. With f = log 2 - log(1 + |p|^2),
/// Gamma^k_ij = delta_ki d_j f + delta_kj d_i f - delta_ij d_k f.
inline ChristoffelArray sphere_stereographic_christoffel(const Vector& p)
{
    Index n = p.size();
    Vector df = -2.0 * p / (1.0 + p.squaredNorm());
    ChristoffelArray symbols(static_cast<std::size_t>(n), Matrix::Zero(n, n));
    for (Index k = 0; k < n; ++k) {
        Matrix& gk = symbols[static_cast<std::size_t>(k)];
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                gk(i, j) = (k == i ? df[j] : 0.0) + (k == j ? df[i] : 0.0) - (i == j ? df[k] : 0.0);
    }
    return symbols;
}

/// Parsed connection description: a gallery name plus whatever parameters it uses.
struct ConnectionSpec {
    std::string name;
    std::optional<Index> dimension;
    double lambda = 1.0;
    double alpha = 2.0;
    std::vector<PolynomialTerm> terms;
};

namespace detail {

inline std::string format_param(const char* key, double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%g", key, value);
    return buf;
}

inline ConnectionField power_growth(double alpha, std::string name, std::string params)
{
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("power-growth: alpha must be finite and >= 0");
    auto map = [alpha](const Vector&, const Vector& v) -> Matrix {
        Matrix g(1, 1);
        g(0, 0) = -std::pow(1.0 + v.squaredNorm(), 0.5 * alpha);
        return g;
    };
    return ConnectionField(std::move(name), 1, map, false, alpha, std::move(params));
}

} // namespace detail

/// Resolve a spec to a connection.
///
///   flat                  Gamma = 0 (any dimension, default 1)
///   fig1                  n = 1, Gamma = -(1 + v^2); lifts over gamma(t) = t are tan(t + arctan v0)
///   scalar-linear         n = 1, Gamma = lambda v
///   power-growth          n = 1, Gamma = -(1 + v^2)^(alpha/2)
///   sphere-stereographic  n = 2, Levi-Civita connection of the round sphere
///   christoffel           linear connection from polynomial Christoffel terms
inline ConnectionField gallery(const ConnectionSpec& spec)
{
    const std::string& name = spec.name;
    auto check_dim = [&](Index fixed) {
        if (spec.dimension && *spec.dimension != fixed)
            throw std::invalid_argument(name + ": dimension is fixed at " + std::to_string(fixed));
    };

    if (name == "flat") {
        Index n = spec.dimension.value_or(1);
        if (n < 1)
            throw std::invalid_argument("flat: dimension must be at least 1");
        auto map = [n](const Vector&, const Vector&) -> Matrix { return Matrix::Zero(n, n); };
        return ConnectionField("flat", n, map, true, 0.0, "n=" + std::to_string(n));
    }
    if (name == "fig1") {
        check_dim(1);
        auto map = [](const Vector&, const Vector& v) -> Matrix {
            Matrix g(1, 1);
            g(0, 0) = -(1.0 + v[0] * v[0]);
            return g;
        };
        return ConnectionField("fig1", 1, map, false, 2.0);
    }
    if (name == "scalar-linear") {
        check_dim(1);
        if (!std::isfinite(spec.lambda))
            throw std::invalid_argument("scalar-linear: lambda must be finite");
        double lambda = spec.lambda;
        ChristoffelField symbols = [lambda](const Vector&) { return ChristoffelArray{Matrix::Constant(1, 1, lambda)}; };
        return make_linear_connection(1, symbols, "scalar-linear", detail::format_param("lambda", lambda));
    }
    if (name == "power-growth") {
        check_dim(1);
        return detail::power_growth(spec.alpha, "power-growth", detail::format_param("alpha", spec.alpha));
    }
    if (name == "sphere-stereographic") {
        check_dim(2);
        return make_linear_connection(2, sphere_stereographic_christoffel, "sphere-stereographic");
    }
    if (name == "christoffel") {
        if (!spec.dimension || *spec.dimension < 1)
            throw std::invalid_argument("christoffel: a positive dimension is required");
        Index n = *spec.dimension;
        return make_linear_connection(n, polynomial_christoffel(n, spec.terms), "christoffel",
                                      std::to_string(spec.terms.size()) + " terms");
    }
    throw std::invalid_argument("unknown connection '" + name + "'");
}

inline ConnectionField gallery(const std::string& name) { return gallery(ConnectionSpec{.name = name}); }

struct GalleryEntry {
    std::string name;
    std::optional<Index> dimension; // empty when the caller chooses it
    bool linear_in_fiber;
    std::optional<double> growth_hint;
    std::string parameters;
};

/// Registry listing in a fixed order. Parameterized members show their defaults.
inline std::vector<GalleryEntry> gallery_listing()
{
    std::vector<GalleryEntry> rows;
    auto add = [&rows](const ConnectionField& c, std::string parameters) {
        rows.push_back({c.name(), c.dimension(), c.is_linear_in_fiber(), c.growth_hint(), std::move(parameters)});
    };
    add(gallery("flat"), "dimension (default 1)");
    add(gallery("fig1"), "");
    add(gallery("scalar-linear"), "lambda (default 1)");
    add(gallery("power-growth"), "alpha >= 0 (default 2); growth hint = alpha");
    add(gallery("sphere-stereographic"), "");
    add(gallery(ConnectionSpec{.name = "christoffel", .dimension = 1}), "dimension, terms (required)");
    rows.back().dimension.reset();
    rows.front().dimension.reset();
    return rows;
}

} // namespace hlift

#endif // HLIFT_CONNECTIONS_HPP
