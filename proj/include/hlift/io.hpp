#ifndef HLIFT_IO_HPP
#define HLIFT_IO_HPP

#include "hlift/connections.hpp"
#include "hlift/geometry.hpp"
#include "hlift/lifting.hpp"
#include "hlift/uvb.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hlift::io {

using nlohmann::json;

class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// 17 significant digits, the format used for every emitted float.
inline std::string format_real(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Finite values become numbers, anything else null.
inline json real(double x)
{
    if (!std::isfinite(x))
        return nullptr;
    return x;
}

inline json plain_array(const Vector& v) { return std::vector<double>(v.begin(), v.end()); }

namespace detail {

inline void write_json(std::ostream& out, const json& j, int indent, int depth)
{
    auto newline = [&](int level) {
        if (indent >= 0)
            out << '\n' << std::string(static_cast<std::size_t>(indent * level), ' ');
    };
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out << "{}";
            return;
        }
        out << '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                out << ',';
            first = false;
            newline(depth + 1);
            out << json(it.key()).dump() << (indent >= 0 ? ": " : ":");
            write_json(out, it.value(), indent, depth + 1);
        }
        newline(depth);
        out << '}';
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out << "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        bool flat = std::none_of(j.begin(), j.end(), [](const json& x) { return x.is_structured(); });
        out << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i > 0)
                out << (flat && indent >= 0 ? ", " : ",");
            if (!flat)
                newline(depth + 1);
            write_json(out, j[i], indent, depth + 1);
        }
        if (!flat)
            newline(depth);
        out << ']';
        return;
    }
    case json::value_t::number_float:
        out << format_real(j.get<double>());
        return;
    default:
        out << j.dump();
        return;
    }
}

} // namespace detail

/// Serialize with floats at 17 significant digits (nlohmann's dump() prints the
/// shortest round-trip form instead). Object keys keep nlohmann's sorted order.
inline std::string dump(const json& j, int indent = 2)
{
    std::ostringstream out;
    detail::write_json(out, j, indent, 0);
    return out.str();
}

inline json real_array(const Vector& v)
{
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i)
        out.push_back(real(v[i]));
    return out;
}

inline json real_matrix(const Matrix& m)
{
    json out = json::array();
    for (Index i = 0; i < m.rows(); ++i)
        out.push_back(real_array(m.row(i).transpose()));
    return out;
}

inline Vector to_vector(const json& j, const char* what)
{
    if (!j.is_array() || j.empty())
        throw SpecError(std::string(what) + ": expected a non-empty array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw SpecError(std::string(what) + ": expected numbers");
        v[static_cast<Index>(i)] = j[i].get<double>();
    }
    if (!v.allFinite())
        throw SpecError(std::string(what) + ": non-finite entry");
    return v;
}

inline std::vector<std::string> split(std::string_view text, char sep)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = text.find(sep, start);
        parts.emplace_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos)
            return parts;
        start = pos + 1;
    }
}

inline double parse_real(const std::string& text, const char* what)
{
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(text, &used);
    } catch (const std::exception&) {
        throw SpecError(std::string(what) + ": cannot parse number '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(x))
        throw SpecError(std::string(what) + ": cannot parse number '" + text + "'");
    return x;
}

/// "1,2.5,-3" -> (1, 2.5, -3)
inline Vector parse_csv_vector(const std::string& text, const char* what = "vector")
{
    auto parts = split(text, ',');
    Vector v(static_cast<Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i)
        v[static_cast<Index>(i)] = parse_real(parts[i], what);
    return v;
}

inline json read_json_file(const std::string& filename)
{
    std::ifstream in(filename);
    if (!in)
        throw SpecError("cannot open '" + filename + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SpecError("'" + filename + "': " + e.what());
    }
}

// Paths ----------------------------------------------------------------------------

/// {"kind":"segment","from":[..],"to":[..]}
/// {"kind":"polyline","points":[[..],..],"times":[..]}   times are rescaled onto [0, 1]
/// {"kind":"circle","center":[..],"radius":r,"plane":[i,j]}
inline PathCurve path_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("kind"))
        throw SpecError("path: expected an object with a \"kind\"");
    std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "segment")
            return path_segment(ChartPoint(to_vector(j.at("from"), "path.from")),
                                ChartPoint(to_vector(j.at("to"), "path.to")));
        if (kind == "polyline") {
            std::vector<ChartPoint> points;
            for (const auto& p : j.at("points"))
                points.emplace_back(to_vector(p, "path.points"));
            std::vector<double> times;
            if (j.contains("times")) {
                Vector raw = to_vector(j.at("times"), "path.times");
                double t0 = raw[0];
                double t1 = raw[raw.size() - 1];
                if (!(t1 > t0))
                    throw SpecError("path.times must be strictly increasing");
                for (Index i = 0; i < raw.size(); ++i)
                    times.push_back(i == 0 ? 0.0 : i + 1 == raw.size() ? 1.0 : (raw[i] - t0) / (t1 - t0));
            } else {
                for (std::size_t i = 0; i < points.size(); ++i)
                    times.push_back(points.size() > 1 ? static_cast<double>(i) / static_cast<double>(points.size() - 1)
                                                      : 0.0);
            }
            return path_polyline(points, times);
        }
        if (kind == "circle") {
            Index i = 0;
            Index k = 1;
            if (j.contains("plane")) {
                const auto& plane = j.at("plane");
                if (!plane.is_array() || plane.size() != 2)
                    throw SpecError("path.plane: expected [i, j]");
                i = plane[0].get<Index>();
                k = plane[1].get<Index>();
            }
            return path_circle(ChartPoint(to_vector(j.at("center"), "path.center")), j.at("radius").get<double>(), i, k);
        }
    } catch (const json::exception& e) {
        throw SpecError(std::string("path: ") + e.what());
    } catch (const SpecError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw SpecError(e.what());
    }
    throw SpecError("path: unknown kind '" + kind + "'");
}

/// Inline paths: "segment:A:B", "polyline:P0:P1:...[@t0,t1,...]", "circle:C:r[:i,j]",
/// where points are comma-separated coordinates.
inline PathCurve parse_inline_path(const std::string& text)
{
    std::string body = text;
    std::string times_text;
    if (auto at = body.find('@'); at != std::string::npos) {
        times_text = body.substr(at + 1);
        body = body.substr(0, at);
    }
    auto parts = split(body, ':');
    const std::string& kind = parts.front();
    json j;
    if (kind == "segment") {
        if (parts.size() != 3)
            throw SpecError("inline segment: expected segment:A:B");
        j = {{"kind", "segment"}, {"from", plain_array(parse_csv_vector(parts[1]))},
             {"to", plain_array(parse_csv_vector(parts[2]))}};
    } else if (kind == "polyline") {
        if (parts.size() < 3)
            throw SpecError("inline polyline: expected at least two points");
        json points = json::array();
        for (std::size_t i = 1; i < parts.size(); ++i) {
            points.push_back(plain_array(parse_csv_vector(parts[i])));
        }
        j = {{"kind", "polyline"}, {"points", points}};
        if (!times_text.empty()) {
            j["times"] = plain_array(parse_csv_vector(times_text, "times"));
        }
    } else if (kind == "circle") {
        if (parts.size() != 3 && parts.size() != 4)
            throw SpecError("inline circle: expected circle:C:r[:i,j]");
        j = {{"kind", "circle"}, {"center", plain_array(parse_csv_vector(parts[1]))},
             {"radius", parse_real(parts[2], "radius")}};
        if (parts.size() == 4) {
            Vector plane = parse_csv_vector(parts[3], "plane");
            if (plane.size() != 2)
                throw SpecError("inline circle: plane needs two indices");
            j["plane"] = {static_cast<Index>(plane[0]), static_cast<Index>(plane[1])};
        }
    } else {
        throw SpecError("unknown inline path kind '" + kind + "'");
    }
    return path_from_json(j);
}

/// A JSON file name (ending in .json) or an inline description.
inline PathCurve load_path(const std::string& arg)
{
    if (arg.ends_with(".json"))
        return path_from_json(read_json_file(arg));
    return parse_inline_path(arg);
}

// Connections ----------------------------------------------------------------------

/// {"name":"fig1"}, {"name":"scalar-linear","lambda":1.0}, {"name":"power-growth","alpha":2.0},
/// {"name":"flat","dimension":3},
/// {"name":"christoffel","dimension":2,"terms":[{"k":0,"i":0,"j":1,"coeff":0.5,"monomial":[1,0]}, ...]}
inline ConnectionSpec connection_spec_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("name"))
        throw SpecError("connection: expected an object with a \"name\"");
    try {
        ConnectionSpec spec;
        spec.name = j.at("name").get<std::string>();
        if (j.contains("dimension"))
            spec.dimension = j.at("dimension").get<Index>();
        if (j.contains("lambda"))
            spec.lambda = j.at("lambda").get<double>();
        if (j.contains("alpha"))
            spec.alpha = j.at("alpha").get<double>();
        if (j.contains("terms")) {
            for (const auto& t : j.at("terms")) {
                PolynomialTerm term;
                term.k = t.at("k").get<Index>();
                term.i = t.at("i").get<Index>();
                term.j = t.at("j").get<Index>();
                term.coeff = t.at("coeff").get<double>();
                if (t.contains("monomial"))
                    term.monomial = t.at("monomial").get<std::vector<int>>();
                spec.terms.push_back(std::move(term));
            }
        }
        return spec;
    } catch (const json::exception& e) {
        throw SpecError(std::string("connection: ") + e.what());
    }
}

/// Inline connections: "flat[:n]", "fig1", "scalar-linear[:lambda]", "power-growth[:alpha]",
/// "sphere-stereographic".
inline ConnectionSpec parse_inline_connection(const std::string& text)
{
    auto parts = split(text, ':');
    ConnectionSpec spec;
    spec.name = parts.front();
    if (parts.size() > 2)
        throw SpecError("inline connection: too many fields in '" + text + "'");
    if (parts.size() == 2) {
        double value = parse_real(parts[1], "connection parameter");
        if (spec.name == "flat")
            spec.dimension = static_cast<Index>(value);
        else if (spec.name == "scalar-linear")
            spec.lambda = value;
        else if (spec.name == "power-growth")
            spec.alpha = value;
        else
            throw SpecError("inline connection: '" + spec.name + "' takes no parameter");
    }
    return spec;
}

inline ConnectionField load_connection(const std::string& arg)
{
    ConnectionSpec spec = arg.ends_with(".json") ? connection_spec_from_json(read_json_file(arg))
                                                 : parse_inline_connection(arg);
    try {
        return gallery(spec);
    } catch (const std::invalid_argument& e) {
        throw SpecError(e.what());
    }
}

// Emission -------------------------------------------------------------------------

/// Header t,base_0..base_{n-1},fiber_0..fiber_{n-1}; one row per sample.
inline void write_trajectory_csv(std::ostream& out, const LiftTrajectory& traj)
{
    Index n = traj.samples.empty() ? 0 : traj.samples.front().base.size();
    out << "t";
    for (Index i = 0; i < n; ++i)
        out << ",base_" << i;
    for (Index i = 0; i < n; ++i)
        out << ",fiber_" << i;
    out << '\n';
    for (const auto& s : traj.samples) {
        out << format_real(s.t);
        for (Index i = 0; i < n; ++i)
            out << ',' << format_real(s.base[i]);
        for (Index i = 0; i < n; ++i)
            out << ',' << format_real(s.fiber[i]);
        out << '\n';
    }
}

inline json trajectory_status_json(const LiftTrajectory& traj)
{
    json j;
    j["status"] = to_string(traj.status);
    if (traj.escaped()) {
        j["t_escape"] = real(traj.t_stop);
        j["norm_at_escape"] = real(traj.norm_at_stop);
    } else if (traj.status == LiftStatus::StepCollapse) {
        j["t"] = real(traj.t_stop);
        j["diagnostic"] = traj.diagnostic;
    }
    j["steps"] = traj.stats.steps;
    j["rejected_steps"] = traj.stats.rejected;
    j["max_dc_norm"] = real(traj.stats.max_derivative_norm);
    j["final_fiber"] = real_array(traj.final_fiber());
    return j;
}

inline json scan_report_json(const FiberScanReport& report)
{
    json j;
    j["point"] = real_array(report.point);
    j["weight"] = report.weight;
    j["directions"] = json::array();
    for (const auto& d : report.directions)
        j["directions"].push_back(real_array(d));
    j["radii"] = json::array();
    for (double r : report.radii)
        j["radii"].push_back(real(r));
    j["theta_min"] = json::array();
    for (const auto& row : report.theta_min) {
        json values = json::array();
        for (double x : row)
            values.push_back(real(x));
        j["theta_min"].push_back(values);
    }
    j["beta"] = json::array();
    for (double b : report.beta)
        j["beta"].push_back(real(b));
    j["verdict"] = to_string(report.verdict);
    j["epsilon"] = real(report.epsilon);
    return j;
}

/// Columns direction_index,radius,theta_min.
inline void write_scan_csv(std::ostream& out, const FiberScanReport& report)
{
    out << "direction_index,radius,theta_min\n";
    for (std::size_t d = 0; d < report.theta_min.size(); ++d)
        for (std::size_t r = 0; r < report.radii.size(); ++r)
            out << d << ',' << format_real(report.radii[r]) << ',' << format_real(report.theta_min[d][r]) << '\n';
}

} // namespace hlift::io

#endif // HLIFT_IO_HPP
