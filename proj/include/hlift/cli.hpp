#ifndef HLIFT_CLI_HPP
#define HLIFT_CLI_HPP

#include "hlift/connections.hpp"
#include "hlift/geometry.hpp"
#include "hlift/io.hpp"
#include "hlift/lifting.hpp"
#include "hlift/uvb.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hlift::cli {

enum ExitCode : int { Success = 0, ConfigError = 1, Escape = 2, NotUvb = 3, Inconclusive = 4 };

struct RunConfig {
    std::string connection; // gallery name, inline spec or .json file
    std::optional<std::string> path;
    std::vector<std::string> vectors;
    IntegratorOptions integrator;
    std::filesystem::path out_dir = ".";
    std::string format = "csv";

    // transport
    bool jacobian = false;

    // uvb-scan
    std::string weight = "normalized";
    double epsilon = 1e-3;
    std::vector<std::string> points;
    std::vector<double> radii;

    // figure1
    double grid_step = 1.0 / 1024.0;
    std::vector<double> display_seeds;
};

namespace detail {

inline void write_text(const std::filesystem::path& file, const std::string& text)
{
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw io::SpecError("cannot write '" + file.string() + "'");
    out << text;
}

inline void prepare(const RunConfig& config)
{
    if (config.format != "csv" && config.format != "json")
        throw io::SpecError("--format must be csv or json");
    config.integrator.validate();
    std::filesystem::create_directories(config.out_dir);
}

/// The connection plus the path it is used with. A flat connection without an explicit
/// dimension takes the dimension of the path, or of the first --v vector.
struct Setup {
    ConnectionField conn;
    PathCurve path;
};

inline PathCurve resolve_path(const RunConfig& config, const ConnectionField& conn);

inline Setup resolve(const RunConfig& config, const char* default_connection = nullptr)
{
    std::string text = config.connection.empty() && default_connection ? default_connection : config.connection;
    if (text.empty())
        throw io::SpecError("--connection is required");
    ConnectionSpec spec = text.ends_with(".json") ? io::connection_spec_from_json(io::read_json_file(text))
                                                  : io::parse_inline_connection(text);
    if (spec.name == "flat" && !spec.dimension) {
        if (config.path)
            spec.dimension = io::load_path(*config.path).dimension();
        else if (!config.vectors.empty())
            spec.dimension = io::parse_csv_vector(config.vectors.front(), "--v").size();
    }
    std::optional<ConnectionField> conn;
    try {
        conn = gallery(spec);
    } catch (const std::invalid_argument& e) {
        throw io::SpecError(e.what());
    }
    PathCurve path = resolve_path(config, *conn);
    return {std::move(*conn), std::move(path)};
}

inline PathCurve resolve_path(const RunConfig& config, const ConnectionField& conn)
{
    PathCurve path = config.path ? io::load_path(*config.path)
                                 : path_segment(ChartPoint(Vector::Zero(conn.dimension())),
                                                ChartPoint(Vector::Ones(conn.dimension())));
    if (path.dimension() != conn.dimension())
        throw io::SpecError("path dimension " + std::to_string(path.dimension()) + " does not match connection dimension "
                            + std::to_string(conn.dimension()));
    return path;
}

inline std::vector<Vector> resolve_vectors(const RunConfig& config, Index n)
{
    if (config.vectors.empty())
        throw io::SpecError("at least one --v vector is required");
    std::vector<Vector> out;
    for (const auto& text : config.vectors) {
        Vector v = io::parse_csv_vector(text, "--v");
        if (v.size() != n)
            throw io::SpecError("--v '" + text + "' has dimension " + std::to_string(v.size()) + ", expected "
                                + std::to_string(n));
        out.push_back(std::move(v));
    }
    return out;
}

inline FiberWeight resolve_weight(const std::string& name)
{
    if (name == "normalized")
        return FiberWeight::normalized();
    if (name == "euclidean")
        return FiberWeight::euclidean();
    throw io::SpecError("--weight must be euclidean or normalized");
}

inline io::json samples_json(const LiftTrajectory& traj)
{
    io::json rows = io::json::array();
    for (const auto& s : traj.samples)
        rows.push_back({{"t", io::real(s.t)}, {"base", io::real_array(s.base)}, {"fiber", io::real_array(s.fiber)}});
    return rows;
}

} // namespace detail

/// One trajectory file and one status file per initial vector:
/// lift_<k>.csv + lift_<k>.status.json, or lift_<k>.json holding both.
inline int cmd_lift(const RunConfig& config, std::ostream& log)
{
    detail::prepare(config);
    auto [conn, path] = detail::resolve(config);
    std::vector<Vector> vectors = detail::resolve_vectors(config, conn.dimension());

    int code = Success;
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        LiftTrajectory traj = horizontal_lift(conn, path, vectors[k], config.integrator);
        io::json status = io::trajectory_status_json(traj);
        std::string stem = "lift_" + std::to_string(k);
        if (config.format == "csv") {
            std::ostringstream csv;
            io::write_trajectory_csv(csv, traj);
            detail::write_text(config.out_dir / (stem + ".csv"), csv.str());
            detail::write_text(config.out_dir / (stem + ".status.json"), io::dump(status) + "\n");
        } else {
            io::json doc = status;
            doc["samples"] = detail::samples_json(traj);
            detail::write_text(config.out_dir / (stem + ".json"), io::dump(doc) + "\n");
        }
        log << stem << ' ' << io::dump(status, -1) << '\n';
        if (!traj.complete())
            code = Escape;
    }
    return code;
}

/// transport_<k>.json per initial vector: {from, to, vector_in, vector_out[, jacobian]}
/// or an escape report.
inline int cmd_transport(const RunConfig& config, std::ostream& log)
{
    detail::prepare(config);
    auto [conn, path] = detail::resolve(config);
    std::vector<Vector> vectors = detail::resolve_vectors(config, conn.dimension());

    int code = Success;
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        io::json doc;
        doc["from"] = io::real_array(path.position(0.0));
        doc["to"] = io::real_array(path.position(1.0));
        doc["vector_in"] = io::real_array(vectors[k]);
        try {
            TangentVector result = parallel_transport(conn, path, vectors[k], config.integrator);
            doc["status"] = "complete";
            doc["vector_out"] = io::real_array(result.vec);
            if (config.jacobian)
                doc["jacobian"] = io::real_matrix(transport_jacobian(conn, path, vectors[k], std::nullopt, config.integrator));
        } catch (const TransportEscaped& e) {
            doc["status"] = to_string(e.status());
            doc["t_escape"] = io::real(e.t_escape());
            code = Escape;
        }
        std::string stem = "transport_" + std::to_string(k);
        detail::write_text(config.out_dir / (stem + ".json"), io::dump(doc) + "\n");
        log << stem << ' ' << io::dump(doc, -1) << '\n';
    }
    return code;
}

/// Scan each base point; the overall verdict is NotUVB if any point says so, UVB if
/// all do, else Inconclusive. Base points default to the path's start, middle and end,
/// or the origin without a path.
inline int cmd_uvb_scan(const RunConfig& config, std::ostream& log)
{
    detail::prepare(config);
    auto [conn, path] = detail::resolve(config);
    FiberWeight weight = detail::resolve_weight(config.weight);
    if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon))
        throw io::SpecError("--eps must be positive");

    std::vector<Vector> points;
    for (const auto& text : config.points) {
        Vector p = io::parse_csv_vector(text, "--point");
        if (p.size() != conn.dimension())
            throw io::SpecError("--point '" + text + "' has the wrong dimension");
        points.push_back(std::move(p));
    }
    if (points.empty()) {
        if (config.path) {
            points = {path.position(0.0), path.position(0.5), path.position(1.0)};
        } else {
            points.push_back(Vector::Zero(conn.dimension()));
        }
    }

    ClassifierThresholds thresholds;
    thresholds.epsilon = config.epsilon;
    bool any_not_uvb = false;
    bool all_uvb = true;
    for (std::size_t k = 0; k < points.size(); ++k) {
        FiberScanReport report = fiber_scan(conn, ChartPoint(points[k]), {}, config.radii, weight, thresholds);
        std::string stem = "scan_" + std::to_string(k);
        if (config.format == "csv") {
            std::ostringstream csv;
            io::write_scan_csv(csv, report);
            detail::write_text(config.out_dir / (stem + ".csv"), csv.str());
        } else {
            detail::write_text(config.out_dir / (stem + ".json"), io::dump(io::scan_report_json(report)) + "\n");
        }
        log << stem << " point=" << io::dump(io::real_array(report.point), -1) << " verdict=" << to_string(report.verdict)
            << '\n';
        any_not_uvb = any_not_uvb || report.verdict == Verdict::NotUVB;
        all_uvb = all_uvb && report.verdict == Verdict::UVB;
    }
    Verdict overall = any_not_uvb ? Verdict::NotUVB : all_uvb ? Verdict::UVB : Verdict::Inconclusive;
    log << "verdict " << to_string(overall) << '\n';
    switch (overall) {
    case Verdict::UVB:
        return Success;
    case Verdict::NotUVB:
        return NotUvb;
    case Verdict::Inconclusive:
        break;
    }
    return Inconclusive;
}

struct Figure1Summary {
    std::optional<double> v_star;
    std::optional<double> bracket_low;  // largest completing grid value
    std::optional<double> bracket_high; // smallest escaping grid value
    std::optional<double> target;
    std::size_t curves = 0;
    std::size_t interior_curves = 0;
};

namespace detail {

struct FigureCurve {
    std::vector<double> t;
    std::vector<double> fiber;
    std::string family;
};

inline bool completes(const ConnectionField& conn, const PathCurve& path, double v0, const IntegratorOptions& opts)
{
    return horizontal_lift(conn, path, Vector::Constant(1, v0), opts).complete();
}

} // namespace detail

/// Completion threshold over the grid v = -8 + k step on [-8, 8], by bisection over
/// grid indices. Completion is monotone in v0 for one-dimensional lifts with upward
/// escape; if the grid ends do not bracket a change, no threshold is reported.
inline Figure1Summary measure_threshold(const ConnectionField& conn, const PathCurve& path, double grid_step,
                                        const IntegratorOptions& opts)
{
    if (!(grid_step > 0.0) || !std::isfinite(grid_step))
        throw io::SpecError("--grid must be positive");
    constexpr double lo_value = -8.0;
    constexpr double hi_value = 8.0;
    long long hi = static_cast<long long>(std::floor((hi_value - lo_value) / grid_step));
    long long lo = 0;
    auto value = [&](long long k) { return lo_value + static_cast<double>(k) * grid_step; };

    Figure1Summary summary;
    if (!detail::completes(conn, path, value(lo), opts) || detail::completes(conn, path, value(hi), opts))
        return summary;
    while (hi - lo > 1) {
        long long mid = lo + (hi - lo) / 2;
        if (detail::completes(conn, path, value(mid), opts))
            lo = mid;
        else
            hi = mid;
    }
    summary.bracket_low = value(lo);
    summary.bracket_high = value(hi);
    summary.v_star = 0.5 * (value(lo) + value(hi));
    return summary;
}

/// Figure-data CSV (curve,t,fiber,tanh_fiber,family) plus figure1_summary.json.
/// Families: from_p_complete / from_p_escaped for lifts seeded at t = 0; interior for
/// seeds (t0, c0) whose lifts escape in both directions before reaching either end.
inline int cmd_figure1(const RunConfig& config, std::ostream& log, Figure1Summary* result = nullptr)
{
    detail::prepare(config);
    RunConfig effective = config;
    if (!effective.path)
        effective.path = "segment:0:1";
    auto [conn, path] = detail::resolve(effective, "fig1");
    if (conn.dimension() != 1)
        throw io::SpecError("figure1 needs a one-dimensional connection");
    const IntegratorOptions& opts = config.integrator;

    std::vector<detail::FigureCurve> curves;
    std::vector<double> seeds = config.display_seeds;
    if (seeds.empty())
        for (int k = -4; k <= 10; ++k)
            seeds.push_back(0.5 * k);
    for (double v0 : seeds) {
        LiftTrajectory traj = horizontal_lift(conn, path, Vector::Constant(1, v0), opts);
        detail::FigureCurve curve;
        curve.family = traj.complete() ? "from_p_complete" : "from_p_escaped";
        for (const auto& s : traj.samples) {
            curve.t.push_back(s.t);
            curve.fiber.push_back(s.fiber[0]);
        }
        curves.push_back(std::move(curve));
    }

    Figure1Summary summary = measure_threshold(conn, path, config.grid_step, opts);
    summary.curves = seeds.size();
    for (double t0 : {0.25, 0.5, 0.75}) {
        for (double c0 : {-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0}) {
            Vector seed = Vector::Constant(1, c0);
            RawTrajectory forward = lift_between(conn, path, t0, 1.0, seed, opts);
            RawTrajectory backward = lift_between(conn, path, t0, 0.0, seed, opts);
            if (forward.status == LiftStatus::Complete || backward.status == LiftStatus::Complete)
                continue;
            detail::FigureCurve curve;
            curve.family = "interior";
            for (std::size_t i = backward.t.size(); i-- > 1;) {
                curve.t.push_back(backward.t[i]);
                curve.fiber.push_back(backward.y[i][0]);
            }
            for (std::size_t i = 0; i < forward.t.size(); ++i) {
                curve.t.push_back(forward.t[i]);
                curve.fiber.push_back(forward.y[i][0]);
            }
            curves.push_back(std::move(curve));
            ++summary.interior_curves;
            ++summary.curves;
        }
    }

    if (path.kind() == PathKind::Segment && conn.name() == "fig1") {
        double length = path.position(1.0)[0] - path.position(0.0)[0];
        if (length > 0.0 && length < std::numbers::pi)
            summary.target = 1.0 / std::tan(length);
    }

    std::ostringstream csv;
    csv << "curve,t,fiber,tanh_fiber,family\n";
    for (std::size_t c = 0; c < curves.size(); ++c)
        for (std::size_t i = 0; i < curves[c].t.size(); ++i)
            csv << c << ',' << io::format_real(curves[c].t[i]) << ',' << io::format_real(curves[c].fiber[i]) << ','
                << io::format_real(std::tanh(curves[c].fiber[i])) << ',' << curves[c].family << '\n';
    detail::write_text(config.out_dir / "figure1.csv", csv.str());

    auto optional_real = [](const std::optional<double>& x) { return x ? io::real(*x) : io::json(nullptr); };
    io::json doc;
    doc["connection"] = conn.name();
    doc["grid_step"] = io::real(config.grid_step);
    doc["v_star"] = optional_real(summary.v_star);
    doc["bracket"] = {optional_real(summary.bracket_low), optional_real(summary.bracket_high)};
    doc["v_star_target"] = optional_real(summary.target);
    doc["curves"] = summary.curves;
    doc["interior_curves"] = summary.interior_curves;
    detail::write_text(config.out_dir / "figure1_summary.json", io::dump(doc) + "\n");
    log << "figure1 " << io::dump(doc, -1) << '\n';
    if (result)
        *result = summary;
    return Success;
}

/// Gallery table: name, dimension, linear_in_fiber, growth_hint, parameters.
inline int cmd_gallery(std::ostream& out)
{
    out << "name\tdimension\tlinear_in_fiber\tgrowth_hint\tparameters\n";
    for (const auto& row : gallery_listing()) {
        out << row.name << '\t' << (row.dimension ? std::to_string(*row.dimension) : std::string("any")) << '\t'
            << (row.linear_in_fiber ? "true" : "false") << '\t'
            << (row.growth_hint ? io::format_real(*row.growth_hint) : std::string("-")) << '\t' << row.parameters
            << '\n';
    }
    return Success;
}

} // namespace hlift::cli

#endif // HLIFT_CLI_HPP
