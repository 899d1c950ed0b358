#include "hlift/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_shared(CLI::App* cmd, hlift::cli::RunConfig& config)
{
    cmd->add_option("--connection", config.connection, "gallery name (flat[:n], fig1, scalar-linear[:lambda], "
                                                       "power-growth[:alpha], sphere-stereographic) or a .json spec");
    cmd->add_option("--path", config.path, "segment:A:B | polyline:P0:P1:..[@t0,..] | circle:C:r[:i,j] | file.json");
    cmd->add_option("--v", config.vectors, "initial vector as comma-separated floats (repeatable)");
    cmd->add_option("--rtol", config.integrator.rtol, "relative tolerance")->capture_default_str();
    cmd->add_option("--atol", config.integrator.atol, "absolute tolerance")->capture_default_str();
    cmd->add_option("--escape-norm", config.integrator.escape_norm, "escape threshold on |c|")->capture_default_str();
    cmd->add_option("--out", config.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--format", config.format, "csv or json")->capture_default_str();
    cmd->add_option("--weight", config.weight, "euclidean or normalized")->capture_default_str();
    cmd->add_option("--eps", config.epsilon, "UVB angle threshold in radians")->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    using namespace hlift::cli;

    CLI::App app{"Horizontal lifts, parallel transport and UVB scans for general connections"};
    app.require_subcommand(1);
    RunConfig config;

    auto* lift = app.add_subcommand("lift", "integrate horizontal lifts; exit 2 if any escapes");
    add_shared(lift, config);

    auto* transport = app.add_subcommand("transport", "parallel transport to the far fiber");
    add_shared(transport, config);
    transport->add_flag("--jacobian", config.jacobian, "add the finite-difference transport Jacobian");

    auto* scan = app.add_subcommand("uvb-scan", "principal-angle fiber scan; exit 0 UVB, 3 NotUVB, 4 Inconclusive");
    add_shared(scan, config);
    scan->add_option("--point", config.points, "base point (repeatable); default path start/middle/end");
    scan->add_option("--radii", config.radii, "fiber radii (default 2^0..2^20)")->delimiter(',');

    auto* figure = app.add_subcommand("figure1", "figure data for lifts that escape to infinity");
    add_shared(figure, config);
    figure->add_option("--grid", config.grid_step, "v0 grid spacing for the completion threshold")
        ->capture_default_str();
    figure->add_option("--seeds", config.display_seeds, "v0 values of the emitted curves")->delimiter(',');

    auto* gallery = app.add_subcommand("gallery", "list the built-in connections");
    gallery->add_subcommand("list", "print the registry")->required(false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? Success : ConfigError;
    }

    try {
        if (*lift)
            return cmd_lift(config, std::cout);
        if (*transport)
            return cmd_transport(config, std::cout);
        if (*scan)
            return cmd_uvb_scan(config, std::cout);
        if (*figure)
            return cmd_figure1(config, std::cout);
        if (*gallery)
            return cmd_gallery(std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ConfigError;
    }
    return ConfigError;
}
