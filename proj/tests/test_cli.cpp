#include "test_support.hpp"

#include "hlift/cli.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hlift;
using namespace hlift::cli;
using hlift::io::json;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() / ("hlift_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    RunConfig config(std::string connection, std::optional<std::string> path, std::vector<std::string> vectors) const
    {
        RunConfig c;
        c.connection = std::move(connection);
        c.path = std::move(path);
        c.vectors = std::move(vectors);
        c.out_dir = dir_;
        return c;
    }

    static std::string read(const fs::path& file)
    {
        std::ifstream in(file, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    // Runs the built binary; returns its exit status.
    int run(const std::string& args) const
    {
        std::string cmd = std::string(HLIFT_CLI_BINARY) + " " + args + " > " + (dir_ / "stdout.txt").string() + " 2>&1";
        int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    fs::path dir_;
};

} // namespace

TEST_F(CliTest, LiftFlatCompletes)
{
    std::ostringstream log;
    EXPECT_EQ(cmd_lift(config("flat", "segment:0,0:1,1", {"3,4"}), log), Success);
    json status = json::parse(read(dir_ / "lift_0.status.json"));
    EXPECT_EQ(status["status"], "complete");
    EXPECT_EQ(status["final_fiber"], json::parse("[3,4]"));
    std::string csv = read(dir_ / "lift_0.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,base_0,base_1,fiber_0,fiber_1");
}

TEST_F(CliTest, LiftFig1EscapesWithExitTwo)
{
    std::ostringstream log;
    EXPECT_EQ(cmd_lift(config("fig1", "segment:0:1", {"1"}), log), Escape);
    json status = json::parse(read(dir_ / "lift_0.status.json"));
    EXPECT_EQ(status["status"], "escaped");
    EXPECT_NEAR(status["t_escape"].get<double>(), 0.785398, 1e-3);
}

TEST_F(CliTest, LiftFig1FromZero)
{
    std::ostringstream log;
    RunConfig c = config("fig1", "segment:0:1", {"0"});
    c.format = "json";
    EXPECT_EQ(cmd_lift(c, log), Success);
    json doc = json::parse(read(dir_ / "lift_0.json"));
    EXPECT_NEAR(doc["final_fiber"][0].get<double>(), 1.557408, 1e-6);
    EXPECT_EQ(doc["samples"].size(), 201u);
}

TEST_F(CliTest, LiftConfigErrors)
{
    std::ostringstream log;
    EXPECT_THROW(cmd_lift(config("fig1", "segment:0:1", {}), log), io::SpecError);
    EXPECT_THROW(cmd_lift(config("fig1", "segment:0,0:1,1", {"0"}), log), io::SpecError);
    EXPECT_THROW(cmd_lift(config("fig1", "segment:0:1", {"0,1"}), log), io::SpecError);
    EXPECT_THROW(cmd_lift(config("", "segment:0:1", {"0"}), log), io::SpecError);
    RunConfig c = config("fig1", "segment:0:1", {"0"});
    c.format = "xml";
    EXPECT_THROW(cmd_lift(c, log), io::SpecError);
}

TEST_F(CliTest, TransportOutputs)
{
    std::ostringstream log;
    EXPECT_EQ(cmd_transport(config("flat", "segment:0,0:2,1", {"1,0"}), log), Success);
    json doc = json::parse(read(dir_ / "transport_0.json"));
    EXPECT_EQ(doc["vector_out"], json::parse("[1,0]"));
    EXPECT_EQ(doc["from"], json::parse("[0,0]"));
    EXPECT_EQ(doc["to"], json::parse("[2,1]"));

    EXPECT_EQ(cmd_transport(config("scalar-linear:1", "segment:0:1", {"2"}), log), Success);
    doc = json::parse(read(dir_ / "transport_0.json"));
    EXPECT_NEAR(doc["vector_out"][0].get<double>(), 2.0 * std::exp(-1.0), 1e-8);

    RunConfig c = config("fig1", "segment:0:1", {"0"});
    c.jacobian = true;
    EXPECT_EQ(cmd_transport(c, log), Success);
    doc = json::parse(read(dir_ / "transport_0.json"));
    EXPECT_NEAR(doc["jacobian"][0][0].get<double>(), 3.425519, 1e-4);

    EXPECT_EQ(cmd_transport(config("fig1", "segment:0:1", {"0.7"}), log), Escape);
    doc = json::parse(read(dir_ / "transport_0.json"));
    EXPECT_EQ(doc["status"], "escaped");
    EXPECT_FALSE(doc.contains("vector_out"));
}

TEST_F(CliTest, UvbScanVerdicts)
{
    std::ostringstream log;
    EXPECT_EQ(cmd_uvb_scan(config("flat", std::nullopt, {}), log), Success);
    RunConfig fig1 = config("fig1", std::nullopt, {});
    fig1.format = "json";
    EXPECT_EQ(cmd_uvb_scan(fig1, log), NotUvb);
    EXPECT_EQ(json::parse(read(dir_ / "scan_0.json"))["verdict"], "NotUVB");
    EXPECT_EQ(cmd_uvb_scan(config("power-growth:1", std::nullopt, {}), log), Success);

    RunConfig loose = config("fig1", std::nullopt, {});
    loose.radii = {1, 2, 4, 8, 16};
    EXPECT_EQ(cmd_uvb_scan(loose, log), Inconclusive);
}

TEST_F(CliTest, UvbScanPointsFromPath)
{
    std::ostringstream log;
    RunConfig c = config("sphere-stereographic", "segment:0,0:1,0", {});
    EXPECT_EQ(cmd_uvb_scan(c, log), Success);
    EXPECT_TRUE(fs::exists(dir_ / "scan_2.csv"));
    EXPECT_EQ(read(dir_ / "scan_1.csv").substr(0, 33), "direction_index,radius,theta_min\n");
}

TEST_F(CliTest, Figure1Defaults)
{
    std::ostringstream log;
    RunConfig c;
    c.out_dir = dir_;
    Figure1Summary summary;
    EXPECT_EQ(cmd_figure1(c, log, &summary), Success);
    ASSERT_TRUE(summary.v_star.has_value());
    EXPECT_NEAR(*summary.v_star, 1.0 / std::tan(1.0), 1e-3);
    EXPECT_EQ(summary.interior_curves, 0u); // poles are pi apart; the unit segment is too short

    json doc = json::parse(read(dir_ / "figure1_summary.json"));
    EXPECT_NEAR(doc["v_star_target"].get<double>(), 0.642093, 1e-6);

    // Curve for v0 = 0 ends at tanh(tan 1); v0 = 2 saturates before its pole.
    std::istringstream csv(read(dir_ / "figure1.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "curve,t,fiber,tanh_fiber,family");
    double last_zero_tanh = 0.0;
    double max_two_tanh = 0.0;
    double max_two_t = 0.0;
    while (std::getline(csv, line)) {
        auto f = io::split(line, ',');
        int curve = std::stoi(f[0]);
        double t = std::stod(f[1]);
        double tanh_fiber = std::stod(f[3]);
        if (curve == 4) { // seeds -2, -1.5, ..., so index 4 is v0 = 0
            EXPECT_EQ(f[4], "from_p_complete");
            last_zero_tanh = tanh_fiber;
        }
        if (curve == 8) { // v0 = 2
            EXPECT_EQ(f[4], "from_p_escaped");
            if (tanh_fiber > max_two_tanh) {
                max_two_tanh = tanh_fiber;
                max_two_t = t;
            }
        }
    }
    EXPECT_NEAR(last_zero_tanh, std::tanh(std::tan(1.0)), 1e-8);
    EXPECT_GT(max_two_tanh, 0.999);
    EXPECT_LT(max_two_t, std::numbers::pi / 2 - std::atan(2.0));
}

TEST_F(CliTest, Figure1LongPathHasInteriorCurvesAndNoThreshold)
{
    std::ostringstream log;
    RunConfig c;
    c.out_dir = dir_;
    c.path = "segment:0:4";
    c.grid_step = 1.0 / 64;
    Figure1Summary summary;
    EXPECT_EQ(cmd_figure1(c, log, &summary), Success);
    EXPECT_GT(summary.interior_curves, 0u);
    EXPECT_FALSE(summary.v_star.has_value()); // no lift from p reaches q
    EXPECT_FALSE(summary.target.has_value());
    std::string csv = read(dir_ / "figure1.csv");
    EXPECT_NE(csv.find(",interior\n"), std::string::npos);
    EXPECT_EQ(csv.find(",from_p_complete\n"), std::string::npos);
}

TEST_F(CliTest, Figure1BracketHalvesWithGrid)
{
    ConnectionField conn = gallery("fig1");
    PathCurve path = path_segment(ChartPoint{0.0}, ChartPoint{1.0});
    double cot1 = 1.0 / std::tan(1.0);
    for (double step : {1.0 / 64, 1.0 / 128, 1.0 / 256, 1.0 / 512}) {
        Figure1Summary s = measure_threshold(conn, path, step, {});
        ASSERT_TRUE(s.v_star.has_value());
        EXPECT_DOUBLE_EQ(*s.bracket_high - *s.bracket_low, step);
        EXPECT_LE(*s.bracket_low, cot1);
        EXPECT_GE(*s.bracket_high, cot1);
        EXPECT_LE(std::abs(*s.v_star - cot1), step / 2);
    }
}

TEST_F(CliTest, GalleryListing)
{
    std::ostringstream out;
    EXPECT_EQ(cmd_gallery(out), Success);
    std::string text = out.str();
    EXPECT_NE(text.find("fig1\t1\tfalse\t2\t"), std::string::npos);
    EXPECT_NE(text.find("flat\tany\ttrue\t0\t"), std::string::npos);
    EXPECT_NE(text.find("sphere-stereographic\t2\ttrue\t1\t"), std::string::npos);
}

TEST_F(CliTest, BinaryExitCodes)
{
    std::string out = "--out " + dir_.string();
    EXPECT_EQ(run("lift --connection flat --path segment:0,0:1,1 --v 3,4 " + out), 0);
    EXPECT_EQ(run("lift --connection fig1 --path segment:0:1 --v 1 " + out), 2);
    EXPECT_EQ(run("lift --connection fig1 --path segment:0:1 --v 0 --v 1 " + out), 2);
    EXPECT_EQ(run("lift --connection nope --path segment:0:1 --v 0 " + out), 1);
    EXPECT_EQ(run("lift --connection fig1 --path segment:0:1 --v 0,0 " + out), 1);
    EXPECT_EQ(run("lift --connection fig1 --path missing.json --v 0 " + out), 1);
    EXPECT_EQ(run("lift --bogus-flag"), 1);
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("transport --connection fig1 --path segment:0:1 --v 0.7 " + out), 2);
    EXPECT_EQ(run("uvb-scan --connection flat " + out), 0);
    EXPECT_EQ(run("uvb-scan --connection fig1 " + out), 3);
    EXPECT_EQ(run("uvb-scan --connection fig1 --radii 1,2,4,8 " + out), 4);
    EXPECT_EQ(run("uvb-scan --connection power-growth:1 " + out), 0);
    EXPECT_EQ(run("uvb-scan --connection fig1 --weight bogus " + out), 1);
    EXPECT_EQ(run("gallery list"), 0);
    std::string listing = read(dir_ / "stdout.txt");
    EXPECT_NE(listing.find("fig1"), std::string::npos);
}

TEST_F(CliTest, BinaryAcceptsJsonSpecs)
{
    {
        std::ofstream(dir_ / "conn.json") << R"({"name":"scalar-linear","lambda":1.0})";
        std::ofstream(dir_ / "path.json") << R"({"kind":"segment","from":[0],"to":[1]})";
    }
    std::string args = "transport --connection " + (dir_ / "conn.json").string() + " --path " + (dir_ / "path.json").string()
                       + " --v 2 --out " + dir_.string();
    EXPECT_EQ(run(args), 0);
    json doc = json::parse(read(dir_ / "transport_0.json"));
    EXPECT_NEAR(doc["vector_out"][0].get<double>(), 0.735759, 1e-6);
}
