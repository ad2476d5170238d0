#include <catch_amalgamated.hpp>

#include "cli.hpp"
#include "gcsim/waveform_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gcsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int status = -1;
    std::string out;
    std::string err;
};

Outcome gcsim_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    Outcome o;
    o.status = cli::run_command(args, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gcsim_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream f(p);
    return nlohmann::json::parse(f);
}

}  // namespace

TEST_CASE("run with defaults writes waveform and report", "[cli]") {
    const fs::path dir = scratch("run");
    const auto r = gcsim_cli({"run", "--output-dir", dir.string(), "--plot-data"});
    REQUIRE(r.status == cli::ok);
    CHECK(fs::exists(dir / "waveform.csv"));
    CHECK(fs::exists(dir / "fig5.csv"));
    CHECK(fs::exists(dir / "fig6.csv"));
    const auto report = read_json(dir / "report.json");
    CHECK(report["command"] == "run");
    CHECK(report["acceptance"]["failed"] == 0);
    CHECK(report["acceptance"]["passed"] == 4);
    for (const auto& m : report["metrics"]) {
        CHECK(report["windows"].contains(m["window"].get<std::string>()));
    }
    // the echoed configuration is itself a valid config file
    write_file(dir / "echo.ini", report["config"].get<std::string>());
    const auto again = gcsim_cli({"analyze", (dir / "waveform.csv").string(), "--config",
                                  (dir / "echo.ini").string()});
    REQUIRE(again.status == cli::ok);
    const auto j = nlohmann::json::parse(again.out);
    CHECK(j["metrics"][0]["name"] == "i_ac_rms");
    CHECK(j["metrics"][0]["value"].get<double>() == report["metrics"][0]["value"].get<double>());
}

TEST_CASE("analyze rejects a truncated waveform", "[cli]") {
    const fs::path dir = scratch("truncated");
    REQUIRE(gcsim_cli({"run", "--output-dir", dir.string(), "--decimation", "10"}).status == cli::ok);
    std::ifstream in(dir / "waveform.csv");
    std::ofstream cut(dir / "cut.csv");
    std::string line;
    for (int k = 0; k < 300 && std::getline(in, line); ++k) cut << line << "\n";
    cut.close();
    const auto r = gcsim_cli({"analyze", (dir / "cut.csv").string()});
    CHECK(r.status == cli::analysis_error);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("each failure class has its own exit status", "[cli]") {
    const fs::path dir = scratch("errors");
    CHECK(gcsim_cli({}).status == cli::usage_error);
    CHECK(gcsim_cli({"frobnicate"}).status == cli::usage_error);
    CHECK(gcsim_cli({"run", "--decimation", "0"}).status == cli::usage_error);

    write_file(dir / "bad.ini", "[cvsr]\nh_gap = -1\n");
    auto r = gcsim_cli({"run", "--config", (dir / "bad.ini").string(), "-o", dir.string()});
    CHECK(r.status == cli::config_error);
    CHECK(r.err.find("cvsr.h_gap") != std::string::npos);

    r = gcsim_cli({"run", "--config", (dir / "missing.ini").string()});
    CHECK(r.status == cli::io_error);

    write_file(dir / "file", "x");
    r = gcsim_cli({"run", "-o", (dir / "file" / "sub").string()});
    CHECK(r.status == cli::io_error);

    r = gcsim_cli({"calibrate", "--target", "60"});
    CHECK(r.status == cli::calibration_error);

    write_file(dir / "unstable.ini", "[solver]\nnewton_max_iter = 1\nnewton_tol = 1e-15\n");
    r = gcsim_cli({"run", "--config", (dir / "unstable.ini").string(), "-o", dir.string()});
    CHECK(r.status == cli::solver_error);

    r = gcsim_cli({"analyze", (dir / "nothing.csv").string()});
    CHECK(r.status == cli::io_error);

    const auto help = gcsim_cli({"--help"});
    CHECK(help.status == cli::ok);
}

TEST_CASE("calibrate and sweep report their results", "[cli]") {
    auto r = gcsim_cli({"calibrate"});
    REQUIRE(r.status == cli::ok);
    const std::string f = r.out.substr(r.out.find('=') + 1);
    CHECK_THAT(std::stod(f), Catch::Matchers::WithinRel(3.906, 1e-2));
    // ac RMS is nearly flat in the fringing factor here, so check the current itself
    const fs::path dir = scratch("calibrate");
    write_file(dir / "cal.ini", "[cvsr]\nfringing_factor =" + f);
    const auto run = gcsim_cli({"run", "-c", (dir / "cal.ini").string(), "-o", dir.string()});
    REQUIRE(run.status == cli::ok);
    CHECK_THAT(read_json(dir / "report.json")["metrics"][0]["value"].get<double>(),
               Catch::Matchers::WithinRel(21.2, 1e-4));

    r = gcsim_cli({"sweep", "--step", "0.5", "--max", "10"});
    REQUIRE(r.status == cli::ok);
    CHECK(r.out == "critical_dc = 4 A\n");
}

TEST_CASE("tuned gains keep the converter step within limits", "[cli][slow]") {
    const fs::path dir = scratch("tune");
    const auto tuned = gcsim_cli({"tune-pi"});
    REQUIRE(tuned.status == cli::ok);
    const std::string body = tuned.out.substr(tuned.out.find("[source]"));
    write_file(dir / "run.ini", body + "\n[scenario]\nsource = converter\ndc_setpoint = 5\n");
    const auto run = gcsim_cli({"run", "-c", (dir / "run.ini").string(), "-o", dir.string()});
    REQUIRE(run.status == cli::ok);
    const auto report = read_json(dir / "report.json");
    double overshoot = -1.0;
    for (const auto& m : report["metrics"]) {
        if (m["name"] == "dc_step_overshoot") overshoot = m["value"].get<double>();
    }
    CHECK(overshoot >= 0.0);
    CHECK(overshoot <= 0.25);
}
