#include "isoflow/run.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace isoflow;
namespace fs = std::filesystem;

namespace {

RunConfig load(const std::string& name) {
    std::ifstream in(fs::path(ISOFLOW_CONFIG_DIR) / name);
    std::stringstream text;
    text << in.rdbuf();
    auto r = parse_config(text.str());
    REQUIRE(r.config);
    return *r.config;
}

std::map<std::string, std::string> summary_map(const RunReport& r) {
    return {r.summary.begin(), r.summary.end()};
}

const Artifact* find(const RunReport& r, const std::string& name) {
    for (const auto& a : r.artifacts)
        if (a.filename == name) return &a;
    return nullptr;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("isoflow_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("ball heat-flow run") {
    const auto report = run_experiment(load("ball_heat_flow.cfg"));
    const auto s = summary_map(report);
    CHECK(s.at("spread_max") == "0");
    CHECK(report.passed());
    const auto* flux = find(report, "flux.csv");
    REQUIRE(flux);
    CHECK(flux->contents.rfind("t,flux_x0\n", 0) == 0);
}

TEST_CASE("perturbed heat-flow run records a nonconstant verdict and passes") {
    const auto report = run_experiment(load("perturbed_heat_flow.cfg"));
    CHECK(report.passed());
    CHECK(report.checks.at(0).name == "nonconstant_flux");
    REQUIRE(find(report, "flux_outer.csv"));
    CHECK(find(report, "flux_outer.csv")->contents.rfind("t,phi_index,flux\n", 0) == 0);
    CHECK(find(report, "field.csv")->contents.rfind("r,phi,value\n", 0) == 0);
}

TEST_CASE("annulus exit-time run lists both derivatives") {
    const auto report = run_experiment(load("annulus_exit_time.cfg"));
    const auto s = summary_map(report);
    CHECK(std::stod(s.at("flux_inner")) == doctest::Approx(0.582).epsilon(1e-3));
    CHECK(std::stod(s.at("flux_outer")) == doctest::Approx(0.459).epsilon(1e-3));
    CHECK(std::abs(std::stod(s.at("flux_inner")) - oracle::kAnnulusInnerFlux) < 1e-4);
    CHECK(report.passed());
    CHECK(s.count("serrin_deviation") == 1);
    CHECK(s.count("argmax_r") == 1);
}

TEST_CASE("expectation mismatch fails the run") {
    auto c = load("annulus_soul.cfg");
    c.experiment.expect = Expectation::Constant;
    CHECK_FALSE(run_experiment(c).passed());
    c = load("perturbed_heat_flow.cfg");
    c.experiment.expect = Expectation::Constant;
    CHECK_FALSE(run_experiment(c).passed());
}

TEST_CASE("every shipped config passes") {
    for (const auto& entry : fs::directory_iterator(ISOFLOW_CONFIG_DIR)) {
        auto c = load(entry.path().filename().string());
        if (!c.numeric.sweep.empty()) continue;
        CAPTURE(entry.path().filename().string());
        const auto report = run_experiment(c);
        for (const auto& chk : report.checks) {
            CAPTURE(chk.name);
            CAPTURE(chk.detail);
            CHECK(chk.passed);
        }
    }
}

TEST_CASE("output is deterministic") {
    auto c = load("cap_heat_flow.cfg");
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    write_report(run_experiment(c), a);
    write_report(run_experiment(c), b);
    for (const auto& entry : fs::directory_iterator(a)) {
        std::ifstream fa(entry.path(), std::ios::binary), fb(b / entry.path().filename(), std::ios::binary);
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        CHECK(sa.str() == sb.str());
    }
}

TEST_CASE("run writes summary and artifacts, sweep fans out") {
    auto c = load("ball_sweep.cfg");
    c.output_dir = scratch("sweep").string();
    std::ostringstream log;
    CHECK(run(c, log) == 0);
    for (int k : {0, 1, 2}) {
        const auto dir = fs::path(c.output_dir) / ("refine_" + std::to_string(k));
        CHECK(fs::exists(dir / "summary.txt"));
        CHECK(fs::exists(dir / "exit_time.csv"));
    }
    std::ifstream top(fs::path(c.output_dir) / "summary.txt");
    std::stringstream text;
    text << top.rdbuf();
    CHECK(text.str().find("run.refine_2 = pass") != std::string::npos);
    CHECK(text.str().find("status = pass") != std::string::npos);
}

TEST_CASE("failed checks and solver errors give nonzero status") {
    auto c = load("annulus_soul.cfg");
    c.experiment.expect = Expectation::Constant;
    c.output_dir = scratch("fail").string();
    std::ostringstream log;
    CHECK(run(c, log) == 1);

    auto bad = load("ball_heat_flow.cfg");
    bad.numeric.dt = 10.0;  // violates the accuracy guard
    bad.numeric.T = 10.0;
    bad.output_dir = scratch("error").string();
    CHECK(run(bad, log) == 2);
    CHECK(log.str().find("error:") != std::string::npos);
}

TEST_CASE("summary text is stable key = value lines") {
    const auto text = run_experiment(load("clifford_soul.cfg")).summary_text();
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) CHECK(line.find(" = ") != std::string::npos);
    CHECK(text.find("status = pass") != std::string::npos);
}
