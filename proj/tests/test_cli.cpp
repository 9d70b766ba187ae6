#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "gblab/cli/run.hpp"

using namespace gblab;
using namespace gblab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
    static const fs::path p = [] {
        const auto d = fs::temp_directory_path() / "gblab_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return p;
}

/// Points the output root at the scratch directory for the test's lifetime.
struct OutputRoot {
    OutputRoot() { setenv(output_root_env, scratch_root().c_str(), 1); }
    ~OutputRoot() { unsetenv(output_root_env); }
};

std::string write_config(const std::string& name, const nlohmann::json& j) {
    const auto p = scratch_root() / (name + ".json");
    std::ofstream(p) << j.dump(2);
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int run_binary(const std::string& args, std::string* out = nullptr) {
    const std::string cmd = "GBLAB_OUTPUT_ROOT='" + scratch_root().string() + "' '" GBLAB_CLI_PATH "' " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string text;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) text += buf;
    const int status = pclose(pipe);
    if (out) *out = text;
    return WEXITSTATUS(status);
}

const nlohmann::json small_xray{{"experiment", "xray"}, {"phantom", "gauss"}, {"n_angles", 48}, {"n_offsets", 65}, {"image", 32}};

bool has_code(const std::vector<Diagnostic>& d, const std::string& level, const std::string& code) {
    for (const auto& x : d)
        if (x.level == level && x.code == code) return true;
    return false;
}

} // namespace

TEST(Config, StrictParse) {
    EXPECT_THROW(config_from_json({{"experiment", "xray"}, {"colour", 1}}), ConfigError);
    EXPECT_THROW(config_from_json({{"experiment", "xray"}, {"nodes", "many"}}), ConfigError);
    EXPECT_THROW(config_from_json({{"phantom", "disk"}}), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::array()), ConfigError);
    EXPECT_THROW(config_from_json({{"experiment", "xray"}, {"assert", 3}}), ConfigError);
}

TEST(Config, EchoRoundTrip) {
    const auto c = config_from_json({{"experiment", "sweep"}, {"target", "quasimode"}, {"h_values", {0.1, 0.05}}, {"seed", 9}});
    const auto j = to_json(c);
    EXPECT_EQ(to_json(config_from_json(j)), j);
    EXPECT_EQ(j["seed"], 9);
    EXPECT_EQ(c.h_list().size(), 2u);
}

TEST(Validate, CflAboveLimitIsError) {
    auto c = config_from_json({{"experiment", "wave"}, {"cfl", 0.9}, {"T", 4.0}});
    EXPECT_TRUE(has_code(validate(c), "error", "cfl"));
}

TEST(Validate, ShortTimeWarnsWithTravelTime) {
    // unit ball, alpha = 1: T_alpha is the diameter 2
    const auto d = validate(config_from_json({{"experiment", "wave"}, {"domain", "unit_ball:2"}, {"alpha", "constant"}, {"T", 1.0}}));
    EXPECT_TRUE(has_code(d, "warning", "time"));
    const auto ok = validate(config_from_json({{"experiment", "wave"}, {"domain", "interval"}, {"T", 2.5}}));
    EXPECT_FALSE(has_code(ok, "warning", "time"));
    const auto warn = validate(config_from_json({{"experiment", "observability"}, {"domain", "interval"}, {"T", 1.9}}));
    EXPECT_TRUE(has_code(warn, "warning", "time"));
}

TEST(Validate, ValidConfigsHaveNoDiagnostics) {
    for (const auto& j : {nlohmann::json{{"experiment", "observability"}, {"alpha", "weierstrass"}, {"T", 4.0}},
                          nlohmann::json{{"experiment", "xray"}, {"phantom", "random:4"}},
                          nlohmann::json{{"experiment", "beam"}, {"metric", "conformal:random:3"}, {"domain", "rectangle:2"}},
                          nlohmann::json{{"experiment", "sweep"}, {"h_values", {0.1, 0.05}}}})
        EXPECT_TRUE(validate(config_from_json(j)).empty()) << j.dump();
}

TEST(Validate, ResolutionRangesAndFixtures) {
    const double h = 1.0 / 64;
    EXPECT_TRUE(has_code(validate(config_from_json({{"experiment", "superpose"}, {"h", h}, {"spacing", 0.02}})), "error", "resolution"));
    EXPECT_FALSE(has_code(validate(config_from_json({{"experiment", "superpose"}, {"h", h}, {"spacing", 0.015}})), "error", "resolution"));
    EXPECT_TRUE(has_code(validate(config_from_json({{"experiment", "beam"}, {"h", 2.0}})), "error", "range"));
    EXPECT_TRUE(has_code(validate(config_from_json({{"experiment", "beam"}, {"epsilon", 1.0}})), "error", "range"));
    EXPECT_TRUE(has_code(validate(config_from_json({{"experiment", "sweep"}, {"h_values", {0.1}}})), "error", "range"));
    EXPECT_TRUE(has_code(validate(config_from_json({{"experiment", "trace"}, {"metric", "klein-bottle"}})), "error", "fixture"));
    EXPECT_TRUE(has_code(validate(config_from_json({{"experiment", "xray"}, {"phantom", "cat"}})), "error", "fixture"));
    EXPECT_TRUE(has_code(validate(config_from_json({{"experiment", "teleport"}})), "error", "experiment"));
    EXPECT_TRUE(has_code(validate(config_from_json({{"experiment", "observability"}, {"domain", "rectangle:2"}})), "error", "fixture"));
    EXPECT_TRUE(has_code(validate(config_from_json({{"experiment", "sweep"}, {"target", "nope"}, {"h_values", {0.1, 0.05}}})),
                         "error", "target"));
}

TEST(Assertions, Operators) {
    const nlohmann::json m{{"a", 1.0}, {"b", -2.0}};
    const auto r = evaluate_assertions({{"a_max", 1.0}, {"a_gt", 1.0}, {"b_range", {-3, -1}}, {"b_lt", -2.5}, {"a_min", 0.5}}, m);
    ASSERT_EQ(r.size(), 5u);
    std::map<std::string, bool> got;
    for (const auto& c : r) got[c.name] = c.passed;
    EXPECT_TRUE(got["a_max"]);
    EXPECT_FALSE(got["a_gt"]);
    EXPECT_TRUE(got["b_range"]);
    EXPECT_FALSE(got["b_lt"]);
    EXPECT_TRUE(got["a_min"]);
    EXPECT_THROW(evaluate_assertions({{"c_max", 1.0}}, m), ConfigError);
    EXPECT_THROW(evaluate_assertions({{"a", 1.0}}, m), ConfigError);
    EXPECT_THROW(evaluate_assertions({{"a_range", 1.0}}, m), ConfigError);
}

TEST(Run, XrayManifestListsEveryOutput) {
    OutputRoot root;
    auto j = small_xray;
    j["output"] = "xray_manifest";
    j["assert"] = {{"roundtrip_error_max", 0.2}};
    const auto m = run(config_from_json(j));
    EXPECT_EQ(m.exit_code, exit_pass) << m.error;
    const fs::path dir = scratch_root() / "xray_manifest";
    EXPECT_EQ(fs::path(m.directory), dir);
    std::set<std::string> listed(m.outputs.begin(), m.outputs.end());
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().filename() == "manifest.json") continue;
        EXPECT_TRUE(listed.count(e.path().filename().string())) << e.path();
    }
    for (const auto& f : {"sinogram.csv", "sinogram.svg", "reconstruction.svg", "roundtrip.json"}) EXPECT_TRUE(listed.count(f)) << f;
    const auto man = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(man["status"], "pass");
    EXPECT_EQ(man["code_version"], code_version);
    EXPECT_EQ(man["checks"].size(), 1u);
    EXPECT_TRUE(man["checks"][0]["passed"].get<bool>());
    EXPECT_EQ(config_from_json(man["config"]).phantom, "gauss");
    EXPECT_EQ(slurp(dir / "sinogram.svg").rfind("<svg", 0), 0u);
}

TEST(Run, EchoedConfigReproducesOutputs) {
    OutputRoot root;
    auto j = small_xray;
    j["output"] = "echo_a";
    const auto a = run(config_from_json(j));
    auto echoed = a.config;
    echoed["output"] = "echo_b";
    const auto b = run(config_from_json(echoed));
    ASSERT_EQ(a.outputs, b.outputs);
    for (const auto& f : a.outputs) EXPECT_EQ(slurp(scratch_root() / "echo_a" / f), slurp(scratch_root() / "echo_b" / f)) << f;
}

TEST(Run, SerialAndParallelSweepsAgreeBitwise) {
    OutputRoot root;
    nlohmann::json j{{"experiment", "sweep"}, {"target", "beam-residual"}, {"metric", "stretch:0.25"}, {"z", {0.0}},
                     {"h_values", {1.0 / 16, 1.0 / 32, 1.0 / 64}}, {"T", 0.2}, {"serial", true}, {"output", "sweep_serial"}};
    const auto s = run(config_from_json(j));
    j["serial"] = false;
    j["output"] = "sweep_parallel";
    const auto p = run(config_from_json(j));
    ASSERT_EQ(s.exit_code, exit_pass) << s.error;
    for (const auto& f : s.outputs) EXPECT_EQ(slurp(scratch_root() / "sweep_serial" / f), slurp(scratch_root() / "sweep_parallel" / f)) << f;
    EXPECT_GT(s.metrics["slope"].get<double>(), 1.0);
}

TEST(Run, FailuresStillWriteManifest) {
    OutputRoot root;
    const auto bad_fixture = run(config_from_json({{"experiment", "trace"}, {"metric", "nowhere"}, {"output", "fail_cfg"}}));
    EXPECT_EQ(bad_fixture.exit_code, exit_config);
    EXPECT_TRUE(fs::exists(scratch_root() / "fail_cfg" / "manifest.json"));

    const auto numeric = run(config_from_json(
        {{"experiment", "beam"}, {"metric", "stretch:-1"}, {"z", {0.999}}, {"T", 2.0}, {"output", "fail_num"}}));
    EXPECT_EQ(numeric.exit_code, exit_numerical);
    const auto man = nlohmann::json::parse(slurp(scratch_root() / "fail_num" / "manifest.json"));
    EXPECT_EQ(man["status"], "numerical_failure");
    EXPECT_FALSE(man["error"].get<std::string>().empty());

    auto j = small_xray;
    j["output"] = "fail_assert";
    j["assert"] = {{"roundtrip_error_max", 1e-9}};
    const auto as = run(config_from_json(j));
    EXPECT_EQ(as.exit_code, exit_assertion);
    EXPECT_FALSE(as.checks.front().passed);

    const auto p = scratch_root() / "garbled.json";
    std::ofstream(p) << "{ not json";
    const auto g = run_file(p.string());
    EXPECT_EQ(g.exit_code, exit_config);
    EXPECT_TRUE(fs::exists(scratch_root() / "garbled" / "manifest.json"));
}

TEST(Run, ExperimentsProduceTheirArtifacts) {
    OutputRoot root;
    const std::vector<std::pair<nlohmann::json, std::vector<std::string>>> cases{
        {{{"experiment", "trace"}, {"domain", "unit_ball:2"}, {"z", {-1.0, 0.0}}, {"T", 3.0}}, {"ray.csv", "ray.svg"}},
        {{{"experiment", "beam"}, {"T", 0.5}}, {"beam.jsonl", "beam.svg"}},
        {{{"experiment", "superpose"}, {"h", 1.0 / 64}, {"T", 0.2}, {"dt", 2e-3}, {"operator", "modified"}}, {"normal.csv", "normal.svg"}},
        {{{"experiment", "wave"}, {"nodes", 64}, {"T", 0.5}}, {"trace.csv", "energy.csv", "energy.svg"}},
        {{{"experiment", "observability"}, {"nodes", 100}, {"ensemble", 4}, {"T", 2.5}}, {"report.json", "ratio_vs_k.svg"}}};
    int i = 0;
    for (auto [j, files] : cases) {
        j["output"] = "art" + std::to_string(i++);
        const auto m = run(config_from_json(j));
        EXPECT_EQ(m.exit_code, exit_pass) << j.dump() << " " << m.error;
        for (const auto& f : files) EXPECT_TRUE(fs::exists(fs::path(m.directory) / f)) << f;
    }
    const auto obs = nlohmann::json::parse(slurp(scratch_root() / "art4" / "report.json"));
    EXPECT_GT(obs["min_ratio"].get<double>(), 0.0);
    EXPECT_TRUE(obs["time_condition"].get<bool>());
}

TEST(Binary, ExitCodes) {
    std::string out;
    EXPECT_EQ(run_binary("list-fixtures", &out), 0);
    EXPECT_NE(out.find("weierstrass"), std::string::npos);
    EXPECT_NE(out.find("shepp-like-smooth"), std::string::npos);

    auto j = small_xray;
    j["output"] = "bin_ok";
    EXPECT_EQ(run_binary("run --serial '" + write_config("bin_ok", j) + "'"), 0);
    EXPECT_TRUE(fs::exists(scratch_root() / "bin_ok" / "manifest.json"));

    j["output"] = "bin_assert";
    j["assert"] = {{"roundtrip_error_max", 1e-9}};
    EXPECT_EQ(run_binary("run '" + write_config("bin_assert", j) + "'"), 1);

    EXPECT_EQ(run_binary("run '" + write_config("bin_cfg", {{"experiment", "wave"}, {"cfl", 0.9}, {"output", "bin_cfg"}}) + "'"), 2);
    EXPECT_EQ(run_binary("validate '" + write_config("bin_val", {{"experiment", "wave"}, {"cfl", 0.9}}) + "'", &out), 2);
    EXPECT_NE(out.find("cfl"), std::string::npos);
    EXPECT_EQ(run_binary("validate '" + write_config("bin_ok2", {{"experiment", "wave"}, {"T", 3.0}}) + "'", &out), 0);
    EXPECT_NE(out.find("[]"), std::string::npos);

    EXPECT_EQ(run_binary("run '" + write_config("bin_num", {{"experiment", "beam"}, {"metric", "stretch:-1"}, {"z", {0.999}},
                                                            {"T", 2.0}, {"output", "bin_num"}}) + "'"),
              3);
    EXPECT_EQ(run_binary("run"), 2);
    EXPECT_EQ(run_binary("frobnicate"), 2);
}

TEST(Svg, LinePlotAndHeatmap) {
    const auto p = scratch_root() / "plot.svg";
    write_line_plot(p.string(), "t", {{"a", {1, 2, 4}, {1, 4, 16}}, {"b", {1, 2}, {0.0, -1.0}}}, true, true);
    const std::string s = slurp(p);
    EXPECT_EQ(s.rfind("<svg", 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n') > 5, true);
    EXPECT_NE(s.find("polyline"), std::string::npos);
    const auto q = scratch_root() / "heat.svg";
    write_heatmap(q.string(), "h", {0, 1, 2, 3, 4, 5}, 2, 3);
    const std::string h = slurp(q);
    std::size_t rects = 0;
    for (std::size_t pos = 0; (pos = h.find("<rect", pos)) != std::string::npos; ++pos) ++rects;
    EXPECT_EQ(rects, 6u);
    EXPECT_NE(h.find("rgb(255,255,255)"), std::string::npos);
    EXPECT_THROW(write_heatmap(q.string(), "h", {0, 1}, 2, 3), ParameterError);
}
