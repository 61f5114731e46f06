#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "manifest.hpp"

using namespace hamgeo;
using namespace hamgeo::cli;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

/// Runs the CLI with the given arguments, capturing stdout and stderr.
Run run_cli(const std::string& args) {
  const std::string cmd = std::string(HAMGEO_CLI) + " " + args + " 2>&1";
  Run r;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe.release());
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string manifest_path(const std::string& name) { return std::string(HAMGEO_MANIFESTS) + "/" + name; }

std::string temp_manifest(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("hamgeo_test_" + name + ".json");
  std::ofstream(path) << body;
  return path.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST(Manifest, BuiltinsParse) {
  const Manifest m = load_manifest("paper-example");
  EXPECT_EQ(m.dim, 2u);
  EXPECT_EQ(m.fields.size(), 6u);
  EXPECT_EQ(m.point("P0").point, PhasePoint({1, 0}, {1, 1}));
  EXPECT_EQ(m.run("default").steps, 10000);
  EXPECT_EQ(m.seed, kDefaultSeed);
  EXPECT_EQ(m.box.ranges, SampleBox::default_box().ranges);
  const auto reference = builtin::planar_hamiltonian();
  EXPECT_DOUBLE_EQ(evaluate(m.hamiltonian.expr, PhasePoint({0.3, 1}, {0.7, -2})),
                   evaluate(reference.expr, PhasePoint({0.3, 1}, {0.7, -2})));
  EXPECT_EQ(load_manifest("free-particle").points.size(), 2u);
}

TEST(Manifest, ShippedFilesMatchBuiltins) {
  EXPECT_EQ(load_manifest(manifest_path("paper-example.json")).source, load_manifest("paper-example").source);
  EXPECT_EQ(load_manifest(manifest_path("free-particle.json")).source, load_manifest("free-particle").source);
}

TEST(Manifest, Defaults) {
  const Manifest m = parse_manifest(Json::parse(R"({"dim": 1, "hamiltonian": "p1^2"})"));
  EXPECT_EQ(m.sample_count, kDefaultSampleCount);
  EXPECT_EQ(m.box.ranges, SampleBox::uniform(1, -1, 1, -1, 1).ranges);
  EXPECT_EQ(m.tolerances.symmetry, 1e-10);
  EXPECT_EQ(m.tolerances.scaled(10).symmetry, 1e-9);
}

TEST(Manifest, RejectsStructuralProblems) {
  const char* bad[] = {
      R"([])",
      R"({"hamiltonian": "p1"})",
      R"({"dim": 0, "hamiltonian": "p1"})",
      R"({"dim": 2, "hamiltonian": "p3"})",
      R"({"dim": 2, "hamiltonian": "p1 +"})",
      R"({"dim": 2, "hamiltonian": {"control_affine": [["1"]]}})",
      R"({"dim": 2, "hamiltonian": {"control_affine": [["p1", "0"]]}})",
      R"({"dim": 1, "hamiltonian": "p1^2", "fields": [{"name": "a", "x": ["1"], "p": ["0"]}, {"name": "a", "x": ["1"], "p": ["0"]}]})",
      R"({"dim": 1, "hamiltonian": "p1^2", "fields": [{"name": "a", "kind": "weird", "x": ["1"]}]})",
      R"({"dim": 1, "hamiltonian": "p1^2", "fields": [{"name": "a", "kind": "base", "x": ["p1"]}]})",
      R"({"dim": 1, "hamiltonian": "p1^2", "fields": [{"name": "a", "x": ["1", "2"], "p": ["0"]}]})",
      R"({"dim": 1, "hamiltonian": "p1^2", "points": [{"name": "A", "x": [0, 1], "p": [1]}]})",
      R"({"dim": 1, "hamiltonian": "p1^2", "points": [{"name": "A", "x": [0], "p": [1]}, {"name": "A", "x": [0], "p": [1]}]})",
      R"({"dim": 1, "hamiltonian": "p1^2", "runs": [{"name": "r", "start": "nowhere"}]})",
      R"({"dim": 1, "hamiltonian": "p1^2", "runs": [{"name": "r", "start": {"x": [0], "p": [1]}, "dt": -1}]})",
      R"({"dim": 1, "hamiltonian": "p1^2", "runs": [{"name": "r", "start": {"x": [0], "p": [1]}, "watch": ["H"]}]})",
      R"({"dim": 1, "hamiltonian": "p1^2", "sampling": {"box": {"x": [[1, 0]], "p": [[0, 1]]}}})",
      R"({"dim": 1, "hamiltonian": "p1^2", "sampling": {"count": 0}})",
      R"({"dim": 1, "hamiltonian": "p1^2", "tolerances": {"sloppiness": 1}})",
      R"({"dim": 1, "hamiltonian": "p1^2", "tolerances": {"symmetry": -1}})",
  };
  for (const char* text : bad) EXPECT_THROW(parse_manifest(Json::parse(text)), ManifestError) << text;
}

TEST(Manifest, ZeroStepRun) {
  try {
    parse_manifest(Json::parse(R"({"dim": 1, "hamiltonian": "p1^2", "runs": [{"name": "r", "start": {"x": [0], "p": [1]}, "steps": 0}]})"));
    FAIL() << "expected a manifest error";
  } catch (const ManifestError& e) {
    EXPECT_TRUE(contains(e.what(), "steps must be positive"));
  }
}

TEST(Manifest, UnknownNamesAreErrors) {
  const Manifest m = load_manifest("paper-example");
  EXPECT_THROW(m.field("nope"), ManifestError);
  EXPECT_THROW(m.point("nope"), ManifestError);
  EXPECT_THROW(m.run("nope"), ManifestError);
  EXPECT_THROW(load_manifest("/nonexistent/manifest.json"), ManifestError);
}

TEST(Cli, ReportPrintsConnection) {
  const auto r = run_cli("report P0");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(contains(r.out, "N_ij:\n    [-2, 2]\n    [2, -3]\n")) << r.out;
  EXPECT_TRUE(contains(r.out, "geodesic: PASS"));
}

TEST(Cli, FreeParticleReportIsZero) {
  const auto r = run_cli("--manifest free-particle report");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(contains(r.out, "N_ij:\n    [0, 0]\n    [0, 0]\n"));
  EXPECT_TRUE(contains(r.out, "[1][2][:] = [0, 0]"));
  EXPECT_FALSE(contains(r.out, "FAIL"));
}

TEST(Cli, SingularHamiltonianExitsWithRegularityError) {
  const auto r = run_cli("--manifest " + manifest_path("singular.json") + " report");
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(contains(r.out, "point A")) << r.out;
  EXPECT_TRUE(contains(r.out, "condition estimate")) << r.out;
}

TEST(Cli, SymmetryVerdicts) {
  const auto a = run_cli("symmetry p2_dx2");
  EXPECT_EQ(a.code, 0) << a.out;
  EXPECT_TRUE(contains(a.out, "infinitesimal symmetry: PASS"));
  const auto b = run_cli("symmetry rho_H");
  EXPECT_EQ(b.code, 0) << b.out;
  EXPECT_TRUE(contains(b.out, "Noether: PASS"));
  const auto c = run_cli("symmetry x1_dx1");
  EXPECT_EQ(c.code, 1);
  EXPECT_TRUE(contains(c.out, "Noether: FAIL (max |L_X omega| = 1,")) << c.out;
  const auto d = run_cli("--manifest free-particle symmetry dx1 dx2");
  EXPECT_EQ(d.code, 0) << d.out;
  EXPECT_TRUE(contains(d.out, "invariant vector field: PASS"));
}

TEST(Cli, LiftPrintsCompleteLift) {
  const auto r = run_cli("--manifest free-particle lift x1_dx1");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(contains(r.out, "d/dp1: -p1")) << r.out;
  EXPECT_TRUE(contains(r.out, "Liouville form preserved: PASS"));
}

TEST(Cli, IntegrateDefaultRun) {
  const auto r = run_cli("integrate default");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(contains(r.out, "H drift: PASS"));
  EXPECT_TRUE(contains(r.out, "conserved quantity drift: PASS"));
}

TEST(Cli, ZeroStepRunIsManifestError) {
  const auto path = temp_manifest(
      "zero", R"({"dim": 1, "hamiltonian": "p1^2", "runs": [{"name": "r", "start": {"x": [0], "p": [1]}, "steps": 0}]})");
  const auto r = run_cli("--manifest " + path + " integrate");
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(contains(r.out, "steps must be positive")) << r.out;
}

TEST(Cli, BlowUpIsReported) {
  const auto path = temp_manifest(
      "blowup",
      R"({"dim": 1, "hamiltonian": "0.5*p1^2-0.25*x1^4", "runs": [{"name": "r", "start": {"x": [1], "p": [1]}}]})");
  const auto r = run_cli("--manifest " + path + " integrate");
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.out, "status blow-up")) << r.out;
}

TEST(Cli, UsageAndNameErrors) {
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("report NOPE").code, 2);
  EXPECT_EQ(run_cli("symmetry NOPE").code, 2);
  EXPECT_EQ(run_cli("--manifest /nonexistent.json report").code, 2);
  EXPECT_EQ(run_cli("--tol-scale -1 report").code, 2);
  EXPECT_EQ(run_cli("--help").code, 0);
}

TEST(Cli, JsonReportIsDeterministic) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = (dir / "hamgeo_a.json").string(), b = (dir / "hamgeo_b.json").string();
  EXPECT_EQ(run_cli("--json " + a + " symmetry").code, 1);
  EXPECT_EQ(run_cli("--json " + b + " symmetry").code, 1);
  const std::string ja = slurp(a);
  EXPECT_FALSE(ja.empty());
  EXPECT_EQ(ja, slurp(b));

  const Json j = Json::parse(ja);
  for (const char* key : {"manifest", "conventions", "geometry", "symmetry", "trajectories", "verdicts"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["conventions"]["complete_lift_sign"], "minus");
  for (const auto& v : j["verdicts"]) EXPECT_TRUE(v.contains("tolerance")) << v.dump();
}

TEST(Cli, SeedChangesSamplesButNotVerdicts) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = (dir / "hamgeo_s1.json").string(), b = (dir / "hamgeo_s2.json").string();
  EXPECT_EQ(run_cli("--seed 1 --json " + a + " symmetry p2_dx2 rho_H").code, 0);
  EXPECT_EQ(run_cli("--seed 2 --json " + b + " symmetry p2_dx2 rho_H").code, 0);
  EXPECT_NE(slurp(a), slurp(b));
}

TEST(Cli, TolScaleTightensEveryCheck) {
  // 1e-6 of the default drift bound is below the measured H drift
  const auto r = run_cli("--tol-scale 1e-6 integrate");
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.out, "H drift: FAIL"));
}

TEST(Cli, ReportNumbersAppearInJson) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = (dir / "hamgeo_r.json").string();
  const auto r = run_cli("--json " + path + " report");
  ASSERT_EQ(r.code, 0);
  const Json j = Json::parse(slurp(path));
  const auto& g = j["geometry"][0];
  EXPECT_EQ(g["N"], Json::parse("[[-2.0, 2.0], [2.0, -3.0]]"));
  EXPECT_EQ(g["g_upper"], Json::parse("[[2.0, 1.0], [1.0, 1.0]]"));
  EXPECT_EQ(g["Phi"], Json::parse("[[-4.0, 6.0], [6.0, -9.0]]"));
  EXPECT_EQ(g["R3"][0][1], Json::parse("[2.0, -3.0]"));
}

TEST(Cli, SelftestPrintsOneLinePerCriterion) {
  const auto r = run_cli("selftest");
  int lines = 0, failures = 0;
  std::size_t pos = 0;
  while (pos < r.out.size()) {
    const std::size_t end = r.out.find('\n', pos);
    const std::string line = r.out.substr(pos, end - pos);
    if (line.rfind("PASS [", 0) == 0 || line.rfind("FAIL [", 0) == 0) ++lines;
    if (line.rfind("FAIL [", 0) == 0) ++failures;
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  EXPECT_EQ(lines, 12) << r.out;
  EXPECT_EQ(r.code, failures == 0 ? 0 : 1);
}
