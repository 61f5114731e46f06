// hamgeo: pointwise Hamiltonian geometry and symmetry checks from a manifest.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace hamgeo;
  using namespace hamgeo::cli;

  CLI::App app{"Hamiltonian geometry on the cotangent bundle"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string manifest_ref = "paper-example";
  std::string json_path;
  std::uint64_t seed = 0;
  Settings settings;
  app.add_option("--manifest", manifest_ref, "manifest file, or built-in 'paper-example' / 'free-particle'");
  auto* seed_opt = app.add_option("--seed", seed, "sampling seed (overrides the manifest)");
  app.add_option("--tol-scale", settings.tol_scale, "multiplier applied to every tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--json", json_path, "write the machine-readable report here ('-' for stdout)");

  std::vector<std::string> points, fields, lift_fields, runs;
  auto* report = app.add_subcommand("report", "geometry at named points (default: all)");
  report->add_option("points", points);
  auto* symmetry = app.add_subcommand("symmetry", "symmetry notions for named fields over the sample set");
  symmetry->add_option("fields", fields);
  auto* lift = app.add_subcommand("lift", "complete or Newtonoid lifts of named fields");
  lift->add_option("fields", lift_fields);
  auto* integrate = app.add_subcommand("integrate", "RK4 runs with drift tables");
  integrate->add_option("runs", runs);
  auto* selftest = app.add_subcommand("selftest", "built-in acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kManifestError;
  }
  if (*seed_opt) settings.seed = seed;

  Report r;
  try {
    if (selftest->parsed()) {
      r.manifest = Json{{"name", "selftest"}};
      r.conventions = Json{{"complete_lift_sign", to_string(LiftSign::minus)}, {"tolerance_scale", settings.tol_scale}};
      cmd_selftest(settings, r);
    } else {
      const Manifest m = load_manifest(manifest_ref);
      r.manifest = m.source;
      r.conventions = conventions(m, settings);
      if (report->parsed()) cmd_report(m, points, settings, r);
      if (symmetry->parsed()) cmd_symmetry(m, fields, settings, r);
      if (lift->parsed()) cmd_lift(m, lift_fields, settings, r);
      if (integrate->parsed()) cmd_integrate(m, runs, settings, r);
    }
  } catch (const ManifestError& e) {
    std::cerr << "manifest error: " << e.what() << "\n";
    return kManifestError;
  } catch (const PointRegularityError& e) {
    std::cerr << "regularity error: " << e.what() << "\n";
    return kRegularityError;
  } catch (const RegularityError& e) {
    std::cerr << "regularity error: " << e.what() << "\n";
    return kRegularityError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kManifestError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailure;
  }

  std::fwrite(r.text.data(), 1, r.text.size(), stdout);
  if (!json_path.empty()) {
    const std::string dumped = r.to_json().dump(2) + "\n";
    if (json_path == "-") {
      std::fwrite(dumped.data(), 1, dumped.size(), stdout);
    } else {
      std::ofstream out(json_path, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot write " << json_path << "\n";
        return kManifestError;
      }
      out << dumped;
    }
  }
  return r.failed ? kCheckFailure : kPass;
}
