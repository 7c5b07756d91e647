// specasym command-line front end.  Links the C API only; report files are
// deterministic for a fixed spec + seed, wall-clock timings go to a sidecar.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "specasym.h"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

int write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 1;
  }
  out << text;
  return 0;
}

struct RunOutput {
  specasym_status status = SPECASYM_OK;
  std::string base = "report";
};

int emit(specasym_report* report, specasym_status status, const std::string& out_dir,
         const std::string& base, double seconds) {
  if (report == nullptr) {
    std::cerr << "error: " << specasym_last_error() << "\n";
    return static_cast<int>(status);
  }
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  int rc = 0;
  rc |= write_file(dir / (base + "_report.json"), specasym_report_json(report));
  rc |= write_file(dir / (base + "_report.csv"), specasym_report_csv(report));
  {
    // Timings stay outside the deterministic report files.
    std::ofstream t(dir / "timings.txt", std::ios::app);
    t << base << " " << seconds << " s\n";
  }
  int failures = specasym_report_failures(report);
  if (failures > 0)
    std::cout << base << ": " << failures << " assertion(s) FAILED (see " << base
              << "_report.json)\n";
  else
    std::cout << base << ": PASS (" << seconds << " s)\n";
  specasym_report_free(report);
  if (rc != 0) return 4;
  return static_cast<int>(status);
}

std::string load_spec_with_overrides(const std::string& path, int depth, int nodes,
                                     std::string& base) {
  std::ifstream in(path);
  if (!in) return {};
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    auto j = nlohmann::ordered_json::parse(text);
    if (depth >= 0) j["depth"] = depth;
    if (nodes > 0) j["contourNodes"] = nodes;
    if (j.contains("name") && j["name"].is_string()) base = j["name"].get<std::string>();
    return j.dump(2);
  } catch (const std::exception&) {
    return text;  // let the library report the schema problem
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(specasym_version()) +
               " - sectorial projections, residue densities, and zeta/eta "
               "spectral asymmetry on flat tori"};
  app.require_subcommand(1);

  std::string spec_path, out_dir = ".", level = "quick";
  std::uint64_t seed = 42;
  int depth = -1, nodes = 0;

  CLI::App* run = app.add_subcommand("run", "evaluate an operator spec file");
  run->add_option("spec", spec_path, "operator spec (JSON)")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--depth", depth, "override the truncation depth");
  run->add_option("--nodes", nodes, "override contour node counts");

  CLI::App* verify = app.add_subcommand("verify", "run the seeded property suites");
  verify->add_option("--seed", seed, "random seed");
  verify->add_option("--level", level, "quick or full")
      ->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("--out", out_dir, "output directory");

  CLI::App* matrix = app.add_subcommand("matrix", "finite-matrix oracle on a matrix spec");
  matrix->add_option("spec", spec_path, "matrix spec (JSON)")->required();
  matrix->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  specasym_report* report = nullptr;
  specasym_status status = SPECASYM_OK;
  std::string base = "report";
  auto t0 = Clock::now();

  if (run->parsed()) {
    std::string text = load_spec_with_overrides(spec_path, depth, nodes, base);
    if (text.empty()) {
      std::cerr << "error: cannot open spec file: " << spec_path << "\n";
      return 2;
    }
    status = specasym_run_json(text.c_str(), &report);
  } else if (verify->parsed()) {
    base = "verify_" + level + "_seed" + std::to_string(seed);
    status = specasym_verify(seed, level.c_str(), &report);
  } else {
    std::string text = load_spec_with_overrides(spec_path, -1, nodes, base);
    if (text.empty()) {
      std::cerr << "error: cannot open spec file: " << spec_path << "\n";
      return 2;
    }
    // The matrix entry point re-validates the kind.
    specasym_report* probe = nullptr;
    status = specasym_matrix_file(spec_path.c_str(), &probe);
    report = probe;
  }

  double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return emit(report, status, out_dir, base, seconds);
}
