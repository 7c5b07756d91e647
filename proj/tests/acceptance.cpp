// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Criteria pin the quantitative tolerances of the engine's spectral-asymmetry
// identities at desk scale.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "core/report.hpp"
#include "core/verify.hpp"

using namespace spa;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Criterion> g_results;

void record(int id, bool pass, const std::string& detail) {
  g_results.push_back({id, pass, detail});
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Worst measured / tolerance over suite results tagged with the criterion.
struct TaggedWorst {
  double measured = 0;
  double tolerance = 0;
  bool all_pass = true;
  int count = 0;
};

TaggedWorst worst_for(const VerifyReport& rep, int criterion) {
  TaggedWorst w;
  for (const auto& r : rep.results) {
    if (r.criterion != criterion) continue;
    ++w.count;
    w.all_pass = w.all_pass && r.pass;
    if (w.tolerance == 0 || r.measured / std::max(r.tolerance, 1e-300) >
                                w.measured / std::max(w.tolerance, 1e-300)) {
      w.measured = r.measured;
      w.tolerance = r.tolerance;
    }
  }
  return w;
}

std::string fmt(const TaggedWorst& w) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max %.3le (tol %.0le, %d checks)", w.measured, w.tolerance,
                w.count);
  return buf;
}

}  // namespace

int main() {
  EngineConfig cfg;
  const std::uint64_t seed = 42;

  // Matrix-kernel criteria 1-3 (criterion 1 carries a 10 s budget).
  {
    auto t0 = Clock::now();
    VerifyReport rep = run_suite("matrix-kernel", seed, cfg);
    double dt = seconds_since(t0);
    TaggedWorst c1 = worst_for(rep, 1);
    record(1, c1.all_pass && c1.count > 0 && dt < 10.0,
           fmt(c1) + ", " + std::to_string(dt) + " s (< 10 s)");
    TaggedWorst c2 = worst_for(rep, 2);
    record(2, c2.all_pass && c2.count == 3, fmt(c2));
    TaggedWorst c3 = worst_for(rep, 3);
    record(3, c3.all_pass && c3.count > 0, fmt(c3));
  }

  // Symbol idempotence battery, criterion 4 (5 minute budget).
  {
    auto t0 = Clock::now();
    VerifyReport rep = run_suite("sectorial-projection", seed, cfg);
    double dt = seconds_since(t0);
    TaggedWorst c4 = worst_for(rep, 4);
    record(4, c4.all_pass && c4.count > 0 && dt < 300.0,
           fmt(c4) + ", " + std::to_string(dt) + " s (< 300 s)");
  }

  // Resolvent parity, criterion 5.
  {
    VerifyReport rep = run_suite("resolvent-parametrix", seed, cfg);
    TaggedWorst c5 = worst_for(rep, 5);
    record(5, c5.all_pass && c5.count > 0, fmt(c5));
  }

  // Residue criteria 6-9 and 12.
  {
    VerifyReport rep = run_suite("residue-asymmetry", seed, cfg);
    for (int id : {6, 7, 8, 9, 12}) {
      TaggedWorst c = worst_for(rep, id);
      record(id, c.all_pass && c.count > 0, fmt(c));
    }
  }

  // Dirac criteria 10-11.
  {
    VerifyReport rep = run_suite("dirac-geometry", seed, cfg);
    for (int id : {10, 11}) {
      TaggedWorst c = worst_for(rep, id);
      record(id, c.all_pass && c.count > 0, fmt(c));
    }
  }

  // Criterion 13: reproducibility and wall-clock budgets.
  {
    auto tq = Clock::now();
    ExperimentReport quick = verify_report(seed, "quick", cfg);
    double dt_quick = seconds_since(tq);
    auto tf = Clock::now();
    ExperimentReport full1 = verify_report(seed, "full", cfg);
    double dt_full = seconds_since(tf);
    ExperimentReport full2 = verify_report(seed, "full", cfg);
    bool identical = full1.to_json() == full2.to_json() && full1.to_csv() == full2.to_csv();
    bool ok = identical && quick.failures() == 0 && full1.failures() == 0 && dt_quick < 60.0 &&
              dt_full < 900.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "byte-identical %s, quick %.1f s (< 60), full %.1f s (< 900)",
                  identical ? "yes" : "NO", dt_quick, dt_full);
    record(13, ok, buf);
  }

  int failed = 0;
  for (const auto& c : g_results)
    if (!c.pass) ++failed;
  std::printf("acceptance: %d/%zu criteria pass\n", static_cast<int>(g_results.size()) - failed,
              g_results.size());
  return failed == 0 ? 0 : 1;
}
