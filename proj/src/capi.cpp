#include "specasym.h"

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>

#include "core/errors.hpp"
#include "core/report.hpp"

struct specasym_report {
  spa::ExperimentReport report;
  std::string json_text;
  std::string csv_text;
};

namespace {

thread_local std::string g_last_error;

specasym_status status_of(const spa::Error& e) {
  switch (e.code()) {
    case spa::ErrorCode::SchemaError:
      return SPECASYM_SCHEMA_ERROR;
    default:
      return SPECASYM_COMPUTATION_ERROR;
  }
}

specasym_report* wrap(spa::ExperimentReport&& rep) {
  auto* out = new specasym_report{std::move(rep), {}, {}};
  out->json_text = out->report.to_json();
  out->csv_text = out->report.to_csv();
  return out;
}

template <typename Fn>
specasym_status guarded(specasym_report** out, Fn&& fn) {
  if (out == nullptr) {
    g_last_error = "output handle must not be null";
    return SPECASYM_SCHEMA_ERROR;
  }
  *out = nullptr;
  g_last_error.clear();
  try {
    spa::ExperimentReport rep = fn();
    specasym_report* handle = wrap(std::move(rep));
    *out = handle;
    return handle->report.failures() > 0 ? SPECASYM_ASSERTION_FAILURE : SPECASYM_OK;
  } catch (const spa::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPECASYM_COMPUTATION_ERROR;
  }
}

spa::Json echo_of(const std::string& text) { return spa::Json::parse(text); }

spa::ExperimentReport run_text(const std::string& text, bool matrix_only) {
  spa::OperatorSpec spec = spa::parse_spec(text);
  if (matrix_only && spec.kind != "matrix")
    spa::fail(spa::ErrorCode::SchemaError, "the matrix entry point needs a matrix-kind spec");
  spa::ExperimentReport rep = spa::run_spec(spec);
  rep.spec_echo = echo_of(text);
  return rep;
}

std::string slurp(const char* path) {
  if (path == nullptr) spa::fail(spa::ErrorCode::SchemaError, "spec path must not be null");
  std::ifstream in(path);
  if (!in) spa::fail(spa::ErrorCode::SchemaError, std::string("cannot open spec file: ") + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

extern "C" {

specasym_status specasym_run_file(const char* spec_path, specasym_report** out) {
  return guarded(out, [&] { return run_text(slurp(spec_path), false); });
}

specasym_status specasym_run_json(const char* spec_json, specasym_report** out) {
  return guarded(out, [&] {
    if (spec_json == nullptr)
      spa::fail(spa::ErrorCode::SchemaError, "spec JSON must not be null");
    return run_text(spec_json, false);
  });
}

specasym_status specasym_verify(uint64_t seed, const char* level, specasym_report** out) {
  return guarded(out, [&] {
    std::string lv = level ? level : "quick";
    spa::EngineConfig cfg;
    return spa::verify_report(seed, lv, cfg);
  });
}

specasym_status specasym_matrix_file(const char* spec_path, specasym_report** out) {
  return guarded(out, [&] { return run_text(slurp(spec_path), true); });
}

const char* specasym_report_json(const specasym_report* report) {
  return report ? report->json_text.c_str() : "";
}

const char* specasym_report_csv(const specasym_report* report) {
  return report ? report->csv_text.c_str() : "";
}

int specasym_report_failures(const specasym_report* report) {
  return report ? report->report.failures() : -1;
}

void specasym_report_free(specasym_report* report) { delete report; }

const char* specasym_last_error(void) { return g_last_error.c_str(); }

const char* specasym_version(void) { return spa::kEngineVersion; }

}  // extern "C"
