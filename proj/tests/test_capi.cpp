#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "specasym.h"

namespace {

const char* kMatrixSpec = R"({
  "name": "sign",
  "kind": "matrix",
  "matrix": { "dim": 2, "entries": [1, 0, 0, -1] },
  "cutPairs": [ {"theta": 1.5707963267948966, "thetaPrime": 4.71238898038469} ]
})";

const char* kDiracSpec = R"({
  "name": "plain-dirac",
  "kind": "dirac",
  "dirac": { "n": 2 },
  "kList": [2]
})";

}  // namespace

TEST_CASE("version string is exposed") {
  CHECK(std::string(specasym_version()).find("specasym") == 0);
}

TEST_CASE("matrix spec runs through the C surface") {
  specasym_report* rep = nullptr;
  specasym_status st = specasym_run_json(kMatrixSpec, &rep);
  REQUIRE(st == SPECASYM_OK);
  REQUIRE(rep != nullptr);
  CHECK(specasym_report_failures(rep) == 0);
  std::string json = specasym_report_json(rep);
  CHECK(json.find("\"clusters\"") != std::string::npos);
  CHECK(json.find("\"pass\": true") != std::string::npos);
  std::string csv = specasym_report_csv(rep);
  CHECK(csv.find("module,property,measured,tolerance,pass") == 0);
  specasym_report_free(rep);
}

TEST_CASE("dirac spec emits the asymmetry CSV contract") {
  specasym_report* rep = nullptr;
  REQUIRE(specasym_run_json(kDiracSpec, &rep) == SPECASYM_OK);
  std::string csv = specasym_report_csv(rep);
  CHECK(csv.find("operator,theta,thetaPrime,k,re(gap),im(gap),re(resPk),im(resPk),depth,tol") ==
        0);
  CHECK(csv.find("plain-dirac") != std::string::npos);
  specasym_report_free(rep);
}

TEST_CASE("schema errors surface with status 2 and a message") {
  specasym_report* rep = nullptr;
  CHECK(specasym_run_json("{ not json", &rep) == SPECASYM_SCHEMA_ERROR);
  CHECK(rep == nullptr);
  CHECK(std::strlen(specasym_last_error()) > 0);

  CHECK(specasym_run_json(R"({"kind": "mystery"})", &rep) == SPECASYM_SCHEMA_ERROR);
  CHECK(specasym_matrix_file("/nonexistent/path.json", &rep) == SPECASYM_SCHEMA_ERROR);
}

TEST_CASE("computation errors carry the module condition") {
  // sigma_3 xi_1 is not elliptic; the power expansion must refuse.
  const char* bad = R"({
    "name": "degenerate",
    "kind": "symbolic",
    "torusDim": 2,
    "fiberDim": 2,
    "symbol": { "order": 1, "components": [
      { "degree": 1, "terms": [
        {"xFrequency": [0,0], "xiExponents": [1,0], "xiNormPower": 0,
         "coefficient": [[{"re":1},{"re":0}],[{"re":0},{"re":-1}]]} ] } ] },
    "cutPairs": [ {"theta": 0.7853981633974483, "thetaPrime": 2.356194490192345} ],
    "kList": [1]
  })";
  specasym_report* rep = nullptr;
  specasym_status st = specasym_run_json(bad, &rep);
  CHECK(st == SPECASYM_COMPUTATION_ERROR);
  CHECK(std::string(specasym_last_error()).find("NotElliptic") != std::string::npos);
}

TEST_CASE("matrix entry point rejects non-matrix specs") {
  specasym_report* rep = nullptr;
  CHECK(specasym_run_json(kDiracSpec, &rep) == SPECASYM_OK);
  specasym_report_free(rep);

  std::string path = "capi_dirac_tmp.json";
  {
    std::ofstream out(path);
    out << kDiracSpec;
  }
  specasym_report* rejected = nullptr;
  CHECK(specasym_matrix_file(path.c_str(), &rejected) == SPECASYM_SCHEMA_ERROR);
  CHECK(rejected == nullptr);
  std::remove(path.c_str());
}

TEST_CASE("verify quick through the C surface is deterministic") {
  specasym_report* a = nullptr;
  specasym_report* b = nullptr;
  REQUIRE(specasym_verify(7, "quick", &a) == SPECASYM_OK);
  REQUIRE(specasym_verify(7, "quick", &b) == SPECASYM_OK);
  CHECK(std::string(specasym_report_json(a)) == specasym_report_json(b));
  CHECK(std::string(specasym_report_csv(a)) == specasym_report_csv(b));
  specasym_report_free(a);
  specasym_report_free(b);

  specasym_report* bad = nullptr;
  CHECK(specasym_verify(7, "bogus", &bad) == SPECASYM_SCHEMA_ERROR);
}
