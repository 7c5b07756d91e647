/*
 * specasym - spectral asymmetry engine for classical pseudodifferential
 * operators on flat tori.
 *
 * C interface of the shared library.  All heavy objects live behind the
 * opaque report handle; strings returned by accessor functions stay valid
 * until the report is freed.
 */
#ifndef SPECASYM_H
#define SPECASYM_H

#include <stdint.h>

#ifndef SPECASYM_API
#if defined(_WIN32)
#define SPECASYM_API __declspec(dllexport)
#else
#define SPECASYM_API __attribute__((visibility("default")))
#endif
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  SPECASYM_OK = 0,
  /* The computation ran, but at least one requested assertion failed;
     a report handle is still produced. */
  SPECASYM_ASSERTION_FAILURE = 1,
  /* Malformed spec file / JSON / arguments; no report. */
  SPECASYM_SCHEMA_ERROR = 2,
  /* A module raised a computational error (NotElliptic, PoleOnContour, ...);
     no report.  specasym_last_error() names the module condition. */
  SPECASYM_COMPUTATION_ERROR = 3
} specasym_status;

typedef struct specasym_report specasym_report;

/* Run an operator-spec file (kinds: symbolic, dirac, matrix). */
SPECASYM_API specasym_status specasym_run_file(const char* spec_path, specasym_report** out);

/* Same, but the spec JSON is passed directly. */
SPECASYM_API specasym_status specasym_run_json(const char* spec_json, specasym_report** out);

/* Run the seeded verification suite; level is "quick" or "full". */
SPECASYM_API specasym_status specasym_verify(uint64_t seed, const char* level, specasym_report** out);

/* Run a matrix-kind spec through the finite-dimensional oracle alone;
   fails with SPECASYM_SCHEMA_ERROR if the spec is not of matrix kind. */
SPECASYM_API specasym_status specasym_matrix_file(const char* spec_path, specasym_report** out);

/* Deterministic JSON / CSV renderings of a report. */
SPECASYM_API const char* specasym_report_json(const specasym_report* report);
SPECASYM_API const char* specasym_report_csv(const specasym_report* report);

/* Number of failed assertions recorded in the report. */
SPECASYM_API int specasym_report_failures(const specasym_report* report);

SPECASYM_API void specasym_report_free(specasym_report* report);

/* Message for the most recent error on this thread ("" when none). */
SPECASYM_API const char* specasym_last_error(void);

SPECASYM_API const char* specasym_version(void);

#ifdef __cplusplus
}
#endif

#endif /* SPECASYM_H */
