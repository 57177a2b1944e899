/* qptlab — C interface to the q-pushTASEP / q-Whittaker verification library.
 *
 * Usage pattern:
 *
 *   qpt_lab* lab = NULL;
 *   qpt_lab_create(&lab);
 *   qpt_lab_configure(lab, "{\"seed\": 7, \"threads\": 4}");
 *   qpt_report* rep = NULL;
 *   qpt_status st = qpt_run(lab, "identities", &rep);
 *   if (st == QPT_OK || st == QPT_ECHECK) {
 *       qpt_report_write(rep, "out_dir");
 *       int ok = qpt_report_passed(rep);
 *       ...
 *   } else {
 *       fprintf(stderr, "%s\n", qpt_last_error(lab));
 *   }
 *   qpt_report_destroy(rep);
 *   qpt_lab_destroy(lab);
 *
 * All handles are opaque. Every function returns a qpt_status; QPT_ECHECK
 * means the run completed but at least one statistical/numerical check
 * failed (the report is still produced). Errors other than QPT_OK leave a
 * human-readable message retrievable via qpt_last_error until the next call
 * on the same lab. The library is thread-compatible: distinct labs may be
 * used from distinct threads; a single lab must not be shared concurrently.
 */

#ifndef QPTLAB_H
#define QPTLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qpt_status {
    QPT_OK = 0,
    QPT_EINVAL = 1,     /* bad argument / unknown experiment name */
    QPT_ECONFIG = 2,    /* configuration JSON malformed or inconsistent */
    QPT_EDOMAIN = 3,    /* parameter outside mathematical domain */
    QPT_EPRECISION = 4, /* certified tolerance unattainable at current precision */
    QPT_ECHECK = 5,     /* run finished; one or more checks failed */
    QPT_EIO = 6,        /* filesystem error writing outputs */
    QPT_EINTERNAL = 7   /* invariant violation inside the library */
} qpt_status;

typedef struct qpt_lab qpt_lab;
typedef struct qpt_report qpt_report;

/* Library version, e.g. "1.0.0". Static storage; do not free. */
const char* qpt_version(void);

qpt_status qpt_lab_create(qpt_lab** out);
void qpt_lab_destroy(qpt_lab* lab);

/* Merge a JSON configuration document into the lab. Recognized top-level
 * keys: "seed" (uint64), "threads" (int >= 1), "precision_bits" (int >= 64),
 * "out" (string), and per-experiment sections under "experiments".
 * Unknown keys are rejected (QPT_ECONFIG) to catch typos. May be called
 * repeatedly; later documents override earlier ones key by key. */
qpt_status qpt_lab_configure(qpt_lab* lab, const char* config_json);

/* Last error message for this lab (empty string if none). Valid until the
 * next qptlab call with the same lab. Do not free. */
const char* qpt_last_error(const qpt_lab* lab);

/* Scalar evaluations (documented closed forms; handy for quick probes). */
qpt_status qpt_eval_mu_q(qpt_lab* lab, double q, double* out);
qpt_status qpt_eval_f_q(qpt_lab* lab, double q, double u, double* out);

/* Run one named experiment, or "report" for the full battery.
 * Names: "identities", "meixner", "moments", "laplace", "concentration",
 * "main-theorem". On QPT_OK / QPT_ECHECK a report handle is returned and
 * must be destroyed by the caller. */
qpt_status qpt_run(qpt_lab* lab, const char* experiment, qpt_report** out);

/* 1 if every check in the report passed, else 0. */
int qpt_report_passed(const qpt_report* rep);

/* Serialized report (JSON). Owned by the report handle; do not free. */
const char* qpt_report_json(const qpt_report* rep);

/* Write report.json, the per-experiment CSV tables, and a timings sidecar
 * into dir (created if absent). */
qpt_status qpt_report_write(const qpt_report* rep, const char* dir);

void qpt_report_destroy(qpt_report* rep);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* QPTLAB_H */
