/*
 * whmc — discounted first-passage functionals of finite-state Markov chains
 * with piecewise-constant generators.
 *
 * C interface of the shared library.  A problem handle is built from JSON
 * config text (see README for the schema); every computation runs against
 * the handle and reports through plain structs.  All functions return
 * WHMC_OK on success; on failure whmc_last_error() describes what went
 * wrong (the message is thread-local and valid until the next call on the
 * same thread).
 */

#ifndef WHMC_H
#define WHMC_H

#include <stddef.h>
#include <stdint.h>

#if defined(__cplusplus)
extern "C" {
#endif

typedef enum whmc_status {
  WHMC_OK = 0,
  WHMC_ERR_USAGE = 1,     /* invalid arguments / misuse of the API */
  WHMC_ERR_CONFIG = 2,    /* config rejected (parse or validation) */
  WHMC_ERR_NUMERICAL = 3  /* spectral split or linear-system failure */
} whmc_status;

typedef struct whmc_problem whmc_problem;

const char* whmc_version(void);

/* Message for the most recent failure on the calling thread. */
const char* whmc_last_error(void);

/* Parse JSON config text into a problem handle. */
whmc_status whmc_problem_parse(const char* config_text, whmc_problem** out);
void whmc_problem_free(whmc_problem* problem);

/* Built-in two-state fluid demo scenario (also shipped as configs/fluid.cfg). */
const char* whmc_fluid_demo_config(void);

/* Re-validates the model and writes a human-readable report into buf. */
whmc_status whmc_check(const whmc_problem* problem, char* buf, size_t buflen);

typedef struct whmc_factorize_report {
  int32_t levels;
  double killing;
  double residual;            /* factorization identity defect, max norm */
  double lambda_row_sum_max;  /* largest row sum over the crossing blocks */
  double lambda_entry_min;    /* most negative crossing-block entry */
  double g_row_sum_max;       /* largest diagonal sub-generator row sum */
} whmc_factorize_report;

/*
 * Factorize the level-augmented generator at the given randomization rates
 * (one per breakpoint).  rates may be NULL, which picks 1/(s_k - s_{k-1}).
 */
whmc_status whmc_factorize(const whmc_problem* problem, const double* rates,
                           int32_t n_rates, whmc_factorize_report* report);

typedef struct whmc_passage_result {
  double value;
  double tolerance;  /* [0,1] flagging slack of the inversion */
  double residual;   /* worst factorization defect across transform nodes */
  int32_t flagged;   /* value outside [0,1] beyond tolerance */
  int32_t terms;
  char method[24];
} whmc_passage_result;

/* Functional, states and inversion settings come from the config. */
whmc_status whmc_passage(const whmc_problem* problem, whmc_passage_result* result);

typedef struct whmc_mc_result {
  double mean;
  double std_error;
  double bias_bound;  /* truncation bias bound e^{-cT} */
  double horizon;
  int64_t paths;
  uint64_t seed;
} whmc_mc_result;

/* Monte Carlo estimate of the configured functional.  workers >= 1; the
 * result is bitwise-identical for any worker count. */
whmc_status whmc_mc(const whmc_problem* problem, int32_t workers,
                    whmc_mc_result* result);

#if defined(__cplusplus)
} /* extern "C" */
#endif

#endif /* WHMC_H */
