/*
 * ksymp C API: load field models, derive their geometric structure, run the
 * numerical pipelines, and receive results as text/CSV/JSON strings.
 *
 * All functions returning ksymp_status leave outputs untouched on failure;
 * ksymp_last_error() describes the most recent failure on the calling
 * thread. Strings returned through char** are heap-allocated and must be
 * released with ksymp_string_free().
 */
#ifndef KSYMP_H
#define KSYMP_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct ksymp_model ksymp_model;

typedef enum ksymp_status {
    KSYMP_OK = 0,
    KSYMP_ERR_PARSE = 1,   /* expression or model file syntax */
    KSYMP_ERR_EVAL = 2,    /* unbound variable or domain error */
    KSYMP_ERR_INVALID = 3, /* structural precondition violated */
    KSYMP_ERR_NUMERIC = 4, /* singular system, no convergence, blow-up */
    KSYMP_ERR_IO = 5       /* file not readable */
} ksymp_status;

/* Thread-local message for the most recent error on this thread. */
const char* ksymp_last_error(void);

ksymp_status ksymp_model_load_file(const char* path, ksymp_model** out);
ksymp_status ksymp_model_load_string(const char* text, ksymp_model** out);
void ksymp_model_free(ksymp_model* model);

int ksymp_model_k(const ksymp_model* model);
int ksymp_model_n(const ksymp_model* model);
/* Valid while the model lives. */
const char* ksymp_model_name(const ksymp_model* model);

/* Symbolic derivation report (Euler-Lagrange equations, Legendre map,
 * energy, Hessian, form coefficient matrices). */
ksymp_status ksymp_derive(const ksymp_model* model, char** out_text);

/* Regularity / pullback / canonical-operator identity checks at `samples`
 * seeded random points. JSON out; *out_pass is 1 when every check passed. */
ksymp_status ksymp_check(const ksymp_model* model, int samples,
                         unsigned long long seed, double tol, char** out_json,
                         int* out_pass);

/* Integrate the model's second-order solution from the datum (q0 has n
 * entries, v0 has n*k entries, row-major over (i, A)) across the grid
 * ("t1=0:1:0.01,t2=..."). `ansatz` is "auto", "symmetric", or "uniform";
 * `format` is "csv" or "json". *out_truncated reports blow-up truncation. */
ksymp_status ksymp_integrate(const ksymp_model* model, const double* q0,
                             const double* v0, const char* grid, int substeps,
                             const char* ansatz, const char* format, char** out,
                             int* out_truncated);

/* Equivalence pipeline on regular models; falls back to the constraint
 * pathway automatically when the model is singular at the datum (the datum
 * and the model's sample points seed that pathway). */
ksymp_status ksymp_verify(const ksymp_model* model, const double* q0,
                          const double* v0, const char* grid, int samples,
                          unsigned long long seed, int substeps, const char* ansatz,
                          char** out_json, int* out_pass);

/* Constraint algorithm on seeded graph points (plus the model's declared
 * sample points). *out_pass is 1 when the algorithm stabilized. */
ksymp_status ksymp_constraints(const ksymp_model* model, int samples,
                               unsigned long long seed, int max_levels, double tol,
                               char** out_json, int* out_pass);

void ksymp_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* KSYMP_H */
