/* qspcat -- quantum signal processing synthesis via state-conversion
 * catalysts. C API over the shared library; all structured data crosses the
 * boundary as JSON text, with opaque handles for parsed objects.
 *
 * Every function returning int yields QSPCAT_OK or an error code; the
 * message for the most recent failure on the calling thread is available
 * through qspcat_last_error(). Strings returned through char** are owned by
 * the caller and released with qspcat_string_free().
 */
#ifndef QSPCAT_H
#define QSPCAT_H

#ifdef __cplusplus
extern "C" {
#endif

#define QSPCAT_OK 0
#define QSPCAT_ERR_ARGUMENT 1 /* null handle or out-of-range argument */
#define QSPCAT_ERR_PARSE 2    /* malformed JSON, schema or config violation */
#define QSPCAT_ERR_NUMERIC 3  /* precondition or verification failure */
#define QSPCAT_ERR_INTERNAL 4

typedef struct qspcat_poly qspcat_poly;
typedef struct qspcat_protocol qspcat_protocol;

const char* qspcat_version(void);
const char* qspcat_last_error(void);
void qspcat_string_free(char* s);

/* Polynomial JSON: {"num_vars": m, "ambient_dim": K,
 *   "terms": [{"exp": [k_1..k_m], "coeff": [[re,im], ...]}, ...]} */
int qspcat_poly_parse(const char* json, qspcat_poly** out);
int qspcat_poly_to_json(const qspcat_poly* p, char** out);
void qspcat_poly_free(qspcat_poly* p);
int qspcat_poly_num_vars(const qspcat_poly* p);
int qspcat_poly_ambient_dim(const qspcat_poly* p);
int qspcat_poly_degree(const qspcat_poly* p, int var);
/* z and out are interleaved re,im pairs (m pairs in, ambient_dim pairs out). */
int qspcat_poly_evaluate(const qspcat_poly* p, const double* z, double* out);
int qspcat_poly_sup_norm(const qspcat_poly* p, int grid_per_axis, double* out_max,
                         double* out_min);

/* `config` arguments take flat "key = value" lines (NULL for defaults). */

/* Outer complementary polynomial plus a root-inventory report. Either output
 * pointer may be NULL. */
int qspcat_complete_outer(const qspcat_poly* p, const char* config, qspcat_poly** q,
                          char** report_json);
/* JSON array of every distinct completion (at most max_count). */
int qspcat_enumerate_completions(const qspcat_poly* p, int max_count,
                                 const char* config, char** list_json);

/* Catalyst of the (completed) target: emits
 * {"n":…, "x":<matrix>, "parts":[<polynomial>…], "completed_target":<poly>,
 *  "verification":{…}}. scale in (0,1] converts xi -> scale*tau. */
int qspcat_catalyst(const qspcat_poly* tau, int partial, double scale,
                    const char* config, char** out_json);

/* Protocol JSON: {"N":…, "m":…, "layers":[["1","z1",…],…],
 *  "unitaries":[[[re,im],…],…]} (each unitary flat row-major). */
int qspcat_protocol_parse(const char* json, const char* config, qspcat_protocol** out);
int qspcat_protocol_to_json(const qspcat_protocol* p, char** out);
void qspcat_protocol_free(qspcat_protocol* p);
int qspcat_protocol_dim(const qspcat_protocol* p);
int qspcat_protocol_length(const qspcat_protocol* p);
int qspcat_protocol_evaluate(const qspcat_protocol* p, const double* z, double* out);
/* Max ||protocol(z) - tau(z)|| over the grid (grid 0 picks 4*deg+1). */
int qspcat_protocol_verify(const qspcat_protocol* p, const qspcat_poly* tau,
                           int grid_per_axis, double* max_error);

int qspcat_synthesize(const qspcat_poly* tau, int via_catalyst, const char* config,
                      qspcat_protocol** out);

/* window holds num_vars entries. Emits blocks JSON and a solver report. */
int qspcat_mqsp_solve(const qspcat_poly* tau, const int* window, int partial,
                      int min_rank, const char* config, char** blocks_json,
                      char** report_json);
int qspcat_mqsp_synthesize(const qspcat_poly* tau, const char* blocks_json,
                           const char* config, qspcat_protocol** out);

/* instance JSON: explicit labels or {"qsp":{"target":<poly>,"grid":g}};
 * catalyst JSON: {"parts":[<polynomial>…]}. */
int qspcat_simulate(const char* instance_json, const char* catalyst_json,
                    double epsilon, const char* config, char** report_json);
int qspcat_dual(const char* instance_json, const char* gamma_json, int partial,
                const char* config, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* QSPCAT_H */
