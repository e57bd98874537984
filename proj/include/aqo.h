/* C interface to the adiabatic open-system toolkit.
 *
 * Usage pattern:
 *
 *   aqo_config* cfg = aqo_config_create();
 *   aqo_config_set(cfg, "lambda", "0.1");
 *   aqo_config_set(cfg, "T", "11");
 *   aqo_result* res = NULL;
 *   if (aqo_run(cfg, "crossover", &res) == AQO_OK)
 *       puts(aqo_result_json(res));
 *   else
 *       fprintf(stderr, "%s\n", aqo_last_error());
 *   aqo_result_destroy(res);
 *   aqo_config_destroy(cfg);
 *
 * Every fallible call returns an aqo_status; on failure the thread-local
 * aqo_last_error() holds a human-readable message.  Identical configurations
 * produce byte-identical JSON and CSV output.
 */
#ifndef AQO_H
#define AQO_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aqo_status {
    AQO_OK = 0,
    AQO_ERR_CONFIG = 2,     /* invalid configuration, key, or command */
    AQO_ERR_NUMERICAL = 3,  /* accuracy loss, overflow, or allocation failure */
    AQO_ERR_STRUCTURAL = 4  /* spectral structure breaks an analysis premise */
} aqo_status;

typedef struct aqo_config aqo_config;
typedef struct aqo_result aqo_result;

/* Library version, "major.minor.patch".  Static storage; do not free. */
const char* aqo_version(void);

/* Message from the most recent failing call on this thread ("" if none).
 * Static storage; do not free. */
const char* aqo_last_error(void);

/* ----- configuration ----------------------------------------------------- */

/* New configuration with default values (model=dj, n-qubits=1, lambda=0.1,
 * T=11, ...).  NULL only when out of memory. */
aqo_config* aqo_config_create(void);
void aqo_config_destroy(aqo_config* cfg);

/* Set one key.  Keys: model, n-qubits, f, omega, lambda (space-separated
 * list), T, T-grid (start:stop:points[:log]), grid, theorem-grid, steps,
 * target, margin, format (json|csv), out. */
aqo_status aqo_config_set(aqo_config* cfg, const char* key, const char* value);

/* Apply a config-file body: key=value lines, blank lines and '#' comments
 * ignored.  Values already set are overwritten. */
aqo_status aqo_config_parse(aqo_config* cfg, const char* text);

/* Canonical serialization: fixed key order, shortest round-trip numbers.
 * Parsing the canonical text reproduces it byte for byte.  *text is
 * allocated; release with aqo_string_free. */
aqo_status aqo_config_canonical(const aqo_config* cfg, char** text);

/* ----- execution ---------------------------------------------------------- */

/* Run one command: spectrum, crossover, evolve, optimal, check-theorem1,
 * or sweep.  On success *result owns the output bundle. */
aqo_status aqo_run(const aqo_config* cfg, const char* command,
                   aqo_result** result);

/* JSON bundle of the run (command, inputs, outputs, provenance).  Borrowed
 * pointer, valid until aqo_result_destroy. */
const char* aqo_result_json(const aqo_result* result);

/* CSV rendering for commands that define one (crossover, sweep); NULL for
 * the others.  Borrowed pointer, valid until aqo_result_destroy. */
const char* aqo_result_csv(const aqo_result* result);

void aqo_result_destroy(aqo_result* result);

/* Free strings returned through out-parameters (aqo_config_canonical). */
void aqo_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* AQO_H */
