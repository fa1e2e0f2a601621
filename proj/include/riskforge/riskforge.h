/* Stable C interface to the riskforge assessment engine.
 *
 * Structured requests and results are exchanged as UTF-8 JSON strings.
 * Strings returned through `char** out` are owned by the caller and must be
 * released with rf_free(). On any status other than RF_OK (and RF_RUN_FAILED,
 * which still produces output) *out is set to NULL and rf_last_error()
 * describes the failure for the calling thread.
 */
#ifndef RISKFORGE_H
#define RISKFORGE_H

#include <stddef.h>

#if defined(_WIN32)
#define RF_API __declspec(dllexport)
#else
#define RF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rf_status {
    RF_OK = 0,
    RF_RUN_FAILED = 1, /* pipeline ran but did not complete; see the record */
    RF_INVALID_ARGUMENT = 2,
    RF_STORAGE_FAILURE = 3,
    RF_UNKNOWN_KEY = 4,
    RF_KEY_ABSENT = 5,
    RF_MALFORMED_CORPUS = 6,
    RF_DUPLICATE_IDENTIFIER = 7,
    RF_PROFILE_INVALID = 8,
    RF_CONTEXT_OVERFLOW = 9,
    RF_PROVIDER_UNREACHABLE = 10,
    RF_PROVIDER_ERROR = 11,
    RF_NO_SCRIPT_FOR_ROLE = 12,
    RF_MISSING_CONTEXT_KEY = 13,
    RF_UNPARSEABLE = 14,
    RF_SCHEMA_VIOLATION = 15,
    RF_AGENT_FAILED = 16,
    RF_INCOMPLETE_CONTEXT = 17,
    RF_NO_RUNS_SELECTED = 18,
    RF_MISSING_FUNCTION = 19,
    RF_CONFIG_ERROR = 20,
    RF_INTERNAL = 99
} rf_status;

typedef struct rf_corpus rf_corpus;
typedef struct rf_store rf_store;

RF_API const char* rf_version(void);
RF_API const char* rf_status_name(rf_status status);
/* Message for the most recent failure on this thread; never NULL. */
RF_API const char* rf_last_error(void);
RF_API void rf_free(char* text);

/* Framework corpus (JSON Lines). */
RF_API rf_status rf_corpus_open(const char* path, rf_corpus** out);
RF_API void rf_corpus_close(rf_corpus* corpus);
/* {"total": n, "nist_csf": n, "cis": n} */
RF_API rf_status rf_corpus_stats(const rf_corpus* corpus, char** out_json);
/* Array of excerpts, best first. */
RF_API rf_status rf_corpus_retrieve(const rf_corpus* corpus, const char* query, size_t k, char** out_json);
/* Array of citations found in `text`, each with a "verified" flag. */
RF_API rf_status rf_corpus_verify(const rf_corpus* corpus, const char* text, char** out_json);

/* Context store over the six registered entry kinds; log_path may be NULL. */
RF_API rf_status rf_store_open(const char* log_path, rf_store** out);
RF_API void rf_store_close(rf_store* store);
RF_API rf_status rf_store_append(rf_store* store, const char* key, const char* agent_id, const char* payload_json,
                                 char** out_entry_json);
RF_API rf_status rf_store_read_latest(const rf_store* store, const char* key, char** out_entry_json);
RF_API rf_status rf_store_read_history(const rf_store* store, const char* key, char** out_json);
RF_API rf_status rf_store_snapshot(const rf_store* store, char** out_json);

/* Request:
 *   {"profile": path, "mode": "multi"|"single", "model": label,
 *    "provider": "stub"|"http", "window": n, "reserved_output_tokens": n,
 *    "seed": n, "schema_mode": "case_study"|"cross_sector", "base_url": s,
 *    "stub_dir": path, "data_dir": path, "corpus": path, "out": dir}
 * Only "profile" is required. Result:
 *   {"record": {...}, "run_dir": path, "budget": {...}|null, "stages": [...]}
 * Returns RF_RUN_FAILED with a result when the pipeline stopped early. */
RF_API rf_status rf_assess(const char* request_json, char** out_json);

/* Request: {"profiles": dir, "models": config, "runs": n, "mode": s,
 *           "ledger": path, "jobs": n, "window": n, "data_dir": path,
 *           "corpus": path}
 * Result: {"scheduled", "skipped", "completed", "failed"} */
RF_API rf_status rf_ablate(const char* request_json, char** out_json);

/* Request: {"ledger": path, "annotations": path, "aliases": path,
 *           "system": path, "select": "model=..,mode=..,profile=.."}
 * Result: {"metrics": {...}, "table": text} */
RF_API rf_status rf_eval(const char* request_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif
