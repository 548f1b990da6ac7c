#ifndef CHARRULE_H
#define CHARRULE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum CrStatus {
  CR_STATUS_OK = 0,
  /**
   * A checked property or theorem does not hold.
   */
  CR_STATUS_FAILED = 1,
  /**
   * Malformed input.
   */
  CR_STATUS_SCHEMA = 2,
  /**
   * Input inconsistent with the domain.
   */
  CR_STATUS_VALIDATION = 3,
  /**
   * An enumeration budget was exceeded.
   */
  CR_STATUS_GUARD = 4,
  CR_STATUS_NULL_POINTER = 5,
  CR_STATUS_INVALID_UTF8 = 6,
  CR_STATUS_PANIC = 7,
} CrStatus;

/**
 * A set of feasible profiles with a designated pair.
 */
typedef struct CrDomain CrDomain;

/**
 * A canonical rule: a character kind plus the minimal elements of its
 * `a`-region.
 */
typedef struct CrRule CrRule;

/**
 * An explicit choice for every profile of a domain.
 */
typedef struct CrTable CrTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread, or NULL. The pointer is
 * valid until the next `cr_*` call on the same thread.
 */
const char *cr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cr_version(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void cr_string_free(char *s);

/**
 * Parses a domain file's JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CrStatus cr_domain_from_json(const char *json, struct CrDomain **out);

/**
 * # Safety
 * `d` must come from `cr_domain_from_json` and not have been freed.
 */
void cr_domain_free(struct CrDomain *d);

/**
 * Number of profiles in the domain.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum CrStatus cr_domain_len(const struct CrDomain *d, uint64_t *out);

/**
 * Parses a rule file's JSON text against a domain.
 *
 * # Safety
 * `d` must be a live handle, `json` NUL-terminated, `out` writable.
 */
enum CrStatus cr_rule_from_json(const struct CrDomain *d, const char *json, struct CrRule **out);

/**
 * # Safety
 * `r` must come from this library and not have been freed.
 */
void cr_rule_free(struct CrRule *r);

/**
 * Evaluates a rule at a profile given as JSON. Writes 1 to `chooses_a`
 * when the rule picks the first alternative of the pair, 0 otherwise.
 *
 * # Safety
 * `r` must be a live handle, `profile_json` NUL-terminated, `chooses_a`
 * writable.
 */
enum CrStatus cr_rule_eval_json(const struct CrRule *r,
                                const char *profile_json,
                                int32_t *chooses_a);

/**
 * Evaluates a rule at the profile with canonical index `index`.
 *
 * # Safety
 * `r` must be a live handle; `chooses_a` writable.
 */
enum CrStatus cr_rule_eval_index(const struct CrRule *r, uint64_t index, int32_t *chooses_a);

/**
 * Serializes a rule to JSON. Free the result with `cr_string_free`.
 *
 * # Safety
 * `r` must be a live handle; `out` writable.
 */
enum CrStatus cr_rule_to_json(const struct CrRule *r, char **out);

/**
 * Tabulates a rule over its whole domain.
 *
 * # Safety
 * `r` must be a live handle; `out` writable.
 */
enum CrStatus cr_rule_to_table(const struct CrRule *r, struct CrTable **out);

/**
 * Parses a table file's JSON text against a domain.
 *
 * # Safety
 * `d` must be a live handle, `json` NUL-terminated, `out` writable.
 */
enum CrStatus cr_table_from_json(const struct CrDomain *d, const char *json, struct CrTable **out);

/**
 * # Safety
 * `t` must come from this library and not have been freed.
 */
void cr_table_free(struct CrTable *t);

/**
 * Checks one property (`wgsp`, `sgsp`, `apr`, `isp`, `almost-monotone`,
 * `anonymous`). Returns `Ok` when it holds and `Failed` when it does not;
 * in the latter case `cr_last_error` describes a witness.
 *
 * # Safety
 * `t` must be a live handle and `property` NUL-terminated.
 */
enum CrStatus cr_table_check(const struct CrTable *t, const char *property);

/**
 * Counts the canonical rules of a character kind (`general`, `anon`, `bi`,
 * `strict`, `strong`) on a domain.
 *
 * # Safety
 * `d` must be a live handle, `kind` NUL-terminated, `out` writable.
 */
enum CrStatus cr_count_rules(const struct CrDomain *d, const char *kind, uint64_t *out);

/**
 * Runs a theorem check and writes its JSON report to `report` (free with
 * `cr_string_free`). Returns `Failed` when the check fails; a check whose
 * hypotheses do not hold returns `Ok`.
 *
 * # Safety
 * `d` must be a live handle, `theorem` NUL-terminated, `report` writable.
 */
enum CrStatus cr_verify_theorem(const struct CrDomain *d, const char *theorem, char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHARRULE_H */
