#ifndef LASSOKIT_H
#define LASSOKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * How `lk_pushforward` builds the contracted decomposition.
 */
typedef enum {
  LK_METHOD_IMAGES = 0,
  LK_METHOD_SPAN = 1,
} LkMethod;

/**
 * Result of every fallible call. Codes 0 to 6 match the CLI exit codes.
 */
typedef enum {
  LK_STATUS_OK = 0,
  LK_STATUS_CHECK_FAILED = 1,
  LK_STATUS_PARSE = 2,
  LK_STATUS_PRECONDITION = 3,
  LK_STATUS_SCHEMA_MISMATCH = 4,
  LK_STATUS_MISALIGNED = 5,
  LK_STATUS_BOUND_EXCEEDED = 6,
  /**
   * A null pointer or a string that is not UTF-8.
   */
  LK_STATUS_INVALID_ARGUMENT = 7,
  LK_STATUS_PANIC = 8,
} LkStatus;

typedef struct LkContraction LkContraction;

typedef struct LkDecomposition LkDecomposition;

typedef struct LkHom LkHom;

typedef struct LkInstance LkInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *lk_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void lk_string_free(char *s);

/**
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
LkStatus lk_instance_from_json(const char *json, LkInstance **out);

/**
 * # Safety
 * `x` must be a live instance handle and `out` a valid pointer.
 */
LkStatus lk_instance_to_json(const LkInstance *x, char **out);

/**
 * # Safety
 * `x` must be null or a handle not yet freed.
 */
void lk_instance_free(LkInstance *x);

/**
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
LkStatus lk_hom_from_json(const char *json, LkHom **out);

/**
 * # Safety
 * `h` must be a live hom handle and `out` a valid pointer.
 */
LkStatus lk_hom_to_json(const LkHom *h, char **out);

/**
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void lk_hom_free(LkHom *h);

/**
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
LkStatus lk_decomposition_from_json(const char *json, LkDecomposition **out);

/**
 * # Safety
 * `d` must be a live decomposition handle and `out` a valid pointer.
 */
LkStatus lk_decomposition_to_json(const LkDecomposition *d, char **out);

/**
 * # Safety
 * `d` must be null or a handle not yet freed.
 */
void lk_decomposition_free(LkDecomposition *d);

/**
 * Contracts the base instance along the mono `sub` with the named lasso.
 *
 * # Safety
 * `sub` must be a live hom handle, `lasso` a nul-terminated string and
 * `out` a valid pointer.
 */
LkStatus lk_contract(const LkHom *sub, const char *lasso, LkContraction **out);

/**
 * # Safety
 * `c` must be a live contraction handle and `out` a valid pointer.
 */
LkStatus lk_contraction_result(const LkContraction *c, LkInstance **out);

/**
 * # Safety
 * `c` must be a live contraction handle and `out` a valid pointer.
 */
LkStatus lk_contraction_to_json(const LkContraction *c, char **out);

/**
 * # Safety
 * `c` must be null or a handle not yet freed.
 */
void lk_contraction_free(LkContraction *c);

/**
 * Pushes a decomposition of the codomain of `sub` forward along the
 * contraction of `sub`, keeping the shape.
 *
 * # Safety
 * `d` and `sub` must be live handles, `lasso` a nul-terminated string and
 * `out` a valid pointer.
 */
LkStatus lk_pushforward(const LkDecomposition *d,
                        const LkHom *sub,
                        const char *lasso,
                        LkMethod method,
                        LkDecomposition **out);

/**
 * Pulls a decomposition of the codomain of `hom` back to its domain.
 *
 * # Safety
 * `d` and `hom` must be live handles and `out` a valid pointer.
 */
LkStatus lk_pullback(const LkDecomposition *d, const LkHom *hom, LkDecomposition **out);

/**
 * The instance a decomposition glues to.
 *
 * # Safety
 * `d` must be a live decomposition handle and `out` a valid pointer.
 */
LkStatus lk_colimit(const LkDecomposition *d, LkInstance **out);

/**
 * Checks the lasso axioms (and strength, if `strong`) over every instance
 * within the bounds. Writes the JSON report to `report` and returns
 * `CheckFailed` when an axiom fails. `schema` may be null to infer it from
 * the lasso name. Bounds above the carrier ceiling are refused.
 *
 * # Safety
 * `lasso` must be a nul-terminated string, `schema` null or one, and
 * `report` a valid pointer.
 */
LkStatus lk_check(const char *lasso,
                  const char *schema,
                  size_t max_vertices,
                  size_t max_edges,
                  bool strong,
                  char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LASSOKIT_H */
