#ifndef FLYAUT_H
#define FLYAUT_H

/* Generated by cbindgen from the flyaut-capi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call. Anything but `Ok` leaves a message for
// [`fly_last_error`].
typedef enum FlyStatus {
  // The call succeeded.
  FLY_STATUS_OK = 0,
  // A pointer was NULL, a string was not UTF-8, or the arguments don't
  // fit together (wrong annotation width, missing free variable, ...).
  FLY_STATUS_INVALID_ARGUMENT = 1,
  // The term or formula text didn't parse.
  FLY_STATUS_PARSE_ERROR = 2,
  // The formula parsed but couldn't be compiled into an automaton.
  FLY_STATUS_COMPILE_ERROR = 3,
  // Evaluating or running over the term failed.
  FLY_STATUS_RUN_ERROR = 4,
  // An internal panic was caught at the boundary.
  FLY_STATUS_PANIC = 5,
} FlyStatus;

// A compiled automaton together with its free-variable context (opaque).
typedef struct FlyAutomaton FlyAutomaton;

// An owned clique-width term (opaque).
typedef struct FlyTerm FlyTerm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, as a NUL-terminated
// string. The pointer stays valid until the next failing call on the same
// thread; copy it if you need it longer. Never NULL.
const char *fly_last_error(void);

// The library version as a static NUL-terminated string.
const char *fly_version(void);

// Parses a clique-width term (the same syntax `flyaut gen` prints, e.g.
// `add(1,2,oplus(port(1),port(2)))`, with optional `port(1,[01])`
// annotations).
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid location for one
// pointer. On `Ok`, `*out` owns a term to release with [`fly_term_free`];
// on any other status `*out` is untouched.
enum FlyStatus fly_term_parse(const char *text, struct FlyTerm **out);

// Releases a term handle. NULL is a no-op.
//
// # Safety
// `t` must be NULL or a handle from [`fly_term_parse`] that is not used
// again afterwards.
void fly_term_free(struct FlyTerm *t);

// Renders a term back to its textual syntax.
//
// # Safety
// `t` must be a live term handle; `out` receives a string to release with
// [`fly_string_free`].
enum FlyStatus fly_term_render(const struct FlyTerm *t, char **out);

// Evaluates a term to its port-labeled graph, in the text format
// `n m` header, `vertex port` lines, then `endpoint endpoint` lines.
//
// # Safety
// `t` must be a live term handle; `out` receives a string to release with
// [`fly_string_free`].
enum FlyStatus fly_term_eval(const struct FlyTerm *t, char **out);

// Compiles a formula into an automaton.
//
// `vars` fixes the free-variable context order (variables separated by
// spaces or commas); pass NULL or an empty string to use the formula's
// free variables in first-occurrence order. Every free variable must be in
// the context.
//
// # Safety
// `formula` must be a NUL-terminated string, `vars` NULL or the same, and
// `out` a valid location for one pointer. On `Ok`, `*out` owns an
// automaton to release with [`fly_automaton_free`].
enum FlyStatus fly_formula_compile(const char *formula,
                                   const char *vars,
                                   struct FlyAutomaton **out);

// Releases an automaton handle. NULL is a no-op.
//
// # Safety
// `a` must be NULL or a handle from [`fly_formula_compile`] that is not
// used again afterwards.
void fly_automaton_free(struct FlyAutomaton *a);

// Decides the formula on the term and writes 1 (true) or 0 (false).
//
// A plain term under free variables asks for satisfiability; an annotated
// term is checked against its own assignment, and must carry exactly one
// bit per context variable.
//
// # Safety
// `a` and `t` must be live handles; `out` must be a valid location for one
// `int32_t`.
enum FlyStatus fly_check(const struct FlyAutomaton *a, const struct FlyTerm *t, int32_t *out);

// Counts satisfying assignments of the free variables, as a decimal string
// (counts outgrow every fixed-width integer quickly).
//
// # Safety
// `a` and `t` must be live handles; `out` receives a string to release
// with [`fly_string_free`].
enum FlyStatus fly_count(const struct FlyAutomaton *a, const struct FlyTerm *t, char **out);

// Satisfiable cardinality tuples, rendered like `[(1,1),(2,0)]` (or `[]`).
//
// # Safety
// `a` and `t` must be live handles; `out` receives a string to release
// with [`fly_string_free`].
enum FlyStatus fly_spectrum(const struct FlyAutomaton *a, const struct FlyTerm *t, char **out);

// Cardinality tuples with multiplicities, rendered like `(1,1):6 (2,0):3`
// (or `[]` when nothing satisfies the formula).
//
// # Safety
// `a` and `t` must be live handles; `out` receives a string to release
// with [`fly_string_free`].
enum FlyStatus fly_multispectrum(const struct FlyAutomaton *a, const struct FlyTerm *t, char **out);

// Minimal cardinality of the first context variable over satisfying
// assignments: a decimal string, or `infinity` when nothing satisfies the
// formula.
//
// # Safety
// `a` and `t` must be live handles; `out` receives a string to release
// with [`fly_string_free`].
enum FlyStatus fly_min_card(const struct FlyAutomaton *a, const struct FlyTerm *t, char **out);

// Releases a string returned by this library. NULL is a no-op.
//
// # Safety
// `s` must be NULL or a string obtained from this library that is not used
// again afterwards.
void fly_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLYAUT_H */
