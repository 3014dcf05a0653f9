/* C interface to the endorank authority ranking library. */

#ifndef ENDORANK_H
#define ENDORANK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call. Anything other than `OK` leaves a message readable via
 * `endorank_last_error_message`.
 */
typedef enum EndorankStatus {
  /**
   * The call succeeded.
   */
  ENDORANK_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  ENDORANK_STATUS_NULL_ARGUMENT = 1,
  /**
   * A scalar or array argument was out of its documented range.
   */
  ENDORANK_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The arcs do not form a valid endorsement digraph.
   */
  ENDORANK_STATUS_INVALID_GRAPH = 3,
  /**
   * Reading the digraph file failed.
   */
  ENDORANK_STATUS_IO = 4,
  /**
   * Power iteration stopped at the iteration cap; scores were still
   * written and describe the last iterate.
   */
  ENDORANK_STATUS_NOT_CONVERGED = 5,
} EndorankStatus;

/**
 * Opaque endorsement digraph handle.
 */
typedef struct EndorankDigraph EndorankDigraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *endorank_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *endorank_version(void);

/**
 * Builds a digraph on `n_members` members from parallel arc arrays of
 * length `n_arcs`. `weights` may be null, meaning every arc has weight 1;
 * otherwise each weight must lie in (0, 1]. Self-loops and duplicate arcs
 * are rejected. On success `*out` owns the digraph.
 *
 * # Safety
 * `tails`, `heads`, and `weights` (when non-null) must point to `n_arcs`
 * readable elements, and `out` must be a valid writable pointer.
 */
enum EndorankStatus endorank_digraph_from_arcs(uintptr_t n_members,
                                               uintptr_t n_arcs,
                                               const uintptr_t *tails,
                                               const uintptr_t *heads,
                                               const double *weights,
                                               struct EndorankDigraph **out);

/**
 * Loads a digraph on `n_members` members from the text format written by
 * the endorank tool: one `tail head [weight]` line per arc after a first
 * line holding the member count.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid writable
 * pointer.
 */
enum EndorankStatus endorank_digraph_load(const char *path,
                                          uintptr_t n_members,
                                          struct EndorankDigraph **out);

/**
 * Releases a digraph. Null is ignored.
 *
 * # Safety
 * `d` must have come from this library and not have been freed before.
 */
void endorank_digraph_free(struct EndorankDigraph *d);

/**
 * Number of members, or 0 for a null handle.
 *
 * # Safety
 * `d` must be a live handle or null.
 */
uintptr_t endorank_digraph_members(const struct EndorankDigraph *d);

/**
 * Number of arcs, or 0 for a null handle.
 *
 * # Safety
 * `d` must be a live handle or null.
 */
uintptr_t endorank_digraph_arc_count(const struct EndorankDigraph *d);

/**
 * Weight of the arc `tail -> head`, or NaN when the arc is absent or the
 * handle is null.
 *
 * # Safety
 * `d` must be a live handle or null.
 */
double endorank_digraph_weight(const struct EndorankDigraph *d, uintptr_t tail, uintptr_t head);

/**
 * Weighted PageRank scores of every member, written to `scores_out` (length
 * = member count). `alpha` is the damping factor in (0, 1); iteration stops
 * once the L1 step falls below `tolerance` or after `max_iterations` steps.
 * When the cap is hit the last iterate is still written, `*converged_out`
 * (if non-null) is set to false, and the call returns `NOT_CONVERGED`.
 *
 * # Safety
 * `scores_out` must hold one f64 per member; `converged_out` may be null.
 */
enum EndorankStatus endorank_pagerank(const struct EndorankDigraph *d,
                                      double alpha,
                                      double tolerance,
                                      uintptr_t max_iterations,
                                      double *scores_out,
                                      bool *converged_out);

/**
 * Competition ranking of `n` scores: `positions_out[i]` is the 1-based
 * position of member `i`, and members whose scores differ by no more than
 * one part in 10^9 share a position.
 *
 * # Safety
 * `scores` and `positions_out` must hold `n` elements each.
 */
enum EndorankStatus endorank_rank_positions(const double *scores,
                                            uintptr_t n,
                                            uintptr_t *positions_out);

/**
 * Enriches the digraph of `main_skill` with endorsements deduced from the
 * other skills. `digraphs` holds one handle per skill, all on the same
 * member set, and `pi` is the row-major `n_skills` x `n_skills` deduction
 * matrix: `pi[k * n_skills + j]` is the probability that an endorsement for
 * skill `k` implies one for skill `j`. On success `*out` owns the enriched
 * digraph.
 *
 * # Safety
 * `digraphs` must hold `n_skills` live handles, `pi` must hold
 * `n_skills * n_skills` elements, and `out` must be writable.
 */
enum EndorankStatus endorank_deduce(const struct EndorankDigraph *const *digraphs,
                                    uintptr_t n_skills,
                                    const double *pi,
                                    uintptr_t main_skill,
                                    struct EndorankDigraph **out);

/**
 * Probability of the union of two independent events, the core of the
 * deduction step. Returns NaN unless both arguments lie in [0, 1].
 */
double endorank_union_probability(double existing, double pi);

/**
 * Spearman rank correlation between two score vectors of length `n`, using
 * fractional ranks for ties. Requires `n >= 2` and some variation in each
 * vector.
 *
 * # Safety
 * `a` and `b` must hold `n` elements each; `rho_out` must be writable.
 */
enum EndorankStatus endorank_spearman_rho(const double *a,
                                          const double *b,
                                          uintptr_t n,
                                          double *rho_out);

/**
 * Kendall tau-b rank correlation between two score vectors of length `n`.
 * Requires `n >= 2` and some variation in each vector.
 *
 * # Safety
 * `a` and `b` must hold `n` elements each; `tau_out` must be writable.
 */
enum EndorankStatus endorank_kendall_tau(const double *a,
                                         const double *b,
                                         uintptr_t n,
                                         double *tau_out);

/**
 * Number of members of `scores` involved in a tie: scores within
 * `tolerance` (relative) of each other count as tied. Pass a negative
 * tolerance to use the default of one part in 10^9.
 *
 * # Safety
 * `scores` must hold `n` elements; `ties_out` must be writable.
 */
enum EndorankStatus endorank_count_ties(const double *scores,
                                        uintptr_t n,
                                        double tolerance,
                                        uintptr_t *ties_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENDORANK_H */
