#ifndef DSNET_H
#define DSNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Call outcome. Values 2 to 4 match the `dsnet` CLI exit codes.
 */
typedef enum DsStatus {
  DS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  DS_STATUS_NULL_POINTER = 1,
  /**
   * Malformed input, unknown names, scope mismatches, invalid UTF-8.
   */
  DS_STATUS_VALIDATION = 2,
  /**
   * Total conflict, no solution, empty conditioned population.
   */
  DS_STATUS_NUMERICAL = 3,
  /**
   * A size limit was exceeded.
   */
  DS_STATUS_CAPACITY = 4,
  /**
   * The library panicked; the handle arguments should be discarded.
   */
  DS_STATUS_PANIC = 5,
} DsStatus;

typedef enum DsStructureKind {
  DS_STRUCTURE_KIND_TREE = 0,
  DS_STRUCTURE_KIND_POLYTREE = 1,
} DsStructureKind;

typedef enum DsVerdict {
  DS_VERDICT_INDEPENDENT = 0,
  DS_VERDICT_DEPENDENT = 1,
  DS_VERDICT_INCONCLUSIVE = 2,
} DsVerdict;

/**
 * Opaque set-valued dataset.
 */
typedef struct DsDataset DsDataset;

/**
 * Opaque mass function.
 */
typedef struct DsMass DsMass;

/**
 * Opaque belief network.
 */
typedef struct DsNetwork DsNetwork;

/**
 * Opaque learned structure.
 */
typedef struct DsStructure DsStructure;

/**
 * Structure comparison against a true network.
 */
typedef struct DsMetrics {
  double precision;
  double recall;
  double orientation_accuracy;
  size_t spurious_colliders;
  size_t true_colliders;
} DsMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *dsnet_last_error(void);

/**
 * Release a string returned by this library. Null is ignored.
 */
void dsnet_string_free(char *s);

/**
 * Parse a dataset in the line-oriented text format.
 */
enum DsStatus dsnet_dataset_parse(const char *src, struct DsDataset **out);

enum DsStatus dsnet_dataset_len(const struct DsDataset *ds, size_t *out);

/**
 * Serialize to the dataset text format; free with [`dsnet_string_free`].
 */
enum DsStatus dsnet_dataset_to_text(const struct DsDataset *ds, char **out);

/**
 * Reject records disjoint from the event and narrow the rest to it.
 */
enum DsStatus dsnet_dataset_condition(const struct DsDataset *ds,
                                      const char *event,
                                      struct DsDataset **out);

/**
 * Relative-frequency mass over `vars` (null: every variable).
 */
enum DsStatus dsnet_dataset_empirical_mass(const struct DsDataset *ds,
                                           const char *vars,
                                           struct DsMass **out);

void dsnet_dataset_free(struct DsDataset *ds);

/**
 * Parse a JSON network document.
 */
enum DsStatus dsnet_network_parse(const char *json, struct DsNetwork **out);

/**
 * Random network over `n_vars` variables named `X1..Xn` with the given
 * domain sizes (null: all binary).
 */
enum DsStatus dsnet_network_generate(enum DsStructureKind kind,
                                     size_t n_vars,
                                     const size_t *domain_sizes,
                                     size_t focal_budget,
                                     uint64_t seed,
                                     struct DsNetwork **out);

/**
 * JSON document; free with [`dsnet_string_free`].
 */
enum DsStatus dsnet_network_to_json(const struct DsNetwork *net, char **out);

/**
 * Underlying joint distribution (combination of all node valuations).
 */
enum DsStatus dsnet_network_joint(const struct DsNetwork *net, struct DsMass **out);

/**
 * `n` records drawn from the underlying joint distribution.
 */
enum DsStatus dsnet_network_sample(const struct DsNetwork *net,
                                   size_t n,
                                   uint64_t seed,
                                   struct DsDataset **out);

void dsnet_network_free(struct DsNetwork *net);

/**
 * Dempster combination over the union of both scopes.
 */
enum DsStatus dsnet_mass_combine(const struct DsMass *a,
                                 const struct DsMass *b,
                                 struct DsMass **out);

/**
 * Condition on an event over variables of the mass's scope.
 */
enum DsStatus dsnet_mass_condition(const struct DsMass *m, const char *event, struct DsMass **out);

/**
 * Marginal on the listed variables.
 */
enum DsStatus dsnet_mass_marginalize(const struct DsMass *m, const char *vars, struct DsMass **out);

/**
 * `Bel(A)` for an event within the mass's scope.
 */
enum DsStatus dsnet_mass_belief(const struct DsMass *m, const char *event, double *out);

/**
 * `Pl(A)` for an event within the mass's scope.
 */
enum DsStatus dsnet_mass_plausibility(const struct DsMass *m, const char *event, double *out);

enum DsStatus dsnet_mass_focal_count(const struct DsMass *m, size_t *out);

/**
 * L1 distance between two masses over the same scope.
 */
enum DsStatus dsnet_mass_l1_distance(const struct DsMass *a, const struct DsMass *b, double *out);

void dsnet_mass_free(struct DsMass *m);

/**
 * Test `I(J, K | L)` in `m`. `residual` receives NaN when the test is
 * inconclusive. `l` may be null or empty.
 */
enum DsStatus dsnet_indep_test(const struct DsMass *m,
                               const char *j,
                               const char *k,
                               const char *l,
                               double epsilon,
                               enum DsVerdict *verdict,
                               double *residual);

/**
 * Learn from the empirical masses of a dataset. `theta` applies to polytrees.
 */
enum DsStatus dsnet_learn_dataset(const struct DsDataset *ds,
                                  enum DsStructureKind kind,
                                  double theta,
                                  struct DsStructure **out);

/**
 * Learn from the exact marginals of a network's joint distribution.
 */
enum DsStatus dsnet_learn_exact(const struct DsNetwork *net,
                                enum DsStructureKind kind,
                                double theta,
                                struct DsStructure **out);

enum DsStatus dsnet_structure_edge_count(const struct DsStructure *st, size_t *out);

/**
 * Skeleton edge `i` as variable indices `a < b` with its weight.
 * `orientation` is 1 for `a -> b`, -1 for `b -> a`, 0 when undirected.
 */
enum DsStatus dsnet_structure_edge(const struct DsStructure *st,
                                   size_t i,
                                   size_t *a,
                                   size_t *b,
                                   int32_t *orientation,
                                   double *weight);

/**
 * Tab-separated edge, collider and warning rows as printed by `dsnet learn`.
 */
enum DsStatus dsnet_structure_report(const struct DsStructure *st, char **out);

/**
 * Compare with the structure of a true network.
 */
enum DsStatus dsnet_structure_compare(const struct DsStructure *st,
                                      const struct DsNetwork *truth,
                                      struct DsMetrics *out);

void dsnet_structure_free(struct DsStructure *st);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DSNET_H */
