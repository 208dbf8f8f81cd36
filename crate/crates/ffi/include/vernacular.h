#ifndef VERNACULAR_H
#define VERNACULAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum VnStatus {
  VN_STATUS_OK = 0,
  VN_STATUS_NULL_POINTER = 1,
  VN_STATUS_INVALID_UTF8 = 2,
  VN_STATUS_DIMENSION = 3,
  VN_STATUS_EMPTY_INPUT = 4,
  VN_STATUS_INSUFFICIENT_DATA = 5,
  VN_STATUS_PARSE = 6,
  VN_STATUS_VALIDATION = 7,
  VN_STATUS_SIZE = 8,
  VN_STATUS_UNKNOWN_CLASS = 9,
  VN_STATUS_CONVERGENCE = 10,
  VN_STATUS_IO = 11,
  VN_STATUS_CONFIG = 12,
  VN_STATUS_PANIC = 13,
} VnStatus;

typedef enum VnMetric {
  VN_METRIC_HAMMING = 0,
  VN_METRIC_HAMMING_NORMALIZED = 1,
  VN_METRIC_JACCARD = 2,
} VnMetric;

typedef enum VnSimMode {
  VN_SIM_MODE_LINE = 0,
  VN_SIM_MODE_TREE = 1,
  VN_SIM_MODE_NETWORK = 2,
} VnSimMode;

typedef struct VnDistanceMatrix VnDistanceMatrix;

typedef struct VnSplitSystem VnSplitSystem;

typedef struct VnTraitMatrix VnTraitMatrix;

typedef struct VnTree VnTree;

typedef struct VnDiagnosis {
  double delta;
  double tree_fit;
  size_t seriation_criterion;
} VnDiagnosis;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread; empty after a
 * success. The pointer stays valid until the next `vn_*` call on the
 * same thread.
 */
const char *vn_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *vn_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void vn_string_free(char *s);

/**
 * Parses trait CSV text (`building_id,<trait…>` header).
 *
 * # Safety
 * `csv` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum VnStatus vn_trait_matrix_from_csv(const char *csv, struct VnTraitMatrix **out);

/**
 * Builds a matrix from `n_taxa × n_traits` row-major cells (0 or 1);
 * taxa are labelled `t1…` and traits `1…`.
 *
 * # Safety
 * `bits` must point to `n_taxa * n_traits` readable bytes.
 */
enum VnStatus vn_trait_matrix_from_bits(size_t n_taxa,
                                        size_t n_traits,
                                        const uint8_t *bits,
                                        struct VnTraitMatrix **out);

/**
 * # Safety
 * `m` must be null or a live handle.
 */
size_t vn_trait_matrix_n_taxa(const struct VnTraitMatrix *m);

/**
 * # Safety
 * `m` must be null or a live handle.
 */
size_t vn_trait_matrix_n_traits(const struct VnTraitMatrix *m);

/**
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
enum VnStatus vn_trait_matrix_to_csv(const struct VnTraitMatrix *m, char **out);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void vn_trait_matrix_free(struct VnTraitMatrix *m);

/**
 * Pairwise distances between the rows of `m`.
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
enum VnStatus vn_distance_matrix(const struct VnTraitMatrix *m,
                                 enum VnMetric metric_kind,
                                 struct VnDistanceMatrix **out);

/**
 * Wraps an `n × n` row-major matrix; taxa are labelled `t1…`.
 *
 * # Safety
 * `values` must point to `n * n` readable doubles.
 */
enum VnStatus vn_distance_from_values(size_t n,
                                      const double *values,
                                      struct VnDistanceMatrix **out);

/**
 * # Safety
 * `d` must be null or a live handle.
 */
size_t vn_distance_len(const struct VnDistanceMatrix *d);

/**
 * Entry `(i, j)`, or NaN when out of range or `d` is null.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
double vn_distance_get(const struct VnDistanceMatrix *d, size_t i, size_t j);

/**
 * # Safety
 * `d` must be null or a handle not yet freed.
 */
void vn_distance_free(struct VnDistanceMatrix *d);

/**
 * Mean quartet delta; exhaustive up to 20 taxa, seeded sample above.
 *
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum VnStatus vn_delta_score(const struct VnDistanceMatrix *d, uint64_t seed, double *out);

/**
 * Neighbor-joining tree.
 *
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum VnStatus vn_nj(const struct VnDistanceMatrix *d, bool clamp_negative, struct VnTree **out);

/**
 * # Safety
 * `newick` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum VnStatus vn_tree_from_newick(const char *newick, struct VnTree **out);

/**
 * # Safety
 * `t` must be a live handle and `out` a valid pointer.
 */
enum VnStatus vn_tree_to_newick(const struct VnTree *t, size_t precision, char **out);

/**
 * Percentage of squared distance explained by the tree's path lengths.
 * Leaves are matched to matrix rows by position.
 *
 * # Safety
 * `d` and `t` must be live handles and `out` a valid pointer.
 */
enum VnStatus vn_tree_fit(const struct VnDistanceMatrix *d, const struct VnTree *t, double *out);

/**
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void vn_tree_free(struct VnTree *t);

/**
 * Neighbor-net split system; splits lighter than `weight_threshold` are
 * dropped.
 *
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum VnStatus vn_neighbor_net(const struct VnDistanceMatrix *d,
                              double weight_threshold,
                              struct VnSplitSystem **out);

/**
 * # Safety
 * `s` must be null or a live handle.
 */
size_t vn_splits_len(const struct VnSplitSystem *s);

/**
 * Weight of split `k`, or NaN when out of range or `s` is null.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
double vn_splits_weight(const struct VnSplitSystem *s, size_t k);

/**
 * # Safety
 * `s` must be a live handle and `out` a valid pointer.
 */
enum VnStatus vn_splits_to_interchange(const struct VnSplitSystem *s, char **out);

/**
 * # Safety
 * `text_in` must be a valid NUL-terminated string and `out` a valid
 * pointer.
 */
enum VnStatus vn_splits_from_interchange(const char *text_in, struct VnSplitSystem **out);

/**
 * Splits graph of `s` with equal-angle layout, rendered as DOT
 * (`as_svg = false`) or SVG.
 *
 * # Safety
 * `s` must be a live handle and `out` a valid pointer.
 */
enum VnStatus vn_splits_graph_render(const struct VnSplitSystem *s, bool as_svg, char **out);

/**
 * # Safety
 * `s` must be null or a handle not yet freed.
 */
void vn_splits_free(struct VnSplitSystem *s);

/**
 * Seriates `m`; writes the taxon order (length `n_taxa`) into `order`
 * and the embedded-absence count into `criterion`.
 *
 * # Safety
 * `m` must be a live handle, `order` must have room for `n_taxa`
 * entries and `criterion` must be valid.
 */
enum VnStatus vn_seriate(const struct VnTraitMatrix *m,
                         size_t restarts,
                         uint64_t seed,
                         size_t *order,
                         size_t *criterion);

/**
 * Simulated trait matrix under the given transmission model.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum VnStatus vn_simulate(enum VnSimMode mode,
                          size_t n_taxa,
                          size_t n_traits,
                          double flip_rate,
                          double borrow_rate,
                          uint64_t seed,
                          struct VnTraitMatrix **out);

/**
 * Delta score, neighbor-joining fit and seriation criterion of `m`.
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
enum VnStatus vn_diagnose(const struct VnTraitMatrix *m,
                          enum VnMetric metric_kind,
                          uint64_t seed,
                          struct VnDiagnosis *out);

/**
 * Static name of a status code, matching the command-line error categories.
 */
const char *vn_status_name(enum VnStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VERNACULAR_H */
