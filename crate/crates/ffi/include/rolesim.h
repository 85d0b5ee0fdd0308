#ifndef ROLESIM_H
#define ROLESIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum RolesimStatus {
  ROLESIM_STATUS_OK = 0,
  // File could not be read, written or parsed.
  ROLESIM_STATUS_IO = 1,
  // An argument violated a precondition.
  ROLESIM_STATUS_INVALID_ARGUMENT = 2,
  // A numerical routine failed.
  ROLESIM_STATUS_NUMERICAL = 3,
  // The iteration hit its limit; outputs hold the last iterate.
  ROLESIM_STATUS_NOT_CONVERGED = 4,
  ROLESIM_STATUS_NULL_POINTER = 5,
  // A Rust panic was caught at the boundary.
  ROLESIM_STATUS_PANIC = 6,
} RolesimStatus;

// Role graph presets for [`rolesim_generate`].
typedef enum RolesimPreset {
  ROLESIM_PRESET_COMMUNITY = 0,
  ROLESIM_PRESET_CYCLE = 1,
} RolesimPreset;

// Low-rank similarity factor `X`, representing `X X^T`.
typedef struct RolesimFactor RolesimFactor;

// Directed weighted graph.
typedef struct RolesimGraph RolesimGraph;

// Dense symmetric similarity matrix.
typedef struct RolesimMatrix RolesimMatrix;

// Node partition.
typedef struct RolesimPartition RolesimPartition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL.
uintptr_t rolesim_last_error_message(char *buf, uintptr_t len);

// Builds a graph from `m` parallel arrays of edges. `weights` may be null
// for unit weights.
enum RolesimStatus rolesim_graph_new(uintptr_t n,
                                     const uintptr_t *src,
                                     const uintptr_t *dst,
                                     const double *weights,
                                     uintptr_t m,
                                     struct RolesimGraph **out);

// Loads an edge-list file.
enum RolesimStatus rolesim_graph_load(const char *path, struct RolesimGraph **out);

enum RolesimStatus rolesim_graph_save(const struct RolesimGraph *graph, const char *path);

// Node count, or 0 for a null handle.
uintptr_t rolesim_graph_node_count(const struct RolesimGraph *graph);

uintptr_t rolesim_graph_edge_count(const struct RolesimGraph *graph);

void rolesim_graph_free(struct RolesimGraph *graph);

// Random graph with `k` planted roles of `role_size` nodes each.
enum RolesimStatus rolesim_generate(enum RolesimPreset preset,
                                    uintptr_t k,
                                    uintptr_t role_size,
                                    double p_in,
                                    double p_out,
                                    uint64_t seed,
                                    struct RolesimGraph **graph_out,
                                    struct RolesimPartition **truth_out);

// `1 / ρ(A + A^T)`; infinity for a graph without edges, NaN for null.
double rolesim_beta_max_easy(const struct RolesimGraph *graph);

// Full-rank similarity. `beta <= 0` selects the automatic value.
enum RolesimStatus rolesim_full_similarity(const struct RolesimGraph *graph,
                                           double beta,
                                           double tol,
                                           uintptr_t max_iter,
                                           struct RolesimMatrix **out,
                                           uintptr_t *iterations);

uintptr_t rolesim_matrix_dim(const struct RolesimMatrix *matrix);

// Entry `(i, j)`, NaN when out of range or null.
double rolesim_matrix_get(const struct RolesimMatrix *matrix, uintptr_t i, uintptr_t j);

// Copies the `n × n` entries row-major into `buf`, which must hold `len ≥ n²` values.
enum RolesimStatus rolesim_matrix_copy(const struct RolesimMatrix *matrix,
                                       double *buf,
                                       uintptr_t len);

void rolesim_matrix_free(struct RolesimMatrix *matrix);

// Rank-`rank` similarity factor. `beta <= 0` selects the automatic value.
enum RolesimStatus rolesim_lowrank_similarity(const struct RolesimGraph *graph,
                                              uintptr_t rank,
                                              double beta,
                                              double tol,
                                              uintptr_t max_iter,
                                              struct RolesimFactor **out,
                                              uintptr_t *iterations);

uintptr_t rolesim_factor_dim(const struct RolesimFactor *factor);

// Number of columns of the factor (the rank bound).
uintptr_t rolesim_factor_rank(const struct RolesimFactor *factor);

// Entry `(i, j)` of `X X^T`, NaN when out of range or null.
double rolesim_factor_similarity(const struct RolesimFactor *factor, uintptr_t i, uintptr_t j);

// Copies `X` (`n × r`) row-major into `buf`, which must hold `len ≥ n r` values.
enum RolesimStatus rolesim_factor_copy(const struct RolesimFactor *factor,
                                       double *buf,
                                       uintptr_t len);

void rolesim_factor_free(struct RolesimFactor *factor);

// Top-level roles of `graph`. `rank == 0` uses the full-rank similarity;
// `beta <= 0` selects the automatic value.
enum RolesimStatus rolesim_extract_roles(const struct RolesimGraph *graph,
                                         uintptr_t rank,
                                         double beta,
                                         double resolution,
                                         uint64_t seed,
                                         struct RolesimPartition **out);

// Partition from `n` labels; label gaps are closed preserving order.
enum RolesimStatus rolesim_partition_new(const uintptr_t *labels,
                                         uintptr_t n,
                                         struct RolesimPartition **out);

enum RolesimStatus rolesim_partition_load(const char *path, struct RolesimPartition **out);

uintptr_t rolesim_partition_len(const struct RolesimPartition *partition);

uintptr_t rolesim_partition_cluster_count(const struct RolesimPartition *partition);

// Copies the labels into `buf`, which must hold `len ≥ n` values.
enum RolesimStatus rolesim_partition_copy(const struct RolesimPartition *partition,
                                          uintptr_t *buf,
                                          uintptr_t len);

void rolesim_partition_free(struct RolesimPartition *partition);

// Normalized mutual information of two partitions of the same nodes.
enum RolesimStatus rolesim_nmi(const struct RolesimPartition *a,
                               const struct RolesimPartition *b,
                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROLESIM_H */
