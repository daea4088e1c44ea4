#ifndef VIRTUAL_EYES_H
#define VIRTUAL_EYES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum VeStatus {
  VE_STATUS_OK = 0,
  VE_STATUS_NULL_POINTER = 1,
  VE_STATUS_INVALID_ARGUMENT = 2,
  VE_STATUS_PANIC = 3,
  VE_STATUS_IO = 10,
  VE_STATUS_NOT_DICOM = 11,
  VE_STATUS_UNSUPPORTED_TRANSFER_SYNTAX = 12,
  VE_STATUS_MALFORMED = 13,
  VE_STATUS_MISSING_GEOMETRY = 14,
  VE_STATUS_MALFORMED_SERIES = 15,
  VE_STATUS_DUPLICATE_OUTPUT = 16,
  VE_STATUS_SCHEMA = 17,
  VE_STATUS_LABEL_CONFLICT = 18,
  VE_STATUS_RANGE = 19,
  VE_STATUS_EMPTY_INPUT = 20,
  VE_STATUS_DEGENERATE_LABELS = 21,
  VE_STATUS_DEGENERATE_VARIANCE = 22,
  VE_STATUS_LENGTH_MISMATCH = 23,
  VE_STATUS_CONFIG = 24,
} VeStatus;

typedef enum VePoolMethod {
  VE_POOL_METHOD_MEAN = 0,
  VE_POOL_METHOD_MAX = 1,
  VE_POOL_METHOD_TOP_K = 2,
} VePoolMethod;

// Validated slice-score table.
typedef struct VeScoreTable VeScoreTable;

// One axial slice in Hounsfield units.
typedef struct VeSlice VeSlice;

typedef struct VeLungConfig {
  double hu_low;
  double hu_high;
  size_t open_radius;
  size_t close_radius;
  double min_region_frac;
  double min_lung_ratio;
  // 4 or 8.
  uint32_t connectivity;
} VeLungConfig;

typedef struct VeLungStats {
  double area_ratio;
  bool lung_flag;
} VeLungStats;

typedef struct VeDeLong {
  double auc_a;
  double auc_b;
  double delta;
  double variance;
  double z;
  double p_two_sided;
} VeDeLong;

typedef struct VeKs {
  double d;
  double p;
} VeKs;

typedef struct VeBlandAltman {
  double bias;
  double sd;
  double loa_low;
  double loa_high;
} VeBlandAltman;

typedef struct VeQcSummary {
  uint64_t total_series;
  uint64_t accepted_series;
  uint64_t total_raw_images;
  uint64_t total_kept_images;
  double discard_proportion;
  uint64_t skipped_files;
} VeQcSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *ve_last_error_message(void);

// Static name of a status code, such as `"DEGENERATE_VARIANCE"`.
const char *ve_status_name(enum VeStatus status);

const char *ve_version(void);

// Reads one DICOM file and converts its pixels to HU.
enum VeStatus ve_slice_read_dicom(const char *path, struct VeSlice **out);

// Copies `rows * cols` row-major HU values into a new slice.
enum VeStatus ve_slice_from_hu(size_t rows, size_t cols, const float *hu, struct VeSlice **out);

void ve_slice_free(struct VeSlice *slice);

// Number of rows, or 0 for a null handle.
size_t ve_slice_rows(const struct VeSlice *slice);

// Number of columns, or 0 for a null handle.
size_t ve_slice_cols(const struct VeSlice *slice);

// Copies the HU values; `len` must equal rows * cols.
enum VeStatus ve_slice_copy_hu(const struct VeSlice *slice, float *out, size_t len);

enum VeStatus ve_lung_config_default(struct VeLungConfig *out);

// Segments the lung on one slice. `config` may be null for the defaults.
// When `mask` is non-null it receives rows * cols bytes of 0/1, and
// `mask_len` must match.
enum VeStatus ve_detect_lung_slice(const struct VeSlice *slice,
                                   const struct VeLungConfig *config,
                                   struct VeLungStats *out,
                                   uint8_t *mask,
                                   size_t mask_len);

// `hu[i] = slope * raw[i] + intercept` for `n` values.
enum VeStatus ve_hu_convert(const int32_t *raw,
                            size_t n,
                            double slope,
                            double intercept,
                            float *hu);

// Longest run of non-zero flags, inclusive bounds. `found` is set to
// false, and the bounds left untouched, when no flag is set.
enum VeStatus ve_extract_longest_block(const uint8_t *flags,
                                       size_t n,
                                       bool *found,
                                       size_t *start,
                                       size_t *end);

// Labels are 0 or 1.
enum VeStatus ve_auc(const double *scores, const uint8_t *labels, size_t n, double *out);

enum VeStatus ve_delong(const double *scores_a,
                        const double *scores_b,
                        const uint8_t *labels,
                        size_t n,
                        struct VeDeLong *out);

enum VeStatus ve_ks(const double *a, size_t n_a, const double *b, size_t n_b, struct VeKs *out);

enum VeStatus ve_brier(const double *probs, const uint8_t *labels, size_t n, double *out);

enum VeStatus ve_bland_altman(const double *a,
                              const double *b,
                              size_t n,
                              struct VeBlandAltman *out);

enum VeStatus ve_scores_load(const char *path, struct VeScoreTable **out);

void ve_scores_free(struct VeScoreTable *table);

// Number of slice rows, or 0 for a null handle.
size_t ve_scores_row_count(const struct VeScoreTable *table);

// Number of distinct patients, or 0 for a null handle.
size_t ve_scores_patient_count(const struct VeScoreTable *table);

// Pools to one score per patient, ordered by patient id. `capacity` must
// be at least the patient count; `labels` may be null. `k` is ignored
// unless the method is top-k.
enum VeStatus ve_scores_pool(const struct VeScoreTable *table,
                             enum VePoolMethod method,
                             size_t k,
                             double *scores,
                             uint8_t *labels,
                             size_t capacity);

// Pools and writes the pooled CSV to `path`.
enum VeStatus ve_scores_write_pooled(const struct VeScoreTable *table,
                                     enum VePoolMethod method,
                                     size_t k,
                                     const char *path);

// Runs the whole QC pipeline. `config_path` may be null for the defaults;
// `workers` of 0 keeps the configured worker count.
enum VeStatus ve_run_qc(const char *input_dir,
                        const char *output_dir,
                        const char *config_path,
                        size_t workers,
                        bool overwrite,
                        bool montage,
                        struct VeQcSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VIRTUAL_EYES_H */
