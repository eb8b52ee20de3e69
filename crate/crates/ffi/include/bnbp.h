#ifndef BNBP_H
#define BNBP_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum BnbpStatus {
  BNBP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  BNBP_STATUS_NULL_POINTER = 1,
  /**
   * A parameter or setting is invalid.
   */
  BNBP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The operation is undefined on the given input.
   */
  BNBP_STATUS_DOMAIN = 3,
  /**
   * A numerical routine failed.
   */
  BNBP_STATUS_NUMERIC = 4,
  /**
   * The requested expectation is infinite.
   */
  BNBP_STATUS_DIVERGENT = 5,
  /**
   * Malformed input data or an unreadable file.
   */
  BNBP_STATUS_DATA = 6,
  /**
   * An output buffer is too small; the required length was written.
   */
  BNBP_STATUS_BUFFER_TOO_SMALL = 7,
  /**
   * Internal panic (a bug).
   */
  BNBP_STATUS_PANIC = 8,
} BnbpStatus;

/**
 * Parsed bag-of-words corpus.
 */
typedef struct BnbpCorpus BnbpCorpus;

/**
 * Posterior sampler for the hierarchical admixture model.
 */
typedef struct BnbpSampler BnbpSampler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *bnbp_last_error_message(void);

/**
 * Expected number of data points of the negative binomial process over a
 * beta process. `asymptote` may be null.
 */
enum BnbpStatus bnbp_expected_points(double r,
                                     double mass,
                                     double concentration,
                                     double *exact,
                                     double *asymptote);

/**
 * Expected number of clusters. `discount` = 0 gives the beta process, a
 * value in (0, 1) the three-parameter process. `asymptote` may be null.
 */
enum BnbpStatus bnbp_expected_clusters(double r,
                                       double mass,
                                       double concentration,
                                       double discount,
                                       double *exact,
                                       double *asymptote);

/**
 * Expected number of data points of the three-parameter process.
 */
enum BnbpStatus bnbp_expected_points_3bp(double r,
                                         double mass,
                                         double concentration,
                                         double discount,
                                         double *exact);

/**
 * Expected number of clusters of size exactly `j` (beta process).
 * `asymptote` may be null.
 */
enum BnbpStatus bnbp_expected_clusters_of_size(uint64_t j,
                                               double r,
                                               double mass,
                                               double concentration,
                                               double *exact,
                                               double *asymptote);

/**
 * Log probability of `k` under the negative binomial law NB(r, b).
 */
enum BnbpStatus bnbp_negbin_ln_pmf(uint64_t k, double r, double b, double *out);

/**
 * Parses a corpus from text in the library's corpus format.
 */
enum BnbpStatus bnbp_corpus_from_text(const char *text, struct BnbpCorpus **out);

/**
 * Reads a corpus file.
 */
enum BnbpStatus bnbp_corpus_read(const char *path, struct BnbpCorpus **out);

enum BnbpStatus bnbp_corpus_num_documents(const struct BnbpCorpus *corpus, size_t *out);

/**
 * Releases a corpus; null is ignored.
 */
void bnbp_corpus_free(struct BnbpCorpus *corpus);

/**
 * Creates a sampler over `corpus` from `key = value` settings (one per
 * line; null or empty for defaults). The corpus may be freed afterwards.
 */
enum BnbpStatus bnbp_sampler_new(const struct BnbpCorpus *corpus,
                                 const char *settings,
                                 struct BnbpSampler **out);

/**
 * Runs `sweeps` Gibbs sweeps.
 */
enum BnbpStatus bnbp_sampler_sweep(struct BnbpSampler *sampler, size_t sweeps);

/**
 * Number of instantiated components.
 */
enum BnbpStatus bnbp_sampler_num_components(const struct BnbpSampler *sampler, size_t *out);

/**
 * Number of components whose shared weight exceeds `threshold`.
 */
enum BnbpStatus bnbp_sampler_used_components(const struct BnbpSampler *sampler,
                                             double threshold,
                                             size_t *out);

/**
 * Copies the shared component weights into `buffer` of length `capacity`
 * and writes their count to `written`. If the buffer is too small, nothing
 * is copied, the required length is written and `BufferTooSmall` returned.
 */
enum BnbpStatus bnbp_sampler_copy_weights(const struct BnbpSampler *sampler,
                                          double *buffer,
                                          size_t capacity,
                                          size_t *written);

/**
 * Releases a sampler; null is ignored.
 */
void bnbp_sampler_free(struct BnbpSampler *sampler);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BNBP_H */
