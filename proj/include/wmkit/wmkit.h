/* wmkit — blind image watermarking, watermark-based detection, and
 * adversarial evasion attacks behind a plain C interface.
 *
 * Conventions:
 *   - Every fallible function returns a wmk_status (WMK_OK = 0 on success);
 *     on failure wmk_last_error() describes the problem for the calling
 *     thread and all output parameters are left untouched.
 *   - Objects come back through out-parameters as opaque handles owned by
 *     the caller; release them with the matching *_free function.
 *   - Watermarks travel as NUL-terminated '0'/'1' strings of length n.
 *   - Structured configuration and results travel as JSON text (the same
 *     schema the experiment manifest uses); strings returned by the library
 *     are released with wmk_string_free.
 *   - Detector mode strings are "single" and "double".
 */
#ifndef WMKIT_H
#define WMKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WMK_API __declspec(dllexport)
#else
#define WMK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wmk_status {
  WMK_OK = 0,
  WMK_ERR_IO = 1,
  WMK_ERR_FORMAT = 2,
  WMK_ERR_DIMENSION = 3,
  WMK_ERR_CAPACITY = 4,
  WMK_ERR_DOMAIN = 5,
  WMK_ERR_INFEASIBLE = 6,
  WMK_ERR_TRAINING = 7,
  WMK_ERR_INIT_FAILURE = 8,
  WMK_ERR_BUDGET = 9,
  WMK_ERR_INVALID_ARGUMENT = 10,
  WMK_ERR_INTERNAL = 11
} wmk_status;

typedef struct wmk_image wmk_image;
typedef struct wmk_codec wmk_codec;

/* Library version string, e.g. "0.1.0". */
WMK_API const char* wmk_version(void);
/* Message for the most recent failure on this thread ("" if none). */
WMK_API const char* wmk_last_error(void);
/* Stable name for a status code, e.g. "invalid-argument". */
WMK_API const char* wmk_status_name(int status);
WMK_API void wmk_string_free(char* s);

/* ---- images: HxWx3 interleaved RGB, doubles in [0,1] ---- */

WMK_API int wmk_image_load(const char* path, wmk_image** out);
WMK_API int wmk_image_save_png(const wmk_image* img, const char* path);
/* pixels may be NULL for an all-zero image; otherwise h*w*3 doubles. */
WMK_API int wmk_image_new(int h, int w, const double* pixels, wmk_image** out);
WMK_API void wmk_image_free(wmk_image* img);
WMK_API int wmk_image_dims(const wmk_image* img, int* h, int* w);
/* Borrowed pointer into the handle, h*w*3 doubles; valid until free. */
WMK_API const double* wmk_image_pixels(const wmk_image* img);
WMK_API int wmk_image_resize(const wmk_image* img, int h, int w, wmk_image** out);
/* Deterministic procedural test image (gradients/sinusoids/blobs/...). */
WMK_API int wmk_image_synth(int h, int w, uint64_t seed, wmk_image** out);
/* L-inf and L2 distance plus SSIM between same-shaped images; any of the
 * result pointers may be NULL. */
WMK_API int wmk_image_distance(const wmk_image* a, const wmk_image* b, double* linf, double* l2,
                               double* ssim);

/* ---- codecs ---- */

WMK_API int wmk_codec_load(const char* path, wmk_codec** out);
WMK_API int wmk_codec_save(const wmk_codec* codec, const char* path);
WMK_API void wmk_codec_free(wmk_codec* codec);
/* Watermark length n. */
WMK_API int wmk_codec_bits(const wmk_codec* codec);
/* "dwt-dct-qim" or "spread-spectrum"; borrowed static string. */
WMK_API const char* wmk_codec_kind(const wmk_codec* codec);
WMK_API int wmk_codec_qim_new(int n, double delta, uint64_t key, wmk_codec** out);
WMK_API int wmk_codec_spread_new(int n, int h, int w, double alpha, uint64_t seed,
                                 wmk_codec** out);

/* Train a spread-spectrum codec. dataset is an image directory or
 * "synth[:tag]"; config_json keys (all optional): n, alpha, epochs,
 * batch_size, learning_rate, seed (decimal string), adversarial,
 * sample_count, height, width. */
WMK_API int wmk_codec_train(const char* dataset, const char* config_json, wmk_codec** out);

/* Smallest QIM quantization step that survives an 8-bit round trip on every
 * sampled image (see calibrate CLI verb). */
WMK_API int wmk_calibrate_qim_delta(const char* dataset, int count, int n, uint64_t key,
                                    uint64_t seed, double* out_delta);

/* ---- watermarks and coding ---- */

/* out must hold n+1 bytes. */
WMK_API int wmk_random_watermark(int n, uint64_t seed, char* out);
WMK_API int wmk_embed(const wmk_codec* codec, const wmk_image* img, const char* bits,
                      wmk_image** out);
/* out_bits must hold n+1 bytes. */
WMK_API int wmk_decode(const wmk_codec* codec, const wmk_image* img, char* out_bits);
/* out_soft must hold n doubles (decoder scores in (0,1)). */
WMK_API int wmk_decode_soft(const wmk_codec* codec, const wmk_image* img, double* out_soft);
/* Fraction of agreeing positions between two equal-length bit strings. */
WMK_API int wmk_bitwise_accuracy(const char* a, const char* b, double* out);

/* ---- detection and theory ---- */

/* flagged: 1 = AI-generated. Either of flagged/ba may be NULL. */
WMK_API int wmk_detect(const wmk_codec* codec, const char* groundtruth, double tau,
                       const char* mode, const wmk_image* img, int* flagged, double* ba);
/* Smallest grid threshold with false-positive rate < eta. */
WMK_API int wmk_calibrate_tau(int n, double eta, const char* mode, double* out_tau);
/* Exact false-positive rate of a detector at threshold tau. */
WMK_API int wmk_fpr(int n, double tau, const char* mode, double* out);
/* Theoretical evasion lower bound for the random-target attack. */
WMK_API int wmk_evasion_bound(int n, double epsilon, double tau, const char* mode, double* out);
/* Transfer-attack bound under (beta, gamma)-similar decoders. */
WMK_API int wmk_surrogate_bound(int n, double epsilon, double tau, double beta, double gamma,
                                const char* mode, double* out);

/* ---- post-processing and attacks ---- */

/* kind: jpeg | gaussian-noise | gaussian-blur | brightness-contrast. */
WMK_API int wmk_postprocess(const wmk_image* img, const char* kind, double parameter,
                            uint64_t seed, wmk_image** out);

/* Run one attack on one watermarked image. attack_json uses the manifest
 * attack schema (kind: whitebox-flip | whitebox-random | surrogate | query |
 * one of the post-processing kinds), plus a "groundtruth" bit string which
 * the query attack's detector oracle requires. Either out parameter may be
 * NULL; *out_json gets a JSON object with ba, constraint_satisfied, linf,
 * l2, ssim, r_final, iterations, queries. */
WMK_API int wmk_attack(const wmk_codec* codec, const wmk_image* watermarked,
                       const char* attack_json, wmk_image** out_adv, char** out_json);

/* Tune one post-processing method to a target evasion rate against the
 * detector: one groundtruth watermark drawn from `seed` is embedded in every
 * sampled image. *out_json gets kind, parameter, achieved_rate, mean_linf,
 * reached. */
WMK_API int wmk_tune_baseline(const wmk_codec* codec, const char* kind, const char* dataset,
                              int count, double tau, const char* mode, double target_rate,
                              uint64_t seed, char** out_json);

/* ---- experiment harness ---- */

/* Run a full experiment from a JSON config and write results.csv,
 * aggregates.csv, theory.csv, manifest.json, timings.txt (and query_log.csv
 * when a query attack ran) into its output_dir. *all_ok (may be NULL) is 1
 * only if every row completed without error. */
WMK_API int wmk_run_experiment(const char* config_json, int* all_ok);

#ifdef __cplusplus
}
#endif

#endif /* WMKIT_H */
