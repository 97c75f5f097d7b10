#ifndef MEANING_H
#define MEANING_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MeaningStatus {
  MEANING_STATUS_OK = 0,
  MEANING_STATUS_IO = 1,
  MEANING_STATUS_INVALID_ARGUMENT = 2,
  MEANING_STATUS_PARSE = 3,
  MEANING_STATUS_DOMAIN = 4,
  MEANING_STATUS_RESOURCE_LIMIT = 5,
  MEANING_STATUS_NOT_APPLICABLE = 6,
  MEANING_STATUS_INTERNAL = 7,
} MeaningStatus;

/**
 * The result of running a scenario's episode.
 */
typedef struct MeaningEpisode MeaningEpisode;

/**
 * A parsed scenario.
 */
typedef struct MeaningScenario MeaningScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last call on this thread if it failed, otherwise null.
 * Valid until the next call on the same thread.
 */
const char *meaning_last_error(void);

/**
 * Library version as a static string.
 */
const char *meaning_version(void);

/**
 * Parses a scenario from YAML text.
 *
 * # Safety
 * `yaml` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum MeaningStatus meaning_scenario_from_yaml(const char *yaml, struct MeaningScenario **out);

/**
 * Reads and parses a scenario file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum MeaningStatus meaning_scenario_from_path(const char *path, struct MeaningScenario **out);

/**
 * # Safety
 * `scn` must be null or a handle from this library, not yet freed.
 */
void meaning_scenario_free(struct MeaningScenario *scn);

/**
 * # Safety
 * `scn` must be a live scenario handle.
 */
enum MeaningStatus meaning_scenario_set_seed(struct MeaningScenario *scn, uint64_t seed);

/**
 * Number of statements in the language of `organism`, or of the whole
 * scenario when `organism` is null.
 *
 * # Safety
 * `scn` must be a live handle, `organism` null or a NUL-terminated string,
 * `out` a valid pointer.
 */
enum MeaningStatus meaning_scenario_language_size(const struct MeaningScenario *scn,
                                                  const char *organism,
                                                  size_t *out);

/**
 * Runs the scenario's episode.
 *
 * # Safety
 * `scn` must be a live handle and `out` a valid pointer.
 */
enum MeaningStatus meaning_episode_run(const struct MeaningScenario *scn,
                                       struct MeaningEpisode **out);

/**
 * # Safety
 * `ep` must be null or a handle from this library, not yet freed.
 */
void meaning_episode_free(struct MeaningEpisode *ep);

/**
 * Steps, spoken steps, affected steps and meant steps.
 *
 * # Safety
 * `ep` must be a live handle; each output pointer may be null.
 */
enum MeaningStatus meaning_episode_counts(const struct MeaningEpisode *ep,
                                          size_t *steps,
                                          size_t *spoken,
                                          size_t *affected,
                                          size_t *meant);

/**
 * Matched over spoken steps. `MEANING_STATUS_NOT_APPLICABLE` if nothing was said.
 *
 * # Safety
 * `ep` must be a live handle and `out` a valid pointer.
 */
enum MeaningStatus meaning_episode_match_rate(const struct MeaningEpisode *ep, double *out);

/**
 * Meant over affected steps. `MEANING_STATUS_NOT_APPLICABLE` if no one was affected.
 *
 * # Safety
 * `ep` must be a live handle and `out` a valid pointer.
 */
enum MeaningStatus meaning_episode_meaning_rate(const struct MeaningEpisode *ep, double *out);

/**
 * The full episode report as JSON. Free with [`meaning_string_free`].
 *
 * # Safety
 * `ep` must be a live handle and `out` a valid pointer.
 */
enum MeaningStatus meaning_episode_to_json(const struct MeaningEpisode *ep, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void meaning_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEANING_H */
