#ifndef ENTROPICA_H
#define ENTROPICA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ENTROPICA_API __declspec(dllexport)
#else
#define ENTROPICA_API __attribute__((visibility("default")))
#endif

typedef enum entropica_status {
  ENTROPICA_OK = 0,
  ENTROPICA_INVALID_ARGUMENT = 1,
  ENTROPICA_UNKNOWN_NAME = 2,
  ENTROPICA_CONSISTENCY_VIOLATION = 3,
  ENTROPICA_PRECISION_UNREACHABLE = 4,
  ENTROPICA_BOUNDARY = 5,
  ENTROPICA_ZERO_MASS = 6,
  ENTROPICA_ZERO_CYLINDER = 7,
  ENTROPICA_ZERO_CELL = 8,
  ENTROPICA_EMPTY_CELL = 9,
  ENTROPICA_SEARCH_EXHAUSTED = 10,
  ENTROPICA_UNSUPPORTED = 11,
  ENTROPICA_CONFIG = 12,
  ENTROPICA_IO = 13,
  ENTROPICA_PARSE = 14,
  ENTROPICA_INTERNAL = 15
} entropica_status;

typedef struct entropica_config entropica_config;
typedef struct entropica_result entropica_result;

ENTROPICA_API const char* entropica_version(void);
ENTROPICA_API const char* entropica_status_string(entropica_status status);
/* Message of the last failure on the calling thread; "" if none. */
ENTROPICA_API const char* entropica_last_error(void);

ENTROPICA_API size_t entropica_experiment_count(void);
/* NULL when index is out of range. */
ENTROPICA_API const char* entropica_experiment_name(size_t index);

ENTROPICA_API entropica_status entropica_config_create(entropica_config** out);
ENTROPICA_API entropica_status entropica_config_parse(const char* text, entropica_config** out);
ENTROPICA_API entropica_status entropica_config_load(const char* path, entropica_config** out);
/* Adds or replaces a key. */
ENTROPICA_API entropica_status entropica_config_set(entropica_config* config, const char* key, const char* value);
/* NULL when the key is absent; valid until the key changes. */
ENTROPICA_API const char* entropica_config_get(const entropica_config* config, const char* key);
ENTROPICA_API void entropica_config_destroy(entropica_config* config);

/* threads = 0 uses every hardware thread; rows do not depend on it. */
ENTROPICA_API entropica_status entropica_run(const char* experiment, const entropica_config* config,
                                             unsigned threads, entropica_result** out);
/* The main table as CSV text, valid until the result is destroyed. */
ENTROPICA_API const char* entropica_result_csv(const entropica_result* result);
ENTROPICA_API size_t entropica_result_summary_count(const entropica_result* result);
ENTROPICA_API const char* entropica_result_summary_key(const entropica_result* result, size_t index);
ENTROPICA_API const char* entropica_result_summary_value(const entropica_result* result, size_t index);
/* The effective value of a config key, defaults included. */
ENTROPICA_API const char* entropica_result_config_value(const entropica_result* result, const char* key);
/* Writes <out_path>, extra tables beside it, and <out_path>.meta. */
ENTROPICA_API entropica_status entropica_result_write(const entropica_result* result, const char* out_path,
                                                      double wall_seconds);
ENTROPICA_API void entropica_result_destroy(entropica_result* result);

/* Code length of a bit string (one bit per byte, 0 or 1) under a named
   compressor. */
ENTROPICA_API entropica_status entropica_code_length(const char* compressor, const uint8_t* bits, size_t length,
                                                     size_t* out);
/* Deficiency estimate of a bit string against a named Cantor-space measure;
   *infinite is set when a prefix has certified zero mass. */
ENTROPICA_API entropica_status entropica_deficiency(const char* measure, const char* compressor, const uint8_t* bits,
                                                    size_t length, size_t depth, double* value, int* infinite);

#ifdef __cplusplus
}
#endif

#endif
