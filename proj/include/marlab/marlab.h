#ifndef MARLAB_H
#define MARLAB_H

/* C interface to the exact missing-data laboratory. Models cross the
 * boundary as opaque handles, results as status codes plus heap strings.
 * Every char* the library hands out is released with marlab_string_free;
 * models with marlab_model_free. All functions are thread-compatible:
 * distinct handles can be used from distinct threads. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MARLAB_API __declspec(dllexport)
#else
#define MARLAB_API __attribute__((visibility("default")))
#endif

typedef enum marlab_status {
    MARLAB_OK = 0,           /* command completed, report in *out */
    MARLAB_ASSERT_FAIL = 1,  /* asserted property is false; report in *out */
    MARLAB_PARSE_ERROR = 2,  /* model text rejected; message in *error */
    MARLAB_ERROR = 3,        /* domain or internal failure; message in *error */
    MARLAB_BAD_ARGUMENT = 4  /* null or malformed call arguments */
} marlab_status;

/* A parsed, validated model: a full density, a selection pair or a
 * pattern mixture, as the file declared. */
typedef struct marlab_model marlab_model;

/* Static version string; do not free. */
MARLAB_API const char* marlab_version(void);

MARLAB_API void marlab_string_free(char* s);
MARLAB_API void marlab_model_free(marlab_model* model);

/* Strict parse: grammar plus probability invariants. On success *out_model
 * owns the model. On failure *error carries the line-tagged message. */
MARLAB_API marlab_status marlab_model_parse(const char* text, marlab_model** out_model,
                                            char** error);

/* Lenient parse followed by an invariant report. MARLAB_ASSERT_FAIL means
 * the file parsed but breaks at least one invariant; the report in *out
 * lists every one. Grammar errors are MARLAB_PARSE_ERROR as usual. */
MARLAB_API marlab_status marlab_validate(const char* text, char** out, char** error);

/* Re-express the model in the selection (as_mixture = 0) or
 * pattern-mixture (as_mixture != 0) factorization, as model file text. */
MARLAB_API marlab_status marlab_factorize(const marlab_model* model, int as_mixture, char** out,
                                          char** error);

/* List the observable data event partition of the model's space. */
MARLAB_API marlab_status marlab_events(const marlab_model* model, char** out, char** error);

/* Per-event constancy report plus the everywhere-MAR verdict with its
 * two-point witness when negative. Always MARLAB_OK on success: the
 * verdict is the report's content, not the status. */
MARLAB_API marlab_status marlab_classify(const marlab_model* model, char** out, char** error);

/* The observed-data mechanism table P(R = r | Y_obs), eventwise sup of
 * the restricted range (inf when use_inf != 0). */
MARLAB_API marlab_status marlab_pryobs(const marlab_model* model, int use_inf, char** out,
                                       char** error);

/* Assert one property on every applicable event. property is one of
 * "drawn-at-random", "shape", "standard-equation". MARLAB_ASSERT_FAIL
 * carries the witness report in *out. */
MARLAB_API marlab_status marlab_check(const marlab_model* model, const char* property, char** out,
                                      char** error);

/* Assert that f(y) * P(R|Y_obs) rebuilds the full density exactly. */
MARLAB_API marlab_status marlab_reconstruct(const marlab_model* model, char** out, char** error);

typedef struct marlab_generate_options {
    /* "constant", "common-observed", "monotone" or "mnar". */
    const char* kind;
    uint64_t seed;
    unsigned max_denominator; /* 0 picks the default (64) */
    size_t n_variables;       /* 0 picks the default (2) */
    size_t n_levels;          /* 0 picks the default (2) */
    int include_all_zeros;    /* monotone only: chain ends in all-zeros */
    /* Optional explicit pattern set as bitstrings, all-ones first.
     * Leave patterns NULL for each kind's natural default. */
    const char* const* patterns;
    size_t n_patterns;
} marlab_generate_options;

/* Emit a seeded random selection model file of the requested kind. */
MARLAB_API marlab_status marlab_generate(const marlab_generate_options* options, char** out,
                                         char** error);

/* CSV of n_rows exact draws with unobserved cells written NA. */
MARLAB_API marlab_status marlab_sample(const marlab_model* model, size_t n_rows, uint64_t seed,
                                       char** out, char** error);

/* Exact complete-case vs marginal mean of one variable (NULL or ""
 * selects the first variable). */
MARLAB_API marlab_status marlab_bias(const marlab_model* model, const char* variable, char** out,
                                     char** error);

typedef struct marlab_plot_options {
    int figure; /* 1 full distribution, 2 event panel, 3 shape comparison */
    int ascii;  /* nonzero renders text, zero renders SVG */
    /* Optional event selection: a pattern bitstring, optionally with the
     * observed level codes (one per observed position, index order). */
    const char* pattern;
    const int* observed;
    size_t n_observed;
} marlab_plot_options;

MARLAB_API marlab_status marlab_plot(const marlab_model* model,
                                     const marlab_plot_options* options, char** out, char** error);

#ifdef __cplusplus
}
#endif

#endif /* MARLAB_H */
