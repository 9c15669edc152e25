/*
 * factorbench C API.
 *
 * Every function returns an fb_status. On failure a message describing the
 * error is available from fb_last_error() on the calling thread until the
 * next failing call on that thread. Handles are opaque and owned by the
 * caller; release them with the matching *_destroy function.
 */
#ifndef FACTORBENCH_H
#define FACTORBENCH_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(FACTORBENCH_BUILDING)
#    define FB_API __declspec(dllexport)
#  else
#    define FB_API __declspec(dllimport)
#  endif
#else
#  define FB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fb_status {
  FB_OK = 0,
  FB_ERR_INVALID_ARGUMENT = 1, /* null pointer, bad enum value, short buffer */
  FB_ERR_DOMAIN = 2,           /* value outside an operation's domain */
  FB_ERR_INGESTION = 3,        /* malformed or inconsistent input data */
  FB_ERR_ESTIMATION = 4,       /* collinear design, too few observations */
  FB_ERR_CONFIG = 5,           /* bad or missing setting */
  FB_ERR_LOOKUP = 6,           /* unknown stock */
  FB_ERR_IO = 7,
  FB_ERR_INTERNAL = 8
} fb_status;

typedef enum fb_return_kind { FB_DISCRETE = 0, FB_CONTINUOUS = 1 } fb_return_kind;
typedef enum fb_model { FB_CAPM = 0, FB_FF3 = 1 } fb_model;
typedef enum fb_method {
  FB_OLS = 0,
  FB_MLE = 1,
  FB_BAYES_BENCHMARK = 2, /* robust Bayes, g = max(n, p^2) */
  FB_BAYES_LEB = 3,       /* robust Bayes, g = max(F - 1, 0) */
  FB_BAYES_CONJUGATE = 4  /* conjugate prior, V = g X'X with benchmark g */
} fb_method;
typedef enum fb_g_rule { FB_G_BENCHMARK = 0, FB_G_LOCAL_EB = 1, FB_G_FIXED = 2 } fb_g_rule;

FB_API const char* fb_version(void);
FB_API const char* fb_last_error(void);
FB_API const char* fb_status_name(fb_status status);

/* ---- Run configuration and commands ---------------------------------- */

typedef struct fb_config fb_config;

FB_API fb_status fb_config_create(fb_config** out);
FB_API void fb_config_destroy(fb_config* config);
/* Keys are the long flag names without dashes, e.g. "required-len". */
FB_API fb_status fb_config_set(fb_config* config, const char* key, const char* value);
/* Keys already set are kept; file values fill the rest. */
FB_API fb_status fb_config_merge_file(fb_config* config, const char* path);

typedef struct fb_run_summary {
  int exit_code;     /* 0 ok, 3 exclusions under strict mode */
  size_t exclusions; /* per-stock failures recorded in the report */
  size_t outputs;    /* files written */
} fb_run_summary;

/* command: ingest, estimate, rank, compare, normality or simulate. */
FB_API fb_status fb_run_command(const char* command, const fb_config* config,
                                fb_run_summary* summary);

/* ---- Panels ---------------------------------------------------------- */

typedef struct fb_panel fb_panel;

/* Loads the window of an ingest/simulate output directory. which: 0 full,
 * 1 early, 2 late. */
FB_API fb_status fb_panel_load(const char* data_dir, fb_return_kind kind, int which,
                               fb_panel** out);
FB_API void fb_panel_destroy(fb_panel* panel);
FB_API size_t fb_panel_stock_count(const fb_panel* panel);
FB_API size_t fb_panel_month_count(const fb_panel* panel);
/* The returned string lives as long as the panel. */
FB_API fb_status fb_panel_stock_label(const fb_panel* panel, size_t index, const char** label);
FB_API fb_status fb_panel_excess(const fb_panel* panel, size_t index, double* out, size_t cap);

/* Fits one stock. theta receives p values (2 CAPM, 4 FF3). prior may be NULL
 * unless the method is Bayesian, in which case the prior mean is the OLS fit
 * of the same stock on `prior`. */
FB_API fb_status fb_panel_fit(const fb_panel* panel, const fb_panel* prior, const char* stock,
                              fb_model model, fb_method method, double* theta, size_t cap,
                              double* rss);

/* ---- Numerical primitives (row-major X, first column all ones) ------- */

FB_API fb_status fb_ols(const double* y, const double* x, size_t n, size_t p, double* theta,
                        double* rss);
FB_API fb_status fb_robust_bayes(const double* y, const double* x, size_t n, size_t p,
                                 const double* theta0, double g, double* theta, double* weight);
FB_API fb_status fb_conjugate_bayes(const double* y, const double* x, size_t n, size_t p,
                                    const double* theta0, const double* precision,
                                    double* theta);
FB_API fb_status fb_select_g(fb_g_rule rule, size_t n, size_t p, double f_stat,
                             double fixed_g, double* g);
FB_API fb_status fb_shapiro_wilk(const double* x, size_t n, double* w, double* p_value);
FB_API fb_status fb_geometric_average(const double* values, size_t n, fb_return_kind kind,
                                      double* out);

#ifdef __cplusplus
}
#endif

#endif /* FACTORBENCH_H */
