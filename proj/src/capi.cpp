#include "factorbench/factorbench.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "factorbench/diagnostics.hpp"
#include "factorbench/error.hpp"
#include "factorbench/estimators.hpp"
#include "factorbench/evaluation.hpp"
#include "factorbench/pipeline.hpp"
#include "factorbench/returns.hpp"

struct fb_config {
  fb::RunConfig config;
};

struct fb_panel {
  fb::AlignedPanel panel;
};

namespace {

thread_local std::string g_last_error;

fb_status fail(fb_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

fb_status map_code(fb::ErrorCode code) {
  switch (code) {
    case fb::ErrorCode::Domain: return FB_ERR_DOMAIN;
    case fb::ErrorCode::Ingestion: return FB_ERR_INGESTION;
    case fb::ErrorCode::Estimation: return FB_ERR_ESTIMATION;
    case fb::ErrorCode::Config: return FB_ERR_CONFIG;
    case fb::ErrorCode::Lookup: return FB_ERR_LOOKUP;
    case fb::ErrorCode::Io: return FB_ERR_IO;
  }
  return FB_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into status codes. Nothing may escape
// across the C boundary.
template <typename F>
fb_status guarded(F&& body) {
  try {
    body();
    return FB_OK;
  } catch (const fb::Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(FB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FB_ERR_INTERNAL, "unknown error");
  }
}

fb_status null_arg(const char* what) {
  return fail(FB_ERR_INVALID_ARGUMENT, std::string(what) + " must not be null");
}

fb::DesignSystem design_from(const double* y, const double* x, size_t n, size_t p) {
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(p);
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y, rows);
  Eigen::MatrixXd X =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          x, rows, cols);
  return fb::make_design(std::move(yv), std::move(X));
}

void copy_out(const Eigen::VectorXd& v, double* out) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v(i);
}

bool valid_kind(fb_return_kind k) { return k == FB_DISCRETE || k == FB_CONTINUOUS; }

fb::ReturnKind to_kind(fb_return_kind k) {
  return k == FB_DISCRETE ? fb::ReturnKind::Discrete : fb::ReturnKind::Continuous;
}

}  // namespace

extern "C" {

const char* fb_version(void) { return "1.0.0"; }

const char* fb_last_error(void) { return g_last_error.c_str(); }

const char* fb_status_name(fb_status status) {
  switch (status) {
    case FB_OK: return "ok";
    case FB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FB_ERR_DOMAIN: return "domain error";
    case FB_ERR_INGESTION: return "ingestion error";
    case FB_ERR_ESTIMATION: return "estimation error";
    case FB_ERR_CONFIG: return "configuration error";
    case FB_ERR_LOOKUP: return "lookup error";
    case FB_ERR_IO: return "i/o error";
    case FB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

fb_status fb_config_create(fb_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new fb_config(); });
}

void fb_config_destroy(fb_config* config) { delete config; }

fb_status fb_config_set(fb_config* config, const char* key, const char* value) {
  if (!config) return null_arg("config");
  if (!key || !value) return null_arg("key/value");
  return guarded([&] { config->config.set(key, value); });
}

fb_status fb_config_merge_file(fb_config* config, const char* path) {
  if (!config) return null_arg("config");
  if (!path) return null_arg("path");
  return guarded([&] { config->config.merge_file(path); });
}

fb_status fb_run_command(const char* command, const fb_config* config,
                         fb_run_summary* summary) {
  if (!command) return null_arg("command");
  if (!config) return null_arg("config");
  return guarded([&] {
    const auto result = fb::run_command(command, config->config);
    if (summary) {
      summary->exit_code = result.exit_code;
      summary->exclusions = result.exclusions;
      summary->outputs = result.outputs.size();
    }
  });
}

fb_status fb_panel_load(const char* data_dir, fb_return_kind kind, int which, fb_panel** out) {
  if (!data_dir) return null_arg("data_dir");
  if (!out) return null_arg("out");
  if (!valid_kind(kind)) return fail(FB_ERR_INVALID_ARGUMENT, "unknown return kind");
  if (which < 0 || which > 2) return fail(FB_ERR_INVALID_ARGUMENT, "which must be 0, 1 or 2");
  return guarded([&] {
    const auto dir = fb::load_data_dir(data_dir);
    auto handle = std::make_unique<fb_panel>();
    if (which == 0) {
      handle->panel = dir.panel(to_kind(kind));
    } else {
      auto [early, late] = dir.split_panels(to_kind(kind));
      handle->panel = which == 1 ? std::move(early) : std::move(late);
    }
    *out = handle.release();
  });
}

void fb_panel_destroy(fb_panel* panel) { delete panel; }

size_t fb_panel_stock_count(const fb_panel* panel) {
  return panel ? panel->panel.stock_count() : 0;
}

size_t fb_panel_month_count(const fb_panel* panel) {
  return panel ? panel->panel.month_count() : 0;
}

fb_status fb_panel_stock_label(const fb_panel* panel, size_t index, const char** label) {
  if (!panel) return null_arg("panel");
  if (!label) return null_arg("label");
  if (index >= panel->panel.stock_count()) {
    return fail(FB_ERR_LOOKUP, "stock index out of range");
  }
  *label = panel->panel.stocks[index].label.c_str();
  return FB_OK;
}

fb_status fb_panel_excess(const fb_panel* panel, size_t index, double* out, size_t cap) {
  if (!panel) return null_arg("panel");
  if (!out) return null_arg("out");
  if (index >= panel->panel.stock_count()) {
    return fail(FB_ERR_LOOKUP, "stock index out of range");
  }
  if (cap < panel->panel.month_count()) {
    return fail(FB_ERR_INVALID_ARGUMENT, "output buffer shorter than the month count");
  }
  const auto row = panel->panel.excess.row(static_cast<Eigen::Index>(index));
  for (Eigen::Index t = 0; t < row.size(); ++t) out[t] = row(t);
  return FB_OK;
}

fb_status fb_panel_fit(const fb_panel* panel, const fb_panel* prior, const char* stock,
                       fb_model model, fb_method method, double* theta, size_t cap,
                       double* rss) {
  if (!panel) return null_arg("panel");
  if (!stock) return null_arg("stock");
  if (!theta) return null_arg("theta");
  if (model != FB_CAPM && model != FB_FF3) return fail(FB_ERR_INVALID_ARGUMENT, "unknown model");
  const fb::Model m = model == FB_CAPM ? fb::Model::CAPM : fb::Model::FamaFrench3;
  if (cap < static_cast<size_t>(fb::regressor_count(m))) {
    return fail(FB_ERR_INVALID_ARGUMENT, "theta buffer too short");
  }
  fb::FitConfig fc;
  switch (method) {
    case FB_OLS: fc.method = fb::Method::OLS; break;
    case FB_MLE: fc.method = fb::Method::MLE; break;
    case FB_BAYES_BENCHMARK:
      fc.method = fb::Method::RobustBayes;
      fc.g_rule = fb::GRule::benchmark();
      break;
    case FB_BAYES_LEB:
      fc.method = fb::Method::RobustBayes;
      fc.g_rule = fb::GRule::local_empirical_bayes();
      break;
    case FB_BAYES_CONJUGATE:
      fc.method = fb::Method::ConjugateBayes;
      fc.g_rule = fb::GRule::benchmark();
      break;
    default: return fail(FB_ERR_INVALID_ARGUMENT, "unknown method");
  }
  fc.prior_panel = prior ? &prior->panel : nullptr;
  return guarded([&] {
    const auto fit = fb::fit_stock(panel->panel, stock, m, fc);
    copy_out(fit.theta, theta);
    if (rss) *rss = fit.rss;
  });
}

fb_status fb_ols(const double* y, const double* x, size_t n, size_t p, double* theta,
                 double* rss) {
  if (!y || !x || !theta) return null_arg("y, x and theta");
  return guarded([&] {
    const auto fit = fb::ols_fit(design_from(y, x, n, p));
    copy_out(fit.theta, theta);
    if (rss) *rss = fit.rss;
  });
}

fb_status fb_robust_bayes(const double* y, const double* x, size_t n, size_t p,
                          const double* theta0, double g, double* theta, double* weight) {
  if (!y || !x || !theta0 || !theta) return null_arg("y, x, theta0 and theta");
  return guarded([&] {
    const auto d = design_from(y, x, n, p);
    fb::PriorSpec prior{Eigen::Map<const Eigen::VectorXd>(theta0, d.p()),
                        fb::GRule::fixed_value(g)};
    const auto fit = fb::robust_bayes_fit(d, prior, g);
    copy_out(fit.theta, theta);
    if (weight) *weight = *fit.weight_w;
  });
}

fb_status fb_conjugate_bayes(const double* y, const double* x, size_t n, size_t p,
                             const double* theta0, const double* precision, double* theta) {
  if (!y || !x || !theta0 || !precision || !theta) {
    return null_arg("y, x, theta0, precision and theta");
  }
  return guarded([&] {
    const auto d = design_from(y, x, n, p);
    const Eigen::MatrixXd V =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            precision, d.p(), d.p());
    const auto fit =
        fb::conjugate_bayes_fit(d, Eigen::Map<const Eigen::VectorXd>(theta0, d.p()), V);
    copy_out(fit.theta, theta);
  });
}

fb_status fb_select_g(fb_g_rule rule, size_t n, size_t p, double f_stat, double fixed_g,
                      double* g) {
  if (!g) return null_arg("g");
  fb::GRule r;
  switch (rule) {
    case FB_G_BENCHMARK: r = fb::GRule::benchmark(); break;
    case FB_G_LOCAL_EB: r = fb::GRule::local_empirical_bayes(); break;
    case FB_G_FIXED: r = fb::GRule::fixed_value(fixed_g); break;
    default: return fail(FB_ERR_INVALID_ARGUMENT, "unknown g rule");
  }
  return guarded([&] {
    *g = fb::select_g(r, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p), f_stat);
  });
}

fb_status fb_shapiro_wilk(const double* x, size_t n, double* w, double* p_value) {
  if (!x || !w || !p_value) return null_arg("x, w and p_value");
  return guarded([&] {
    const auto r = fb::shapiro_wilk(std::span<const double>(x, n));
    *w = r.w_stat;
    *p_value = r.p_value;
  });
}

fb_status fb_geometric_average(const double* values, size_t n, fb_return_kind kind,
                               double* out) {
  if (!values || !out) return null_arg("values and out");
  if (!valid_kind(kind)) return fail(FB_ERR_INVALID_ARGUMENT, "unknown return kind");
  return guarded(
      [&] { *out = fb::geometric_average(std::span<const double>(values, n), to_kind(kind)); });
}

}  // extern "C"
