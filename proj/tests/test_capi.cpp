#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "factorbench/factorbench.h"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path root;
  Scratch() {
    root = fs::temp_directory_path() /
           ("fbcapi_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(root);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
};

struct Config {
  fb_config* ptr = nullptr;
  Config() { REQUIRE(fb_config_create(&ptr) == FB_OK); }
  ~Config() { fb_config_destroy(ptr); }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(fb_version()) == "1.0.0");
  CHECK(std::string(fb_status_name(FB_ERR_ESTIMATION)) == "estimation error");
  CHECK(std::string(fb_status_name(FB_OK)) == "ok");
}

TEST_CASE("OLS through the C API") {
  const double y[] = {0, 1, 3};
  const double x[] = {1, 0, 1, 1, 1, 2};
  double theta[2];
  double rss = 0;
  REQUIRE(fb_ols(y, x, 3, 2, theta, &rss) == FB_OK);
  CHECK(std::abs(theta[0] + 1.0 / 6.0) < 1e-12);
  CHECK(std::abs(theta[1] - 1.5) < 1e-12);
  CHECK(std::abs(rss - 1.0 / 6.0) < 1e-12);

  const double flat[] = {1, 1, 1, 1, 1, 1};
  CHECK(fb_ols(y, flat, 3, 2, theta, &rss) == FB_ERR_ESTIMATION);
  CHECK(std::string(fb_last_error()) == "collinear design");
  CHECK(fb_ols(nullptr, x, 3, 2, theta, &rss) == FB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("Bayesian primitives") {
  const double y[] = {0.1, 0.3, 0.2, 0.6, 0.4};
  const double x[] = {1, 0.1, 1, 0.2, 1, 0.3, 1, 0.4, 1, 0.5};
  const double theta0[] = {0.0, 1.0};
  double ols[2], rss = 0, theta[2], w = 0;
  REQUIRE(fb_ols(y, x, 5, 2, ols, &rss) == FB_OK);
  REQUIRE(fb_robust_bayes(y, x, 5, 2, theta0, 4.0, theta, &w) == FB_OK);
  CHECK(std::abs(w - 1.0 / (1.0 + 2.0 * std::sqrt(rss))) < 1e-12);
  CHECK(std::abs(theta[1] - (w * ols[1] + (1 - w) * theta0[1])) < 1e-12);
  CHECK(fb_robust_bayes(y, x, 5, 2, theta0, -1.0, theta, &w) == FB_ERR_DOMAIN);

  const double zero[] = {0, 0, 0, 0};
  REQUIRE(fb_conjugate_bayes(y, x, 5, 2, theta0, zero, theta) == FB_OK);
  CHECK(std::abs(theta[1] - ols[1]) < 1e-9);

  double g = 0;
  REQUIRE(fb_select_g(FB_G_BENCHMARK, 42, 2, 0, 0, &g) == FB_OK);
  CHECK(g == 42.0);
  REQUIRE(fb_select_g(FB_G_LOCAL_EB, 42, 2, 0.5, 0, &g) == FB_OK);
  CHECK(g == 0.0);
  REQUIRE(fb_select_g(FB_G_FIXED, 42, 2, 0, 3.0, &g) == FB_OK);
  CHECK(g == 3.0);
}

TEST_CASE("Shapiro-Wilk and geometric average") {
  const double x[] = {1.0, 2.0, 4.0};
  double w = 0, p = 0;
  REQUIRE(fb_shapiro_wilk(x, 3, &w, &p) == FB_OK);
  CHECK(std::abs(w - 0.9642857142857142) < 1e-6);
  CHECK(std::abs(p - 0.6368868450289689) < 1e-4);
  CHECK(fb_shapiro_wilk(x, 2, &w, &p) == FB_ERR_DOMAIN);

  const double r[] = {0.1, -0.05, 0.2};
  double geo = 0;
  REQUIRE(fb_geometric_average(r, 3, FB_DISCRETE, &geo) == FB_OK);
  CHECK(std::abs(geo - (std::cbrt(1.1 * 0.95 * 1.2) - 1.0)) < 1e-12);
}

TEST_CASE("commands and panels through the C API") {
  Scratch s;
  {
    std::ofstream spec(s.root / "sim.spec");
    spec << "n-stocks = 6\nn-months = 20\nseed = 3\n";
  }
  Config cfg;
  REQUIRE(fb_config_set(cfg.ptr, "spec", (s.root / "sim.spec").c_str()) == FB_OK);
  REQUIRE(fb_config_set(cfg.ptr, "out", (s.root / "data").c_str()) == FB_OK);
  CHECK(fb_config_set(cfg.ptr, "nonsense", "1") == FB_ERR_CONFIG);
  fb_run_summary summary{};
  REQUIRE(fb_run_command("simulate", cfg.ptr, &summary) == FB_OK);
  CHECK(summary.exit_code == 0);
  CHECK(summary.outputs == 4);

  fb_panel* late = nullptr;
  fb_panel* early = nullptr;
  REQUIRE(fb_panel_load((s.root / "data").c_str(), FB_DISCRETE, 2, &late) == FB_OK);
  REQUIRE(fb_panel_load((s.root / "data").c_str(), FB_DISCRETE, 1, &early) == FB_OK);
  CHECK(fb_panel_stock_count(late) == 6);
  CHECK(fb_panel_month_count(late) == 10);
  const char* label = nullptr;
  REQUIRE(fb_panel_stock_label(late, 0, &label) == FB_OK);
  CHECK(std::string(label) == "S1");
  CHECK(fb_panel_stock_label(late, 6, &label) == FB_ERR_LOOKUP);

  std::vector<double> excess(10);
  REQUIRE(fb_panel_excess(late, 0, excess.data(), excess.size()) == FB_OK);
  CHECK(fb_panel_excess(late, 0, excess.data(), 3) == FB_ERR_INVALID_ARGUMENT);

  double theta[4], rss = 0;
  REQUIRE(fb_panel_fit(late, nullptr, "S1", FB_CAPM, FB_OLS, theta, 4, &rss) == FB_OK);
  CHECK(rss > 0);
  CHECK(fb_panel_fit(late, nullptr, "S1", FB_CAPM, FB_BAYES_BENCHMARK, theta, 4, &rss) ==
        FB_ERR_CONFIG);
  CHECK(fb_panel_fit(late, early, "S1", FB_CAPM, FB_BAYES_BENCHMARK, theta, 4, &rss) == FB_OK);
  CHECK(fb_panel_fit(late, nullptr, "ZZZ", FB_CAPM, FB_OLS, theta, 4, &rss) == FB_ERR_LOOKUP);
  CHECK(fb_panel_fit(late, nullptr, "S1", FB_FF3, FB_OLS, theta, 2, &rss) ==
        FB_ERR_INVALID_ARGUMENT);
  fb_panel_destroy(late);
  fb_panel_destroy(early);

  fb_panel* missing = nullptr;
  CHECK(fb_panel_load((s.root / "nowhere").c_str(), FB_DISCRETE, 0, &missing) == FB_ERR_IO);
  CHECK(missing == nullptr);
  CHECK(fb_run_command("plot", cfg.ptr, &summary) == FB_ERR_CONFIG);
}
