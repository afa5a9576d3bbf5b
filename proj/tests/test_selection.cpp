#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ppkde/selection.hpp"
#include "support.hpp"

using namespace ppkde;
using ppkde::testing::random_pattern;
using std::numbers::pi;

namespace {

double criterion_at(const PointPattern& p, const Kernel& k, double h) {
  const FixedIntensityEstimator est(p, h, k, EdgeCorrection::none);
  return reciprocal_intensity_sum(p, est);
}

double adaptive_criterion_at(const PointPattern& p, const Kernel& k, const ScaleFactors& sf,
                             double h) {
  const AdaptiveIntensityEstimator est(p, h, sf, k, EdgeCorrection::none);
  return reciprocal_intensity_sum(p, est);
}

} // namespace

TEST_CASE("criterion basics") {
  const Window w = Window::unit_square();
  const Kernel k = Kernel::gaussian(2);

  SECTION("empty pattern returns the window volume") {
    const PointPattern p = PointPattern::empty(w);
    CHECK(reciprocal_intensity_sum(p, [](std::span<const double>) { return 1.0; }) == 1.0);
    const PointPattern p2 = PointPattern::empty(Window::box2(0, 2, 0, 0.5));
    CHECK(reciprocal_intensity_sum(p2, [](std::span<const double>) { return 1.0; }) == 1.0);
  }

  SECTION("single point, gaussian, uncorrected: T(h) = 2 pi h^2") {
    const PointPattern p(w, {0.5, 0.5});
    for (double h : {0.05, 0.2, 0.8})
      CHECK(criterion_at(p, k, h) == Catch::Approx(2 * pi * h * h).epsilon(1e-12));
  }

  SECTION("limits: T -> 0 as h -> 0 and T -> inf as h -> inf") {
    const PointPattern p = random_pattern(w, 60, 13);
    CHECK(criterion_at(p, k, 1e-4) < 0.01);
    CHECK(criterion_at(p, k, 1e3) > 100.0);
  }

  SECTION("vanishing estimate raises") {
    const PointPattern p(w, {0.5, 0.5});
    CHECK_THROWS_AS(reciprocal_intensity_sum(p, [](std::span<const double>) { return 0.0; }),
                    std::runtime_error);
  }
}

TEST_CASE("closed-form single-point roots") {
  const Window w = Window::unit_square();
  const PointPattern p(w, {0.5, 0.5});

  SECTION("gaussian: h* = (2 pi)^{-1/2}") {
    const BandwidthResult r = select_global(p, Kernel::gaussian(2));
    CHECK(r.converged);
    CHECK(r.h_selected == Catch::Approx(1.0 / std::sqrt(2 * pi)).margin(1e-6));
  }
  SECTION("box kernel: h* = pi^{-1/2}") {
    const BandwidthResult r = select_global(p, Kernel::beta(2, 0.0));
    CHECK(r.converged);
    CHECK(r.h_selected == Catch::Approx(1.0 / std::sqrt(pi)).margin(1e-6));
  }
}

TEST_CASE("selected bandwidth is a root of T - ell(W)") {
  const Window w = Window::unit_square();
  const Kernel k = Kernel::gaussian(2);
  const PointPattern p = random_pattern(w, 100, 2024);
  const BandwidthResult r = select_global(p, k);
  REQUIRE(r.converged);
  CHECK(criterion_at(p, k, r.h_selected) == Catch::Approx(1.0).margin(1e-5));
  CHECK(r.h_selected > r.trace.h_values.front());
  CHECK(r.h_selected < r.trace.h_values.back());
  CHECK(r.n_roots_bracketed >= 1);
}

TEST_CASE("trace is increasing in h and nonnegative in T") {
  const PointPattern p = random_pattern(Window::unit_square(), 40, 5);
  const BandwidthResult r = select_global(p, Kernel::gaussian(2));
  for (std::size_t i = 1; i < r.trace.h_values.size(); ++i)
    REQUIRE(r.trace.h_values[i] > r.trace.h_values[i - 1]);
  for (double t : r.trace.T_values) REQUIRE(t >= 0.0);
  CHECK(r.trace.target == 1.0);
}

TEST_CASE("no sign change returns argmin unconverged") {
  // Search range pinned entirely above the single-point root (2 pi)^{-1/2}.
  const PointPattern p(Window::unit_square(), {0.5, 0.5});
  SearchConfig cfg;
  cfg.h_min = 1.0;
  cfg.h_max = 1.4;
  cfg.n_h = 16;
  const BandwidthResult r = select_global(p, Kernel::gaussian(2), cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.n_roots_bracketed == 0);
  CHECK(r.h_selected == Catch::Approx(1.0)); // grid point closest to the root
}

TEST_CASE("smallest root is picked when several are bracketed") {
  // Synthetic criterion crossing the target three times.
  SearchConfig cfg;
  cfg.h_min = 0.1;
  cfg.h_max = 10.0;
  cfg.n_h = 128;
  auto T = [](double h) { return h + 2.0 * std::sin(h); };
  const BandwidthResult r = select_bandwidth(T, 3.5, cfg);
  CHECK(r.n_roots_bracketed == 3);
  REQUIRE(r.converged);
  // Solutions of h + 2 sin h = 3.5 sit near 1.5044, 2.7656 and 5.2340;
  // the smallest must win.
  CHECK(r.h_selected == Catch::Approx(1.50441).margin(1e-4));
  CHECK(T(r.h_selected) == Catch::Approx(3.5).margin(1e-4));
}

TEST_CASE("two-step adaptive selection") {
  const Window w = Window::unit_square();
  const Kernel k = Kernel::gaussian(2);

  SECTION("single point: constant pilot, h_a equals the fixed-estimator root") {
    const PointPattern p(w, {0.5, 0.5});
    const AdaptiveSelection sel = select_adaptive(p, k);
    REQUIRE(sel.global.has_value());
    CHECK(sel.scale[0] == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(sel.result.h_selected == Catch::Approx(sel.global->h_selected).epsilon(1e-9));
  }

  SECTION("injected constant scale factors reproduce global selection exactly") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
      const PointPattern p = random_pattern(w, 35, seed);
      const BandwidthResult g = select_global(p, k);
      const BandwidthResult a = select_adaptive_given(p, k, ScaleFactors::uniform(p.size()));
      REQUIRE(a.h_selected == Catch::Approx(g.h_selected).epsilon(1e-12));
      CHECK(a.converged == g.converged);
    }
  }

  SECTION("pilot_h override skips step 1.a") {
    const PointPattern p = random_pattern(w, 30, 6);
    const AdaptiveSelection sel = select_adaptive(p, k, {}, -0.5, 0.17);
    CHECK_FALSE(sel.global.has_value());
    CHECK(sel.pilot_bandwidth == 0.17);
    const auto pilot = pilot_estimates(p, 0.17, k);
    const ScaleFactors sf = scale_factors(pilot, -0.5);
    for (std::size_t i = 0; i < sf.size(); ++i)
      REQUIRE(sel.scale[i] == Catch::Approx(sf[i]).epsilon(1e-12));
  }

  SECTION("empty pattern rejected") {
    CHECK_THROWS_AS(select_global(PointPattern::empty(w), k), std::invalid_argument);
    CHECK_THROWS_AS(select_adaptive(PointPattern::empty(w), k), std::invalid_argument);
  }
}

TEST_CASE("theorem-style limits and bounds for the adaptive criterion") {
  const Window w = Window::unit_square();
  for (const Kernel& k : {Kernel::gaussian(2), Kernel::beta(2, 2.0)}) {
    for (std::uint64_t seed : {21ull, 22ull, 23ull}) {
      const PointPattern p = random_pattern(w, 10 + seed % 90, seed);
      const AdaptiveSelection sel = select_adaptive(p, k);
      const ScaleFactors& sf = sel.scale;

      CHECK(adaptive_criterion_at(p, k, sf, 1e-4 * w.diameter()) < 0.01 * w.volume());
      CHECK(adaptive_criterion_at(p, k, sf, 1e3 * w.diameter()) > 100.0 * w.volume());

      // Proof bounds: sum c^d h^d / k(0) above, n h^d / (k(0) sum c^-d) below.
      double sum_cd = 0.0, sum_cmd = 0.0;
      for (std::size_t i = 0; i < sf.size(); ++i) {
        sum_cd += sf[i] * sf[i];
        sum_cmd += 1.0 / (sf[i] * sf[i]);
      }
      for (double h : {0.01, 0.1, 0.5, 1.0}) {
        const double T = adaptive_criterion_at(p, k, sf, h);
        const double upper = sum_cd * h * h / k.at_zero();
        const double lower = double(p.size()) * h * h / (k.at_zero() * sum_cmd);
        REQUIRE(T <= upper * (1 + 1e-12));
        REQUIRE(T >= lower * (1 - 1e-12));
      }

      CHECK(sel.result.converged);
    }
  }
}

TEST_CASE("criterion is continuous in h for smooth kernels") {
  const Window w = Window::unit_square();
  SplitRng rng(99);
  for (const Kernel& k : {Kernel::gaussian(2), Kernel::beta(2, 2.0)}) {
    const PointPattern p = random_pattern(w, 50, 321);
    for (int trial = 0; trial < 10; ++trial) {
      const double h = std::exp(rng.uniform(std::log(0.02), std::log(1.0)));
      const double delta = 1e-6 * h;
      const double t0 = criterion_at(p, k, h);
      const double t1 = criterion_at(p, k, h + delta);
      REQUIRE(std::abs(t1 - t0) < 1e-3 * std::abs(t0));
    }
  }
}

TEST_CASE("final-raster edge correction cannot change the selected bandwidth") {
  // Selection never sees the edge-corrected estimator: rasterizing with any
  // correction mode must leave a re-run of selection bit-identical.
  const Window w = Window::unit_square();
  const Kernel k = Kernel::gaussian(2);
  const PointPattern p = random_pattern(w, 25, 808);
  const BandwidthResult before = select_global(p, k);
  const Grid g(w, {32, 32});
  (void)rasterize_fixed(p, before.h_selected, k, g, EdgeCorrection::local);
  (void)rasterize_fixed(p, before.h_selected, k, g, EdgeCorrection::none);
  const BandwidthResult after = select_global(p, k);
  CHECK(before.h_selected == after.h_selected);
  CHECK(before.n_roots_bracketed == after.n_roots_bracketed);
}
