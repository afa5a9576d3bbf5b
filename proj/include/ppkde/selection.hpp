#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ppkde/estimators.hpp"
#include "ppkde/geometry.hpp"
#include "ppkde/kernels.hpp"

namespace ppkde {

// Search grid for the bandwidth criterion. Non-positive h_min/h_max resolve
// to 1e-3 * diam(W) and diam(W): the criterion grows like h^d well past any
// useful bandwidth, so the window diagonal is a safe upper end.
struct SearchConfig {
  double h_min = 0.0;
  double h_max = 0.0;
  int n_h = 64;
  double rel_tol = 1e-6;
  int max_bisect = 200;
};

struct CriterionTrace {
  std::vector<double> h_values; // strictly increasing
  std::vector<double> T_values; // criterion at each h
  double target = 0.0;          // ell(W)
};

struct BandwidthResult {
  double h_selected = 0.0;
  bool converged = false;  // a sign change was bracketed and bisection finished
  int n_roots_bracketed = 0;
  CriterionTrace trace;
};

// Stoyan-Grabarnik sum of reciprocal estimated intensities over the data
// points; its expectation under the true intensity is ell(W) (Campbell-Mecke),
// which is what bandwidth selection balances against. Empty patterns return
// ell(W) itself. The evaluator must be strictly positive at every data point
// (guaranteed for the uncorrected estimators here, since kappa(0) > 0).
template <typename Evaluator>
double reciprocal_intensity_sum(const PointPattern& pattern, Evaluator&& estimate_at) {
  if (pattern.empty()) return pattern.window().volume();
  double sum = 0.0;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const double value = estimate_at(pattern.point(i));
    if (!(value > 0.0) || !std::isfinite(value))
      throw std::runtime_error(
          "reciprocal_intensity_sum: estimated intensity vanished at a data point");
    sum += 1.0 / value;
  }
  return sum;
}

namespace detail {

inline void resolve_search_range(SearchConfig& cfg, const Window& w) {
  if (cfg.h_min <= 0.0) cfg.h_min = 1e-3 * w.diameter();
  if (cfg.h_max <= 0.0) cfg.h_max = w.diameter();
  if (!(cfg.h_min < cfg.h_max))
    throw std::invalid_argument("SearchConfig: requires 0 < h_min < h_max");
  if (cfg.n_h < 2) throw std::invalid_argument("SearchConfig: need at least 2 grid probes");
  if (!(cfg.rel_tol > 0.0)) throw std::invalid_argument("SearchConfig: rel_tol must be positive");
}

} // namespace detail

// Pick the bandwidth at which T crosses `target`: probe T on a log-spaced
// grid, bracket sign changes of T - target, and refine the bracket with the
// smallest h by bisection (robust to the box kernel's jump discontinuities).
// With no sign change on the grid the argmin of |T - target| is returned
// **unconverged**; the trace makes that diagnosable. Ties break toward the
// smallest root.
template <typename TFun>
BandwidthResult select_bandwidth(TFun&& T, double target, SearchConfig cfg) {
  if (!(cfg.h_min > 0.0) || !(cfg.h_min < cfg.h_max) || cfg.n_h < 2)
    throw std::invalid_argument("select_bandwidth: search range not resolved");

  BandwidthResult result;
  result.trace.target = target;
  result.trace.h_values.resize(cfg.n_h);
  result.trace.T_values.resize(cfg.n_h);

  const double ratio = cfg.h_max / cfg.h_min;
  for (int j = 0; j < cfg.n_h; ++j) {
    const double t = static_cast<double>(j) / (cfg.n_h - 1);
    result.trace.h_values[j] = cfg.h_min * std::pow(ratio, t);
    result.trace.T_values[j] = T(result.trace.h_values[j]);
  }

  int first_bracket = -1; // grid index of the left end of the smallest bracket
  int exact_root = -1;    // grid index where T == target exactly
  for (int j = 0; j + 1 < cfg.n_h; ++j) {
    const double fa = result.trace.T_values[j] - target;
    const double fb = result.trace.T_values[j + 1] - target;
    if (fa == 0.0) {
      ++result.n_roots_bracketed;
      if (exact_root < 0 && first_bracket < 0) exact_root = j;
      continue;
    }
    if (j + 2 == cfg.n_h && fb == 0.0) {
      ++result.n_roots_bracketed;
      if (exact_root < 0 && first_bracket < 0) exact_root = j + 1;
      continue;
    }
    if (fa * fb < 0.0) {
      ++result.n_roots_bracketed;
      if (first_bracket < 0 && exact_root < 0) first_bracket = j;
    }
  }

  if (exact_root >= 0) {
    result.h_selected = result.trace.h_values[exact_root];
    result.converged = true;
    return result;
  }

  if (first_bracket < 0) {
    int best = 0;
    double best_f = std::abs(result.trace.T_values[0] - target);
    for (int j = 1; j < cfg.n_h; ++j) {
      const double f = std::abs(result.trace.T_values[j] - target);
      if (f < best_f) {
        best_f = f;
        best = j;
      }
    }
    result.h_selected = result.trace.h_values[best];
    result.converged = false;
    return result;
  }

  double a = result.trace.h_values[first_bracket];
  double b = result.trace.h_values[first_bracket + 1];
  double fa = result.trace.T_values[first_bracket] - target;
  for (int it = 0; it < cfg.max_bisect && (b - a) > cfg.rel_tol * 0.5 * (a + b); ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = T(mid) - target;
    if (fm == 0.0) {
      a = b = mid;
      break;
    }
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  result.h_selected = 0.5 * (a + b);
  result.converged = true;
  return result;
}

// Global bandwidth: balance the Stoyan-Grabarnik sum of the *uncorrected*
// fixed-bandwidth estimator against ell(W). No edge correction is applied
// during selection; without it a zero of T - ell(W) is guaranteed to exist.
inline BandwidthResult select_global(const PointPattern& pattern, const Kernel& kernel,
                                     SearchConfig cfg = {}) {
  if (pattern.empty())
    throw std::invalid_argument("select_global: pattern must be non-empty");
  detail::resolve_search_range(cfg, pattern.window());
  auto T = [&](double h) {
    const FixedIntensityEstimator est(pattern, h, kernel, EdgeCorrection::none);
    return reciprocal_intensity_sum(pattern, est);
  };
  return select_bandwidth(T, pattern.window().volume(), cfg);
}

// Adaptive-stage selection with frozen scale factors (uncorrected adaptive
// estimator). Exposed separately so scale factors can be injected directly.
inline BandwidthResult select_adaptive_given(const PointPattern& pattern, const Kernel& kernel,
                                             const ScaleFactors& scale, SearchConfig cfg = {}) {
  if (pattern.empty())
    throw std::invalid_argument("select_adaptive_given: pattern must be non-empty");
  detail::resolve_search_range(cfg, pattern.window());
  auto T = [&](double h) {
    const AdaptiveIntensityEstimator est(pattern, h, scale, kernel, EdgeCorrection::none);
    return reciprocal_intensity_sum(pattern, est);
  };
  return select_bandwidth(T, pattern.window().volume(), cfg);
}

struct AdaptiveSelection {
  double pilot_bandwidth = 0.0;          // h_g actually used for the pilot
  std::optional<BandwidthResult> global; // present unless pilot_h was supplied
  ScaleFactors scale;
  BandwidthResult result;                // the adaptive bandwidth h_a
};

// Two-step adaptive bandwidth selection:
//   1.a pick a global bandwidth h_g (or take the supplied pilot_h),
//   1.b locally edge-corrected pilot estimates at the data points,
//   2.a pick h_a with the uncorrected adaptive estimator and frozen scale
//       factors c = (pilot/geomean)^alpha.
// The caller applies the final edge correction when rasterizing (step 2.b).
inline AdaptiveSelection select_adaptive(const PointPattern& pattern, const Kernel& kernel,
                                         SearchConfig cfg = {}, double alpha = -0.5,
                                         std::optional<double> pilot_h = std::nullopt) {
  if (pattern.empty())
    throw std::invalid_argument("select_adaptive: pattern must be non-empty");
  double h_g = 0.0;
  std::optional<BandwidthResult> global;
  if (pilot_h) {
    if (!(*pilot_h > 0.0)) throw std::invalid_argument("select_adaptive: pilot_h must be positive");
    h_g = *pilot_h;
  } else {
    global = select_global(pattern, kernel, cfg);
    h_g = global->h_selected;
  }
  const std::vector<double> pilot = pilot_estimates(pattern, h_g, kernel);
  ScaleFactors scale = ScaleFactors::from_pilot(pilot, alpha);
  BandwidthResult result = select_adaptive_given(pattern, kernel, scale, cfg);
  return AdaptiveSelection{h_g, std::move(global), std::move(scale), std::move(result)};
}

} // namespace ppkde
