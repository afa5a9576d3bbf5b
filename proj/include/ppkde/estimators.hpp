#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ppkde/geometry.hpp"
#include "ppkde/kernels.hpp"

namespace ppkde {

// none:   raw kernel sum.
// global: the estimate at x0 is divided by the kernel mass retained in W
//         around x0 (fixed-bandwidth estimator only).
// local:  each point's contribution is divided by the kernel mass retained
//         in W around that point; this variant is mass preserving.
enum class EdgeCorrection { none, global, local };

// Per-point bandwidth multipliers c[i] = (pilot[i]/g)^alpha with g the
// geometric mean of the pilot values, so the c themselves have geometric
// mean 1 and low-intensity points receive larger bandwidths for alpha < 0.
class ScaleFactors {
public:
  static ScaleFactors from_pilot(std::span<const double> pilot, double alpha) {
    if (pilot.empty()) throw std::invalid_argument("ScaleFactors: empty pilot vector");
    if (!std::isfinite(alpha)) throw std::invalid_argument("ScaleFactors: alpha must be finite");
    // Log space: products of hundreds of intensities overflow otherwise.
    std::vector<double> logs(pilot.size());
    for (std::size_t i = 0; i < pilot.size(); ++i) {
      if (!(pilot[i] > 0.0) || !std::isfinite(pilot[i]))
        throw std::invalid_argument("ScaleFactors: pilot intensities must be finite and > 0");
      logs[i] = std::log(pilot[i]);
    }
    double mean_log = 0.0;
    for (double l : logs) mean_log += l;
    mean_log /= static_cast<double>(logs.size());
    ScaleFactors sf;
    sf.alpha_ = alpha;
    sf.c_.resize(pilot.size());
    for (std::size_t i = 0; i < pilot.size(); ++i) sf.c_[i] = std::exp(alpha * (logs[i] - mean_log));
    return sf;
  }

  static ScaleFactors uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("ScaleFactors: empty pattern");
    ScaleFactors sf;
    sf.alpha_ = 0.0;
    sf.c_.assign(n, 1.0);
    return sf;
  }

  std::size_t size() const noexcept { return c_.size(); }
  double alpha() const noexcept { return alpha_; }
  double operator[](std::size_t i) const { return c_[i]; }
  const std::vector<double>& values() const noexcept { return c_; }

private:
  ScaleFactors() = default;
  std::vector<double> c_;
  double alpha_ = 0.0;
};

inline ScaleFactors scale_factors(std::span<const double> pilot, double alpha) {
  return ScaleFactors::from_pilot(pilot, alpha);
}

namespace detail {

inline double squared_distance(std::span<const double> a, const double* b) {
  double q = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    q += d * d;
  }
  return q;
}

// Static partition of [0,n) across up to `threads` workers. Each chunk writes
// disjoint output, so results are identical to the sequential evaluation.
template <typename Fn>
void parallel_chunks(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

} // namespace detail

// Fixed-bandwidth kernel intensity estimator
//   lambda_hat(x0) = h^-d sum_y kappa((x0-y)/h),
// with the chosen edge correction applied. Non-owning view: the pattern must
// outlive the estimator. Local weights are precomputed at construction.
class FixedIntensityEstimator {
public:
  FixedIntensityEstimator(const PointPattern& pattern, double h, const Kernel& kernel,
                          EdgeCorrection ec)
      : pattern_(&pattern), kernel_(kernel), h_(h), ec_(ec) {
    if (!(h > 0.0) || !std::isfinite(h))
      throw std::invalid_argument("FixedIntensityEstimator: bandwidth must be positive");
    if (kernel_.dimension() != pattern.dimension())
      throw std::invalid_argument("FixedIntensityEstimator: kernel dimension mismatch");
    inv_hd_ = std::pow(h, -pattern.dimension());
    if (ec_ == EdgeCorrection::local) {
      inv_weight_.resize(pattern.size());
      for (std::size_t i = 0; i < pattern.size(); ++i)
        inv_weight_[i] = 1.0 / kernel_.box_integral(pattern.point(i), h_, pattern.window());
    }
  }

  double bandwidth() const noexcept { return h_; }
  EdgeCorrection edge_correction() const noexcept { return ec_; }

  double operator()(std::span<const double> x0) const {
    const PointPattern& p = *pattern_;
    if (!p.window().contains(x0))
      throw std::invalid_argument("FixedIntensityEstimator: evaluation point outside the window");
    const double inv_h2 = 1.0 / (h_ * h_);
    const std::size_t d = static_cast<std::size_t>(p.dimension());
    const double* coords = p.coords().data();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double k = kernel_.density_q(detail::squared_distance(x0, coords + i * d) * inv_h2);
      sum += ec_ == EdgeCorrection::local ? k * inv_weight_[i] : k;
    }
    double value = sum * inv_hd_;
    if (ec_ == EdgeCorrection::global && !p.empty())
      value /= kernel_.box_integral(x0, h_, p.window());
    return value;
  }

private:
  const PointPattern* pattern_;
  Kernel kernel_;
  double h_;
  EdgeCorrection ec_;
  double inv_hd_;
  std::vector<double> inv_weight_;
};

// Adaptive (Abramson-type) estimator: point y smooths at bandwidth h*c(y),
//   lambda_hat_A(x0) = sum_y (c_y h)^-d kappa((x0-y)/(h c_y)) [/ w_y].
// Global edge correction is not defined for this estimator.
class AdaptiveIntensityEstimator {
public:
  AdaptiveIntensityEstimator(const PointPattern& pattern, double h, const ScaleFactors& scale,
                             const Kernel& kernel, EdgeCorrection ec)
      : pattern_(&pattern), kernel_(kernel), h_(h), ec_(ec) {
    if (!(h > 0.0) || !std::isfinite(h))
      throw std::invalid_argument("AdaptiveIntensityEstimator: bandwidth must be positive");
    if (ec == EdgeCorrection::global)
      throw std::invalid_argument(
          "AdaptiveIntensityEstimator: adaptive estimator supports edge corrections none/local only");
    if (scale.size() != pattern.size())
      throw std::invalid_argument("AdaptiveIntensityEstimator: scale factors not aligned with pattern");
    if (kernel_.dimension() != pattern.dimension())
      throw std::invalid_argument("AdaptiveIntensityEstimator: kernel dimension mismatch");
    const int d = pattern.dimension();
    term_factor_.resize(pattern.size());
    inv_scale2_.resize(pattern.size());
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      const double hc = h * scale[i];
      inv_scale2_[i] = 1.0 / (hc * hc);
      term_factor_[i] = std::pow(hc, -d);
      if (ec == EdgeCorrection::local)
        term_factor_[i] /= kernel_.box_integral(pattern.point(i), hc, pattern.window());
    }
  }

  double bandwidth() const noexcept { return h_; }

  double operator()(std::span<const double> x0) const {
    const PointPattern& p = *pattern_;
    if (!p.window().contains(x0))
      throw std::invalid_argument("AdaptiveIntensityEstimator: evaluation point outside the window");
    const std::size_t d = static_cast<std::size_t>(p.dimension());
    const double* coords = p.coords().data();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      sum += term_factor_[i] *
             kernel_.density_q(detail::squared_distance(x0, coords + i * d) * inv_scale2_[i]);
    return sum;
  }

private:
  const PointPattern* pattern_;
  Kernel kernel_;
  double h_;
  EdgeCorrection ec_;
  std::vector<double> term_factor_; // (h c_i)^-d, divided by the local weight if applicable
  std::vector<double> inv_scale2_;  // (h c_i)^-2
};

inline double estimate_fixed(const PointPattern& pattern, double h, const Kernel& kernel,
                             std::span<const double> x0, EdgeCorrection ec) {
  return FixedIntensityEstimator(pattern, h, kernel, ec)(x0);
}

inline double estimate_adaptive(const PointPattern& pattern, double h, const ScaleFactors& scale,
                                const Kernel& kernel, std::span<const double> x0,
                                EdgeCorrection ec) {
  return AdaptiveIntensityEstimator(pattern, h, scale, kernel, ec)(x0);
}

// Locally edge-corrected fixed-bandwidth estimates at the data points
// themselves. Every output is strictly positive: each point contributes
// kappa(0) > 0 to its own estimate.
inline std::vector<double> pilot_estimates(const PointPattern& pattern, double pilot_h,
                                           const Kernel& kernel) {
  if (pattern.empty())
    throw std::invalid_argument("pilot_estimates: pattern must be non-empty");
  const FixedIntensityEstimator est(pattern, pilot_h, kernel, EdgeCorrection::local);
  std::vector<double> out(pattern.size());
  for (std::size_t i = 0; i < pattern.size(); ++i) out[i] = est(pattern.point(i));
  return out;
}

// Estimated intensity sampled at the centers of a grid, stored in the grid's
// flat cell order.
struct IntensityField {
  Grid grid;
  std::vector<double> values;

  // Midpoint-rule integral over the window.
  double integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.cell_volume();
  }
};

namespace detail {

template <typename Evaluator>
IntensityField rasterize_with(const Evaluator& est, const Grid& grid, int threads) {
  IntensityField field{grid, std::vector<double>(grid.cell_count())};
  parallel_chunks(grid.cell_count(), threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> center(static_cast<std::size_t>(grid.dimension()));
    for (std::size_t i = lo; i < hi; ++i) {
      grid.center(i, center);
      field.values[i] = est(center);
    }
  });
  return field;
}

} // namespace detail

inline IntensityField rasterize_fixed(const PointPattern& pattern, double h, const Kernel& kernel,
                                      const Grid& grid, EdgeCorrection ec, int threads = 1) {
  if (!(grid.window() == pattern.window()))
    throw std::invalid_argument("rasterize_fixed: grid window must equal the pattern window");
  return detail::rasterize_with(FixedIntensityEstimator(pattern, h, kernel, ec), grid, threads);
}

inline IntensityField rasterize_adaptive(const PointPattern& pattern, double h,
                                         const ScaleFactors& scale, const Kernel& kernel,
                                         const Grid& grid, EdgeCorrection ec, int threads = 1) {
  if (!(grid.window() == pattern.window()))
    throw std::invalid_argument("rasterize_adaptive: grid window must equal the pattern window");
  return detail::rasterize_with(AdaptiveIntensityEstimator(pattern, h, scale, kernel, ec), grid,
                                threads);
}

} // namespace ppkde
