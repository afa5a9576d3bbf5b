#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppkde/geometry.hpp"
#include "ppkde/rng.hpp"

namespace ppkde {

// Target intensity function on the unit square. Three closure forms:
//   constant   lambda(x,y) = a
//   trend      lambda(x,y) = a + b x^4
//   feature    lambda(x,y) = a + b 1_S(x,y) / pi
// where S is the union of the two open discs of radius 0.1 centered at
// (0.5, 0.6) and (0.5, 0.4), clipped to [0,1]^2. The supremum over the unit
// square and the integral over it are exact for all three forms.
class IntensitySpec {
public:
  enum class Form { constant, trend, feature };

  static IntensitySpec constant(double lambda) {
    require_nonneg(lambda, "lambda");
    if (!(lambda > 0.0)) throw std::invalid_argument("IntensitySpec: constant rate must be > 0");
    return IntensitySpec(Form::constant, lambda, 0.0, 0);
  }

  static IntensitySpec trend(double a, double b) {
    require_nonneg(a, "a");
    require_nonneg(b, "b");
    if (!(a > 0.0)) throw std::invalid_argument("IntensitySpec: trend baseline a must be > 0");
    return IntensitySpec(Form::trend, a, b, 0);
  }

  static IntensitySpec feature(double a, double b) {
    require_nonneg(a, "a");
    require_nonneg(b, "b");
    if (!(a > 0.0)) throw std::invalid_argument("IntensitySpec: feature baseline a must be > 0");
    return IntensitySpec(Form::feature, a, b, 0);
  }

  // The ten stock intensity functions used by the simulation benchmark.
  static IntensitySpec table1(int id) {
    IntensitySpec spec = [&] {
      switch (id) {
        case 1: return constant(50.0);
        case 2: return constant(250.0);
        case 3: return trend(5.0, 225.0);
        case 4: return trend(10.0, 200.0);
        case 5: return trend(25.0, 1125.0);
        case 6: return trend(50.0, 1000.0);
        case 7: return feature(5.0, 45.0 * 50.0);
        case 8: return feature(10.0, 40.0 * 50.0);
        case 9: return feature(25.0, 225.0 * 50.0);
        case 10: return feature(50.0, 200.0 * 50.0);
        default:
          throw std::invalid_argument("IntensitySpec::table1: id must be in 1..10, got " +
                                      std::to_string(id));
      }
    }();
    spec.id_ = id;
    return spec;
  }

  Form form() const noexcept { return form_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  int id() const noexcept { return id_; } // 0 for custom specs

  static bool in_feature_region(double x, double y) noexcept {
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) return false;
    const double dx = x - 0.5;
    const double d1 = y - 0.6, d2 = y - 0.4;
    return dx * dx + d1 * d1 < 0.01 || dx * dx + d2 * d2 < 0.01;
  }

  double value(std::span<const double> p) const {
    switch (form_) {
      case Form::constant:
        return a_;
      case Form::trend: {
        const double x = p[0];
        const double x2 = x * x;
        return a_ + b_ * x2 * x2;
      }
      case Form::feature:
        if (p.size() < 2)
          throw std::invalid_argument("IntensitySpec: feature form needs two coordinates");
        return a_ + (in_feature_region(p[0], p[1]) ? b_ / std::numbers::pi : 0.0);
    }
    return 0.0; // unreachable
  }

  double value(double x, double y) const {
    const double p[2] = {x, y};
    return value(std::span<const double>(p, 2));
  }

  // sup over [0,1]^2, attained at x=1 for trends and inside S for features.
  double supremum() const noexcept {
    switch (form_) {
      case Form::constant: return a_;
      case Form::trend: return a_ + b_;
      case Form::feature: return a_ + b_ / std::numbers::pi;
    }
    return 0.0; // unreachable
  }

  // Integral over the unit square. Trend: a + b/5. Feature: both discs lie
  // inside the square and are disjoint (tangent at (0.5, 0.5)), so the
  // indicator integrates to 2 * pi/100 and the b/pi plateau contributes b/50.
  double integral_unit_square() const noexcept {
    switch (form_) {
      case Form::constant: return a_;
      case Form::trend: return a_ + b_ / 5.0;
      case Form::feature: return a_ + b_ / 50.0;
    }
    return 0.0; // unreachable
  }

  std::string describe() const {
    char buf[96];
    int len = 0;
    switch (form_) {
      case Form::constant: len = std::snprintf(buf, sizeof buf, "constant(%g)", a_); break;
      case Form::trend: len = std::snprintf(buf, sizeof buf, "trend(%g + %g x^4)", a_, b_); break;
      case Form::feature: len = std::snprintf(buf, sizeof buf, "feature(%g + %g 1_S/pi)", a_, b_); break;
    }
    return std::string(buf, static_cast<std::size_t>(len));
  }

private:
  IntensitySpec(Form form, double a, double b, int id) : form_(form), a_(a), b_(b), id_(id) {}

  static void require_nonneg(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("IntensitySpec: parameter ") + name +
                                  " must be finite and >= 0");
  }

  Form form_;
  double a_, b_;
  int id_;
};

inline IntensitySpec table1_intensity(int id) { return IntensitySpec::table1(id); }

namespace detail {

// Uniform point in the open box; coordinates use the open-interval uniform so
// boundary points (excluded from the open window) cannot occur.
inline void uniform_point(const Window& w, SplitRng& rng, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(w.dimension()));
  for (int i = 0; i < w.dimension(); ++i) out[i] = rng.uniform(w.lower()[i], w.upper()[i]);
}

// Uniform offset in the closed ball of the given radius, by rejection from
// the bounding cube. Acceptance is pi/4 in d=2; fine for d <= 3.
inline void uniform_ball_offset(int dim, double radius, SplitRng& rng, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(dim));
  for (;;) {
    double q = 0.0;
    for (int i = 0; i < dim; ++i) {
      out[i] = rng.uniform(-radius, radius);
      q += out[i] * out[i];
    }
    if (q <= radius * radius) return;
  }
}

} // namespace detail

// Homogeneous Poisson process on w: Poisson(rate * volume) points placed
// independently and uniformly.
inline PointPattern sample_homogeneous_poisson(double rate, const Window& w, SplitRng& rng) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw std::invalid_argument("sample_homogeneous_poisson: rate must be positive");
  const std::uint64_t n = rng.poisson(rate * w.volume());
  std::vector<double> flat;
  flat.reserve(n * static_cast<std::size_t>(w.dimension()));
  std::vector<double> p;
  for (std::uint64_t i = 0; i < n; ++i) {
    detail::uniform_point(w, rng, p);
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return PointPattern(w, std::move(flat));
}

// Matern cluster process restricted to w: Poisson(parent_rate) parents on the
// radius-dilated window, each spawning Poisson(mean_daughters) points uniform
// in the closed ball around it; daughters falling in w are returned. The
// restriction is stationary with intensity parent_rate * mean_daughters.
inline PointPattern sample_matern_cluster(double parent_rate, double mean_daughters, double radius,
                                          const Window& w, SplitRng& rng) {
  if (!(parent_rate > 0.0) || !(mean_daughters > 0.0) || !(radius > 0.0))
    throw std::invalid_argument("sample_matern_cluster: rates and radius must be positive");
  const Window parent_window = w.dilated(radius);
  const std::uint64_t n_parents = rng.poisson(parent_rate * parent_window.volume());
  std::vector<double> flat;
  std::vector<double> parent, offset, daughter(static_cast<std::size_t>(w.dimension()));
  for (std::uint64_t i = 0; i < n_parents; ++i) {
    detail::uniform_point(parent_window, rng, parent);
    const std::uint64_t n_daughters = rng.poisson(mean_daughters);
    for (std::uint64_t j = 0; j < n_daughters; ++j) {
      detail::uniform_ball_offset(w.dimension(), radius, rng, offset);
      for (int k = 0; k < w.dimension(); ++k) daughter[k] = parent[k] + offset[k];
      if (w.contains(daughter)) flat.insert(flat.end(), daughter.begin(), daughter.end());
    }
  }
  return PointPattern(w, std::move(flat));
}

// Stationary intensity of the Matern type II hard-core process (planar).
inline double matern_hardcore_intensity(double ground_rate, double hc_radius) {
  const double disc = std::numbers::pi * hc_radius * hc_radius;
  return -std::expm1(-ground_rate * disc) / disc;
}

// Matern type II hard-core process on w (d = 2 only; the retention intensity
// formula is planar). Ground points are Poisson(ground_rate) on the
// radius-dilated window with independent uniform(0,1) marks; a ground point in
// w survives iff no other ground point within hc_radius carries a strictly
// larger mark. Neighbor lookups use a cell list with cell side hc_radius.
inline PointPattern sample_matern_hardcore(double ground_rate, double hc_radius, const Window& w,
                                           SplitRng& rng) {
  if (w.dimension() != 2)
    throw std::invalid_argument("sample_matern_hardcore: only d = 2 is supported");
  if (!(ground_rate > 0.0) || !(hc_radius > 0.0))
    throw std::invalid_argument("sample_matern_hardcore: rate and radius must be positive");

  const Window ground_window = w.dilated(hc_radius);
  const std::uint64_t n = rng.poisson(ground_rate * ground_window.volume());
  std::vector<double> xs(n), ys(n), marks(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    xs[i] = rng.uniform(ground_window.lower()[0], ground_window.upper()[0]);
    ys[i] = rng.uniform(ground_window.lower()[1], ground_window.upper()[1]);
    marks[i] = rng.uniform01();
  }

  const int ncx = std::max(1, static_cast<int>(std::floor(ground_window.side(0) / hc_radius)));
  const int ncy = std::max(1, static_cast<int>(std::floor(ground_window.side(1) / hc_radius)));
  const double cw = ground_window.side(0) / ncx;
  const double ch = ground_window.side(1) / ncy;
  auto cell_of = [&](double x, double y) {
    int cx = std::min(ncx - 1, static_cast<int>((x - ground_window.lower()[0]) / cw));
    int cy = std::min(ncy - 1, static_cast<int>((y - ground_window.lower()[1]) / ch));
    return std::pair<int, int>(cx, cy);
  };
  std::vector<std::vector<std::uint64_t>> cells(static_cast<std::size_t>(ncx) * ncy);
  for (std::uint64_t i = 0; i < n; ++i) {
    auto [cx, cy] = cell_of(xs[i], ys[i]);
    cells[static_cast<std::size_t>(cy) * ncx + cx].push_back(i);
  }

  const double r2 = hc_radius * hc_radius;
  std::vector<double> flat;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double pt[2] = {xs[i], ys[i]};
    if (!w.contains(std::span<const double>(pt, 2))) continue;
    auto [cx, cy] = cell_of(xs[i], ys[i]);
    bool keep = true;
    for (int dy = -1; dy <= 1 && keep; ++dy) {
      for (int dx = -1; dx <= 1 && keep; ++dx) {
        const int nx = cx + dx, ny = cy + dy;
        if (nx < 0 || ny < 0 || nx >= ncx || ny >= ncy) continue;
        for (std::uint64_t j : cells[static_cast<std::size_t>(ny) * ncx + nx]) {
          if (j == i || marks[j] <= marks[i]) continue;
          const double ddx = xs[j] - xs[i], ddy = ys[j] - ys[i];
          if (ddx * ddx + ddy * ddy <= r2) {
            keep = false;
            break;
          }
        }
      }
    }
    if (keep) {
      flat.push_back(xs[i]);
      flat.push_back(ys[i]);
    }
  }
  return PointPattern(w, std::move(flat));
}

// Independent thinning: keep each point with probability lambda(point) /
// base_rate. Applied to a homogeneous process of intensity base_rate the
// result has intensity function lambda. The retention probability must never
// exceed 1, i.e. base_rate must dominate the supremum of the spec over w.
inline PointPattern thin(const PointPattern& pattern, const IntensitySpec& spec, double base_rate,
                         SplitRng& rng) {
  if (!(base_rate > 0.0) || !std::isfinite(base_rate))
    throw std::invalid_argument("thin: base_rate must be positive");
  std::vector<double> flat;
  flat.reserve(pattern.coords().size());
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const auto p = pattern.point(i);
    const double retention = spec.value(p) / base_rate;
    if (retention > 1.0 + 1e-12)
      throw std::invalid_argument("thin: retention probability exceeds 1 (base_rate below sup lambda)");
    if (rng.uniform01() < retention) flat.insert(flat.end(), p.begin(), p.end());
  }
  return PointPattern(pattern.window(), std::move(flat));
}

// Parameterizations used by the simulation study: every family is tuned so its
// homogeneous intensity equals the target before thinning.
struct ClusterParams {
  double parent_rate;
  double mean_daughters;
  double radius;
};

inline ClusterParams cluster_params_for(double target_intensity, double mean_daughters,
                                        double radius = 0.05) {
  if (!(target_intensity > 0.0) || !(mean_daughters > 0.0))
    throw std::invalid_argument("cluster_params_for: arguments must be positive");
  return ClusterParams{target_intensity / mean_daughters, mean_daughters, radius};
}

struct HardcoreParams {
  double ground_rate;
  double hc_radius;
};

// Ground rate -m * target * log(nu) and radius (m pi target)^{-1/2} with
// m = 1/(1 - nu); then exp(-kappa pi r^2) = nu and the retained intensity is
// (1 - nu) * m * target = target.
inline HardcoreParams hardcore_params_for(double target_intensity, double nu) {
  if (!(target_intensity > 0.0) || !(nu > 0.0) || !(nu < 1.0))
    throw std::invalid_argument("hardcore_params_for: need target > 0 and nu in (0,1)");
  const double m = 1.0 / (1.0 - nu);
  return HardcoreParams{-m * target_intensity * std::log(nu),
                        1.0 / std::sqrt(m * std::numbers::pi * target_intensity)};
}

} // namespace ppkde
