#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppkde {

// Axis-aligned bounded open box in R^d. All observation windows are boxes;
// they admit exact volumes and separable kernel integrals.
class Window {
public:
  Window(std::vector<double> lower, std::vector<double> upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty() || lower_.size() != upper_.size())
      throw std::invalid_argument("Window: lower/upper must be non-empty and of equal length");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
      if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i]))
        throw std::invalid_argument("Window: requires finite lower[i] < upper[i] on axis " +
                                    std::to_string(i));
    }
    volume_ = 1.0;
    for (std::size_t i = 0; i < lower_.size(); ++i) volume_ *= upper_[i] - lower_[i];
  }

  static Window box2(double xmin, double xmax, double ymin, double ymax) {
    return Window({xmin, ymin}, {xmax, ymax});
  }

  static Window unit_square() { return box2(0.0, 1.0, 0.0, 1.0); }

  int dimension() const noexcept { return static_cast<int>(lower_.size()); }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  double side(int axis) const { return upper_.at(axis) - lower_.at(axis); }
  double volume() const noexcept { return volume_; }

  // Length of the box diagonal; used as the default upper end of bandwidth searches.
  double diameter() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < lower_.size(); ++i) {
      const double d = upper_[i] - lower_[i];
      s += d * d;
    }
    return std::sqrt(s);
  }

  double min_side() const noexcept {
    double m = upper_[0] - lower_[0];
    for (std::size_t i = 1; i < lower_.size(); ++i) m = std::min(m, upper_[i] - lower_[i]);
    return m;
  }

  // Strict containment: the window is open, so boundary points are outside.
  bool contains(std::span<const double> x) const {
    if (x.size() != lower_.size())
      throw std::invalid_argument("Window::contains: point dimension mismatch");
    for (std::size_t i = 0; i < lower_.size(); ++i)
      if (!(lower_[i] < x[i] && x[i] < upper_[i])) return false;
    return true;
  }

  // Box grown by `margin` on every side. Stationary processes are simulated on
  // the dilated window so their restriction to this window has no edge deficit.
  Window dilated(double margin) const {
    if (!(margin >= 0.0)) throw std::invalid_argument("Window::dilated: margin must be >= 0");
    std::vector<double> lo = lower_, hi = upper_;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      lo[i] -= margin;
      hi[i] += margin;
    }
    return Window(std::move(lo), std::move(hi));
  }

  friend bool operator==(const Window& a, const Window& b) {
    return a.lower_ == b.lower_ && a.upper_ == b.upper_;
  }

private:
  std::vector<double> lower_, upper_;
  double volume_;
};

inline double volume(const Window& w) { return w.volume(); }

// Finite pattern of pairwise-distinct points observed in an open window.
// Coordinates are stored flat (point i occupies [i*d, (i+1)*d)).
class PointPattern {
public:
  PointPattern(Window window, std::vector<double> flat_coords)
      : window_(std::move(window)), coords_(std::move(flat_coords)) {
    const std::size_t d = static_cast<std::size_t>(window_.dimension());
    if (coords_.size() % d != 0)
      throw std::invalid_argument("PointPattern: coordinate count is not a multiple of the dimension");
    const std::size_t n = coords_.size() / d;
    for (std::size_t i = 0; i < n; ++i) {
      if (!window_.contains(point(i)))
        throw std::invalid_argument("PointPattern: point " + std::to_string(i) +
                                    " lies outside the (open) window");
    }
    check_distinct(n, d);
  }

  static PointPattern empty(Window window) { return PointPattern(std::move(window), {}); }

  static PointPattern from_points(const std::vector<std::vector<double>>& pts, Window window) {
    std::vector<double> flat;
    flat.reserve(pts.size() * static_cast<std::size_t>(window.dimension()));
    for (const auto& p : pts) {
      if (static_cast<int>(p.size()) != window.dimension())
        throw std::invalid_argument("PointPattern: point dimension mismatch");
      flat.insert(flat.end(), p.begin(), p.end());
    }
    return PointPattern(std::move(window), std::move(flat));
  }

  std::size_t size() const noexcept {
    return coords_.size() / static_cast<std::size_t>(window_.dimension());
  }
  bool empty() const noexcept { return coords_.empty(); }
  int dimension() const noexcept { return window_.dimension(); }
  const Window& window() const noexcept { return window_; }
  const std::vector<double>& coords() const noexcept { return coords_; }

  std::span<const double> point(std::size_t i) const {
    const std::size_t d = static_cast<std::size_t>(window_.dimension());
    return std::span<const double>(coords_.data() + i * d, d);
  }

private:
  void check_distinct(std::size_t n, std::size_t d) const {
    if (n < 2) return;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(coords_.begin() + a * d, coords_.begin() + (a + 1) * d,
                                          coords_.begin() + b * d, coords_.begin() + (b + 1) * d);
    };
    std::sort(order.begin(), order.end(), less);
    for (std::size_t i = 1; i < n; ++i) {
      if (std::equal(coords_.begin() + order[i - 1] * d, coords_.begin() + (order[i - 1] + 1) * d,
                     coords_.begin() + order[i] * d))
        throw std::invalid_argument("PointPattern: duplicate point (points must be pairwise distinct)");
    }
  }

  Window window_;
  std::vector<double> coords_;
};

// Regular lattice of cell centers over a window (midpoint rule). Cells flatten
// in C order with the FIRST axis varying fastest: in d=2 with resolution
// (nx, ny), cell (ix, iy) has flat index iy*nx + ix, i.e. scanlines of
// constant y with x ascending, y ascending across scanlines.
class Grid {
public:
  Grid(Window window, std::vector<int> resolution)
      : window_(std::move(window)), resolution_(std::move(resolution)) {
    if (static_cast<int>(resolution_.size()) != window_.dimension())
      throw std::invalid_argument("Grid: resolution rank must match the window dimension");
    cell_count_ = 1;
    for (int n : resolution_) {
      if (n < 1) throw std::invalid_argument("Grid: cell counts must be >= 1");
      cell_count_ *= static_cast<std::size_t>(n);
    }
    step_.resize(resolution_.size());
    for (std::size_t i = 0; i < resolution_.size(); ++i)
      step_[i] = window_.side(static_cast<int>(i)) / resolution_[i];
  }

  static Grid square2(const Window& window, int nx, int ny) { return Grid(window, {nx, ny}); }

  const Window& window() const noexcept { return window_; }
  int dimension() const noexcept { return window_.dimension(); }
  const std::vector<int>& resolution() const noexcept { return resolution_; }
  std::size_t cell_count() const noexcept { return cell_count_; }
  double step(int axis) const { return step_.at(axis); }

  double cell_volume() const noexcept {
    double v = 1.0;
    for (double s : step_) v *= s;
    return v;
  }

  void center(std::size_t flat, std::span<double> out) const {
    for (std::size_t axis = 0; axis < resolution_.size(); ++axis) {
      const std::size_t n = static_cast<std::size_t>(resolution_[axis]);
      const std::size_t k = flat % n;
      flat /= n;
      out[axis] = window_.lower()[axis] + (static_cast<double>(k) + 0.5) * step_[axis];
    }
  }

  std::vector<double> center(std::size_t flat) const {
    std::vector<double> out(resolution_.size());
    center(flat, out);
    return out;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.window_ == b.window_ && a.resolution_ == b.resolution_;
  }

private:
  Window window_;
  std::vector<int> resolution_;
  std::vector<double> step_;
  std::size_t cell_count_;
};

inline Grid make_grid(const Window& window, std::vector<int> resolution) {
  return Grid(window, std::move(resolution));
}

} // namespace ppkde
