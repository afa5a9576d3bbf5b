#pragma once

// Shared helpers for the test suites: seeded pattern generators and the
// independent quadrature oracles the expected values were frozen from.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "ppkde/geometry.hpp"
#include "ppkde/kernels.hpp"
#include "ppkde/rng.hpp"

namespace ppkde::testing {

// n points uniform in the window, deterministic in the seed.
inline PointPattern random_pattern(const Window& w, std::size_t n, std::uint64_t seed) {
  SplitRng rng(seed);
  std::vector<double> flat;
  flat.reserve(n * static_cast<std::size_t>(w.dimension()));
  for (std::size_t i = 0; i < n; ++i)
    for (int axis = 0; axis < w.dimension(); ++axis)
      flat.push_back(rng.uniform(w.lower()[axis], w.upper()[axis]));
  return PointPattern(w, std::move(flat));
}

// Tensor midpoint quadrature of the kernel density over [-half, half]^d.
// Deliberately independent of Kernel::box_integral (different code path and
// integration variable); used to validate normalization and box integrals.
inline double quadrature_mass(const Kernel& k, double half, int nodes) {
  const int d = k.dimension();
  const double step = 2.0 * half / nodes;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> x(static_cast<std::size_t>(d));
  double sum = 0.0;
  for (;;) {
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = -half + (idx[static_cast<std::size_t>(i)] + 0.5) * step;
    sum += k.density(x);
    int axis = 0;
    while (axis < d && ++idx[static_cast<std::size_t>(axis)] == nodes) idx[static_cast<std::size_t>(axis++)] = 0;
    if (axis == d) break;
  }
  return sum * std::pow(step, d);
}

// Midpoint quadrature of the standard normal density over [a, b]; the
// independent oracle for Gaussian window masses in one dimension.
inline double normal_mass_1d(double a, double b, int nodes = 20000) {
  const double step = (b - a) / nodes;
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double x = a + (i + 0.5) * step;
    sum += std::exp(-0.5 * x * x);
  }
  return sum * step / std::sqrt(2.0 * M_PI);
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("ppkde_test_" + tag);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace ppkde::testing
