#pragma once

#include <charconv>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ppkde/geometry.hpp"

namespace ppkde {

enum class KernelFamily { beta, gaussian };

// Radial smoothing kernel: either a Beta-class kernel
//   kappa_gamma(x) = C(d,gamma) * (1 - x.x)^gamma on the closed unit ball,
//   C(d,gamma) = Gamma(d/2+gamma+1) / (pi^{d/2} Gamma(gamma+1)),
// or the standard Gaussian (2pi)^{-d/2} exp(-x.x/2). Both are probability
// densities on R^d, even in every argument, with a strictly positive value at
// the origin. gamma = 0 is the box kernel, gamma = 1 the Epanechnikov kernel.
class Kernel {
public:
  static Kernel gaussian(int dim) { return Kernel(KernelFamily::gaussian, dim, 0.0, 64); }

  static Kernel beta(int dim, double gamma, int quadrature_nodes = 64) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
      throw std::invalid_argument("Kernel::beta: gamma must be finite and >= 0");
    return Kernel(KernelFamily::beta, dim, gamma, quadrature_nodes);
  }

  static Kernel box(int dim) { return beta(dim, 0.0); }

  // Accepts "gaussian" or "beta:<gamma>" (the CLI kernel grammar).
  static Kernel parse(int dim, std::string_view token) {
    if (token == "gaussian") return gaussian(dim);
    constexpr std::string_view prefix = "beta:";
    if (token.substr(0, prefix.size()) == prefix) {
      const std::string_view num = token.substr(prefix.size());
      double g = 0.0;
      const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), g);
      if (ec != std::errc{} || ptr != num.data() + num.size())
        throw std::invalid_argument("Kernel::parse: bad gamma in '" + std::string(token) + "'");
      return beta(dim, g);
    }
    throw std::invalid_argument("Kernel::parse: expected 'gaussian' or 'beta:<gamma>', got '" +
                                std::string(token) + "'");
  }

  KernelFamily family() const noexcept { return family_; }
  int dimension() const noexcept { return dim_; }
  double gamma() const noexcept { return gamma_; }
  bool compact_support() const noexcept { return family_ == KernelFamily::beta; }
  int quadrature_nodes() const noexcept { return quad_nodes_; }

  std::string name() const {
    if (family_ == KernelFamily::gaussian) return "gaussian";
    char buf[48];
    const int len = std::snprintf(buf, sizeof buf, "beta:%g", gamma_);
    return std::string(buf, static_cast<std::size_t>(len));
  }

  // Density as a function of the squared norm q = x.x (both families are radial).
  double density_q(double q) const noexcept {
    if (family_ == KernelFamily::gaussian) return norm_const_ * std::exp(-0.5 * q);
    if (q > 1.0) return 0.0;
    return norm_const_ * std::pow(1.0 - q, gamma_);
  }

  double density(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
      throw std::invalid_argument("Kernel::density: point dimension mismatch");
    double q = 0.0;
    for (double v : x) q += v * v;
    return density_q(q);
  }

  double at_zero() const noexcept { return norm_const_; }

  // Kernel mass a scaled bump centered at `center` leaves inside the window:
  //   scale^-d * Integral_W density((center - z)/scale) dz, in (0,1] for
  // centers inside W. Gaussian windows factor into 1-d normal CDF differences
  // (exact up to erf); Beta kernels use a tensor midpoint rule on the bounding
  // box of the support ball clipped to W, after an exact-containment shortcut.
  double box_integral(std::span<const double> center, double scale, const Window& w) const {
    if (static_cast<int>(center.size()) != dim_ || w.dimension() != dim_)
      throw std::invalid_argument("Kernel::box_integral: dimension mismatch");
    if (!(scale > 0.0) || !std::isfinite(scale))
      throw std::invalid_argument("Kernel::box_integral: scale must be positive");

    if (family_ == KernelFamily::gaussian) {
      double prod = 1.0;
      const double inv = 1.0 / (scale * std::numbers::sqrt2);
      for (int i = 0; i < dim_; ++i) {
        const double a = (w.lower()[i] - center[i]) * inv;
        const double b = (w.upper()[i] - center[i]) * inv;
        prod *= 0.5 * (std::erf(b) - std::erf(a));
      }
      return prod;
    }

    // Support ball B(center, scale): fully inside the closed box means the
    // whole unit of kernel mass is inside W.
    bool inside = true;
    for (int i = 0; i < dim_ && inside; ++i)
      inside = center[i] - scale >= w.lower()[i] && center[i] + scale <= w.upper()[i];
    if (inside) return 1.0;

    std::vector<double> lo(dim_), step(dim_);
    double cell_vol = 1.0;
    for (int i = 0; i < dim_; ++i) {
      const double a = std::max(w.lower()[i], center[i] - scale);
      const double b = std::min(w.upper()[i], center[i] + scale);
      if (!(a < b)) return 0.0;
      lo[i] = a;
      step[i] = (b - a) / quad_nodes_;
      cell_vol *= step[i];
    }

    std::vector<int> idx(dim_, 0);
    std::vector<double> z(dim_);
    double sum = 0.0;
    for (;;) {
      double q = 0.0;
      for (int i = 0; i < dim_; ++i) {
        z[i] = lo[i] + (idx[i] + 0.5) * step[i];
        const double u = (center[i] - z[i]) / scale;
        q += u * u;
      }
      sum += density_q(q);
      int axis = 0;
      while (axis < dim_ && ++idx[axis] == quad_nodes_) idx[axis++] = 0;
      if (axis == dim_) break;
    }
    return sum * cell_vol / std::pow(scale, dim_);
  }

private:
  Kernel(KernelFamily family, int dim, double gamma, int quad_nodes)
      : family_(family), dim_(dim), gamma_(gamma), quad_nodes_(quad_nodes) {
    if (dim_ < 1) throw std::invalid_argument("Kernel: dimension must be positive");
    if (quad_nodes_ < 2) throw std::invalid_argument("Kernel: need at least 2 quadrature nodes");
    if (family_ == KernelFamily::gaussian) {
      norm_const_ = std::pow(2.0 * std::numbers::pi, -0.5 * dim_);
    } else {
      norm_const_ = std::exp(std::lgamma(0.5 * dim_ + gamma_ + 1.0) - std::lgamma(gamma_ + 1.0)) *
                    std::pow(std::numbers::pi, -0.5 * dim_);
    }
  }

  KernelFamily family_;
  int dim_;
  double gamma_;
  int quad_nodes_;
  double norm_const_;
};

} // namespace ppkde
