#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ppkde/kernels.hpp"
#include "ppkde/rng.hpp"
#include "support.hpp"

using namespace ppkde;
using std::numbers::pi;

namespace {
const double origin2[2] = {0.0, 0.0};
}

TEST_CASE("density at the origin") {
  CHECK(Kernel::beta(2, 0.0).density(origin2) == Catch::Approx(1.0 / pi).epsilon(1e-12));
  CHECK(Kernel::gaussian(2).density(origin2) == Catch::Approx(1.0 / (2 * pi)).epsilon(1e-12));
  // Epanechnikov normalization: polar quadrature gives Int_disc (1-r^2) = pi/2,
  // so the constant must be 2/pi.
  double quad = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const double r = (i + 0.5) / n;
    quad += (1.0 - r * r) * r / n;
  }
  quad *= 2 * pi;
  CHECK(quad == Catch::Approx(pi / 2).epsilon(1e-6));
  CHECK(Kernel::beta(2, 1.0).density(origin2) == Catch::Approx(2.0 / pi).epsilon(1e-12));
}

TEST_CASE("kernel_at_zero is strictly positive") {
  CHECK(Kernel::gaussian(2).at_zero() == Catch::Approx(1.0 / (2 * pi)).epsilon(1e-12));
  CHECK(Kernel::beta(2, 0.0).at_zero() == Catch::Approx(1.0 / pi).epsilon(1e-12));
  CHECK(Kernel::beta(1, 1.0).at_zero() == Catch::Approx(0.75).epsilon(1e-12));
  for (int d = 1; d <= 3; ++d) {
    CHECK(Kernel::gaussian(d).at_zero() > 0.0);
    for (double g : {0.0, 1.0, 2.0}) CHECK(Kernel::beta(d, g).at_zero() > 0.0);
  }
}

TEST_CASE("densities integrate to one") {
  for (int d = 1; d <= 3; ++d) {
    const int nodes = d == 3 ? 120 : 400;
    for (double g : {0.0, 1.0, 2.0})
      CHECK(ppkde::testing::quadrature_mass(Kernel::beta(d, g), 1.0, nodes) ==
            Catch::Approx(1.0).margin(1e-3));
    CHECK(ppkde::testing::quadrature_mass(Kernel::gaussian(d), 8.0, nodes) ==
          Catch::Approx(1.0).margin(1e-3));
  }
}

TEST_CASE("densities are even") {
  SplitRng rng(5);
  for (const Kernel& k : {Kernel::gaussian(2), Kernel::beta(2, 0.0), Kernel::beta(2, 2.0)}) {
    for (int i = 0; i < 200; ++i) {
      const double x[2] = {rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
      const double nx[2] = {-x[0], -x[1]};
      REQUIRE(k.density(x) == k.density(nx));
    }
  }
}

TEST_CASE("beta support is the closed unit ball") {
  const Kernel k = Kernel::beta(2, 2.0);
  const double just_out[2] = {1.0000001, 0.0};
  const double just_in[2] = {0.999, 0.0};
  CHECK(k.density(just_out) == 0.0);
  CHECK(k.density(just_in) > 0.0);
}

TEST_CASE("box integrals: exact cases") {
  const Window w = Window::unit_square();
  SECTION("box kernel fully contained is exactly one") {
    const double c[2] = {0.5, 0.5};
    CHECK(Kernel::beta(2, 0.0).box_integral(c, 0.25, w) == 1.0);
  }
  SECTION("gaussian 1d window mass matches the quadrature oracle") {
    const Window w1({0.0}, {1.0});
    const double c[1] = {0.0};
    const double expected = ppkde::testing::normal_mass_1d(0.0, 1.0); // ~0.341345
    CHECK(expected == Catch::Approx(0.341345).margin(1e-6));
    CHECK(Kernel::gaussian(1).box_integral(c, 1.0, w1) ==
          Catch::Approx(expected).margin(1e-8));
  }
  SECTION("gaussian tiny scale at the centroid captures all mass") {
    const double c[2] = {0.5, 0.5};
    CHECK(Kernel::gaussian(2).box_integral(c, 1e-4, w) == Catch::Approx(1.0).margin(1e-9));
  }
  SECTION("scale must be positive") {
    const double c[2] = {0.5, 0.5};
    CHECK_THROWS_AS(Kernel::gaussian(2).box_integral(c, 0.0, w), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::beta(2, 1.0).box_integral(c, -1.0, w), std::invalid_argument);
  }
}

TEST_CASE("box integrals are bounded and tend to one at small scales") {
  const Window w = Window::unit_square();
  SplitRng rng(17);
  for (const Kernel& k : {Kernel::gaussian(2), Kernel::beta(2, 0.0), Kernel::beta(2, 2.0)}) {
    for (int i = 0; i < 50; ++i) {
      const double c[2] = {rng.uniform01(), rng.uniform01()};
      const double scale = rng.uniform(1e-3, 2.0);
      const double v = k.box_integral(c, scale, w);
      REQUIRE(v > 0.0);
      REQUIRE(v <= 1.0 + 1e-9);
    }
    for (int i = 0; i < 10; ++i) {
      const double c[2] = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
      CHECK(k.box_integral(c, 1e-4 * w.min_side(), w) == Catch::Approx(1.0).margin(1e-6));
    }
  }
}

TEST_CASE("beta quadrature matches the independent oracle on a clipped ball") {
  // Center near the corner so the support pokes out of the window.
  const Window w = Window::unit_square();
  const double c[2] = {0.08, 0.12};
  const double scale = 0.3;
  for (double g : {1.0, 2.0}) {
    const Kernel k = Kernel::beta(2, g);
    // Oracle: fine midpoint rule over the window box itself in z-space.
    const int n = 600;
    double sum = 0.0;
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const double z[2] = {(ix + 0.5) / n, (iy + 0.5) / n};
        const double u[2] = {(c[0] - z[0]) / scale, (c[1] - z[1]) / scale};
        sum += k.density(u);
      }
    const double oracle = sum / (double(n) * n) / (scale * scale);
    CHECK(k.box_integral(c, scale, w) == Catch::Approx(oracle).margin(2e-4));
  }
}

TEST_CASE("beta gradient matches the analytic form for gamma > 1") {
  // d/dx of C (1 - x.x)^g is -2 g C (1 - x.x)^{g-1} x.
  const double g = 2.0;
  const Kernel k = Kernel::beta(2, g);
  const double C = k.at_zero();
  SplitRng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    double x[2];
    do {
      x[0] = rng.uniform(-0.9, 0.9);
      x[1] = rng.uniform(-0.9, 0.9);
    } while (x[0] * x[0] + x[1] * x[1] > 0.81);
    const double q = x[0] * x[0] + x[1] * x[1];
    const double eps = 1e-6;
    for (int axis = 0; axis < 2; ++axis) {
      double hi[2] = {x[0], x[1]}, lo[2] = {x[0], x[1]};
      hi[axis] += eps;
      lo[axis] -= eps;
      const double fd = (k.density(hi) - k.density(lo)) / (2 * eps);
      const double analytic = -2.0 * g * C * std::pow(1.0 - q, g - 1.0) * x[axis];
      REQUIRE(fd == Catch::Approx(analytic).margin(1e-5));
    }
  }
}

TEST_CASE("kernel parsing") {
  CHECK(Kernel::parse(2, "gaussian").family() == KernelFamily::gaussian);
  const Kernel b = Kernel::parse(2, "beta:1.5");
  CHECK(b.family() == KernelFamily::beta);
  CHECK(b.gamma() == Catch::Approx(1.5));
  CHECK(b.name() == "beta:1.5");
  CHECK_THROWS_AS(Kernel::parse(2, "beta:"), std::invalid_argument);
  CHECK_THROWS_AS(Kernel::parse(2, "beta:-1"), std::invalid_argument);
  CHECK_THROWS_AS(Kernel::parse(2, "tricube"), std::invalid_argument);
}
