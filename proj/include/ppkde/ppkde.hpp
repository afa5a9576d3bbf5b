#pragma once

// Kernel estimation of spatial point-process intensity functions with fully
// non-parametric bandwidth selection: a global selector balancing the
// Stoyan-Grabarnik statistic against the window volume, and a two-step
// adaptive selector with Abramson square-root scaling. Includes the point
// process simulators and the MISE benchmark harness used to exercise both.

#include "ppkde/benchmark.hpp"
#include "ppkde/estimators.hpp"
#include "ppkde/generators.hpp"
#include "ppkde/geometry.hpp"
#include "ppkde/io.hpp"
#include "ppkde/kernels.hpp"
#include "ppkde/rng.hpp"
#include "ppkde/selection.hpp"
#include "ppkde/version.hpp"
