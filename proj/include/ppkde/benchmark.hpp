#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ppkde/estimators.hpp"
#include "ppkde/generators.hpp"
#include "ppkde/geometry.hpp"
#include "ppkde/kernels.hpp"
#include "ppkde/rng.hpp"
#include "ppkde/selection.hpp"

namespace ppkde {

// The five point-process models of the simulation study. Cluster and
// hard-core parameters derive from the target intensity so every family is
// homogeneous with intensity sup(lambda) before thinning.
enum class ProcessFamily { poisson, cluster5, cluster10, hardcore09, hardcore05 };

inline constexpr std::array<ProcessFamily, 5> kAllFamilies = {
    ProcessFamily::poisson, ProcessFamily::cluster5, ProcessFamily::cluster10,
    ProcessFamily::hardcore09, ProcessFamily::hardcore05};

inline std::string_view family_name(ProcessFamily f) {
  switch (f) {
    case ProcessFamily::poisson: return "poisson";
    case ProcessFamily::cluster5: return "cluster5";
    case ProcessFamily::cluster10: return "cluster10";
    case ProcessFamily::hardcore09: return "hardcore09";
    case ProcessFamily::hardcore05: return "hardcore05";
  }
  return "?";
}

inline ProcessFamily family_from_name(std::string_view name) {
  for (ProcessFamily f : kAllFamilies)
    if (family_name(f) == name) return f;
  throw std::invalid_argument("unknown process family '" + std::string(name) +
                              "' (expected poisson|cluster5|cluster10|hardcore09|hardcore05)");
}

// Stable code mixed into replication seeds; independent of config ordering.
inline std::uint64_t family_code(ProcessFamily f) {
  switch (f) {
    case ProcessFamily::poisson: return 1;
    case ProcessFamily::cluster5: return 2;
    case ProcessFamily::cluster10: return 3;
    case ProcessFamily::hardcore09: return 4;
    case ProcessFamily::hardcore05: return 5;
  }
  return 0;
}

enum class SelectorKind { global, adaptive };

inline std::string_view selector_name(SelectorKind s) {
  return s == SelectorKind::global ? "global" : "adaptive";
}

struct ExperimentConfig {
  std::vector<int> intensity_ids;     // subset of 1..10
  std::vector<ProcessFamily> families;
  int n_reps = 100;
  SelectorKind selector = SelectorKind::global;
  Kernel kernel = Kernel::gaussian(2);
  double alpha = -0.5;
  std::array<int, 2> grid_resolution{128, 128};
  std::uint64_t master_seed = 0;
  SearchConfig search{};
  int threads = 1;

  void validate() const {
    if (intensity_ids.empty() || families.empty())
      throw std::invalid_argument("ExperimentConfig: need at least one intensity and one family");
    for (int id : intensity_ids)
      if (id < 1 || id > 10)
        throw std::invalid_argument("ExperimentConfig: intensity ids must be in 1..10");
    if (n_reps < 1) throw std::invalid_argument("ExperimentConfig: n_reps must be >= 1");
    if (grid_resolution[0] < 32 || grid_resolution[1] < 32)
      throw std::invalid_argument("ExperimentConfig: grid resolution must be >= 32 per axis");
    if (kernel.dimension() != 2)
      throw std::invalid_argument("ExperimentConfig: benchmark runs on the unit square (d = 2)");
    if (threads < 1) throw std::invalid_argument("ExperimentConfig: threads must be >= 1");
  }
};

// Integrated squared error between a raster and the true intensity, by the
// midpoint rule on the raster's own grid.
inline double ise(const IntensityField& field, const IntensitySpec& truth) {
  double sum = 0.0;
  std::vector<double> center(static_cast<std::size_t>(field.grid.dimension()));
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    field.grid.center(i, center);
    const double diff = field.values[i] - truth.value(center);
    sum += diff * diff;
  }
  return sum * field.grid.cell_volume();
}

// Expected number of points on the unit square (closed form).
inline double expected_count(const IntensitySpec& truth) { return truth.integral_unit_square(); }

// Midpoint-rule expected count, the quadrature cross-check of the closed form.
inline double expected_count_quadrature(const IntensitySpec& truth, const Window& w,
                                        int nodes_per_axis = 512) {
  if (w.dimension() != 2)
    throw std::invalid_argument("expected_count_quadrature: planar windows only");
  const double sx = w.side(0) / nodes_per_axis;
  const double sy = w.side(1) / nodes_per_axis;
  double sum = 0.0;
  for (int iy = 0; iy < nodes_per_axis; ++iy) {
    const double y = w.lower()[1] + (iy + 0.5) * sy;
    for (int ix = 0; ix < nodes_per_axis; ++ix)
      sum += truth.value(w.lower()[0] + (ix + 0.5) * sx, y);
  }
  return sum * sx * sy;
}

// One simulated pattern for a benchmark cell: homogeneous base process with
// intensity sup(lambda_i), independently thinned to the target intensity.
inline PointPattern simulate_cell_pattern(const IntensitySpec& spec, ProcessFamily family,
                                          const Window& w, SplitRng& rng) {
  const double lambda_bar = spec.supremum();
  PointPattern base = [&] {
    switch (family) {
      case ProcessFamily::poisson:
        return sample_homogeneous_poisson(lambda_bar, w, rng);
      case ProcessFamily::cluster5: {
        const ClusterParams p = cluster_params_for(lambda_bar, 5.0);
        return sample_matern_cluster(p.parent_rate, p.mean_daughters, p.radius, w, rng);
      }
      case ProcessFamily::cluster10: {
        const ClusterParams p = cluster_params_for(lambda_bar, 10.0);
        return sample_matern_cluster(p.parent_rate, p.mean_daughters, p.radius, w, rng);
      }
      case ProcessFamily::hardcore09: {
        const HardcoreParams p = hardcore_params_for(lambda_bar, 0.9);
        return sample_matern_hardcore(p.ground_rate, p.hc_radius, w, rng);
      }
      case ProcessFamily::hardcore05: {
        const HardcoreParams p = hardcore_params_for(lambda_bar, 0.5);
        return sample_matern_hardcore(p.ground_rate, p.hc_radius, w, rng);
      }
    }
    throw std::logic_error("simulate_cell_pattern: unknown family");
  }();
  return thin(base, spec, lambda_bar, rng);
}

struct ReplicationRecord {
  int rep = 0;
  std::uint64_t seed = 0;       // substream key the pattern was drawn from
  std::size_t n_points = 0;
  double h_pilot = 0.0;         // step-1 bandwidth (equals h_selected for the global selector)
  double h_selected = 0.0;
  bool converged = false;
  bool ok = false;              // produced an ISE value
  std::string error;            // failure reason when !ok
  double ise = 0.0;
  double rel_ise = 0.0;         // ise / expected count
};

struct CellReport {
  int intensity_id = 0;
  ProcessFamily family = ProcessFamily::poisson;
  SelectorKind selector = SelectorKind::global;
  double mean_rel_mise = 0.0;   // mean of rel_ise over successful replications
  double std_error = 0.0;       // sample standard error of that mean
  int n_fail = 0;               // replications with no ISE
  int n_nonconverged = 0;       // successful replications whose selection did not bracket a root
  std::vector<ReplicationRecord> replications;
};

struct BenchmarkReport {
  SelectorKind selector = SelectorKind::global;
  std::uint64_t master_seed = 0;
  int n_reps = 0;
  std::vector<CellReport> cells;

  double fraction_ok() const {
    std::size_t total = 0, ok = 0;
    for (const auto& c : cells)
      for (const auto& r : c.replications) {
        ++total;
        ok += r.ok ? 1 : 0;
      }
    return total == 0 ? 1.0 : static_cast<double>(ok) / static_cast<double>(total);
  }
};

namespace detail {

// Replication seeds chain master -> intensity -> family -> rep, so a cell's
// patterns do not depend on which other cells are configured, and the global
// and adaptive selectors see identical patterns for the same master seed.
inline SplitRng replication_stream(std::uint64_t master_seed, int intensity_id,
                                   ProcessFamily family, int rep) {
  return SplitRng(master_seed)
      .substream(static_cast<std::uint64_t>(intensity_id))
      .substream(family_code(family))
      .substream(static_cast<std::uint64_t>(rep));
}

inline ReplicationRecord run_replication(const ExperimentConfig& cfg, const IntensitySpec& spec,
                                         ProcessFamily family, int rep) {
  ReplicationRecord rec;
  rec.rep = rep;
  const Window w = Window::unit_square();
  SplitRng rng = replication_stream(cfg.master_seed, spec.id(), family, rep);
  rec.seed = rng.key();
  try {
    const PointPattern pattern = simulate_cell_pattern(spec, family, w, rng);
    rec.n_points = pattern.size();
    if (pattern.empty()) throw std::runtime_error("empty pattern after thinning");

    const Grid grid(w, {cfg.grid_resolution[0], cfg.grid_resolution[1]});
    IntensityField field{grid, {}};
    if (cfg.selector == SelectorKind::global) {
      const BandwidthResult sel = select_global(pattern, cfg.kernel, cfg.search);
      rec.h_pilot = rec.h_selected = sel.h_selected;
      rec.converged = sel.converged;
      field = rasterize_fixed(pattern, sel.h_selected, cfg.kernel, grid, EdgeCorrection::local);
    } else {
      const AdaptiveSelection sel = select_adaptive(pattern, cfg.kernel, cfg.search, cfg.alpha);
      rec.h_pilot = sel.pilot_bandwidth;
      rec.h_selected = sel.result.h_selected;
      rec.converged = sel.result.converged && (!sel.global || sel.global->converged);
      field = rasterize_adaptive(pattern, sel.result.h_selected, sel.scale, cfg.kernel, grid,
                                 EdgeCorrection::local);
    }
    rec.ise = ise(field, spec);
    rec.rel_ise = rec.ise / expected_count(spec);
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

} // namespace detail

// Full selector x generator x intensity sweep. Replications are the unit of
// parallelism; records land in preassigned slots and aggregation is a
// sequential fold in replication order, so the report is identical for any
// thread count.
inline BenchmarkReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  BenchmarkReport report;
  report.selector = cfg.selector;
  report.master_seed = cfg.master_seed;
  report.n_reps = cfg.n_reps;

  struct Task {
    std::size_t cell;
    int rep;
  };
  std::vector<Task> tasks;
  report.cells.reserve(cfg.intensity_ids.size() * cfg.families.size());
  for (int id : cfg.intensity_ids) {
    for (ProcessFamily family : cfg.families) {
      CellReport cell;
      cell.intensity_id = id;
      cell.family = family;
      cell.selector = cfg.selector;
      cell.replications.resize(static_cast<std::size_t>(cfg.n_reps));
      const std::size_t cell_index = report.cells.size();
      report.cells.push_back(std::move(cell));
      for (int rep = 0; rep < cfg.n_reps; ++rep) tasks.push_back(Task{cell_index, rep});
    }
  }

  ppkde::detail::parallel_chunks(tasks.size(), cfg.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      const Task& task = tasks[t];
      CellReport& cell = report.cells[task.cell];
      const IntensitySpec spec = IntensitySpec::table1(cell.intensity_id);
      cell.replications[static_cast<std::size_t>(task.rep)] =
          detail::run_replication(cfg, spec, cell.family, task.rep);
    }
  });

  for (CellReport& cell : report.cells) {
    double sum = 0.0;
    int n_ok = 0;
    for (const auto& rec : cell.replications) {
      if (!rec.ok) {
        ++cell.n_fail;
        continue;
      }
      if (!rec.converged) ++cell.n_nonconverged;
      sum += rec.rel_ise;
      ++n_ok;
    }
    if (n_ok > 0) {
      cell.mean_rel_mise = sum / n_ok;
      double ss = 0.0;
      for (const auto& rec : cell.replications) {
        if (!rec.ok) continue;
        const double d = rec.rel_ise - cell.mean_rel_mise;
        ss += d * d;
      }
      cell.std_error = n_ok > 1 ? std::sqrt(ss / (n_ok - 1)) / std::sqrt(double(n_ok)) : 0.0;
    } else {
      cell.mean_rel_mise = std::numeric_limits<double>::quiet_NaN();
      cell.std_error = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return report;
}

struct SelectorComparison {
  int intensity_id = 0;
  ProcessFamily family = ProcessFamily::poisson;
  double global_mise = 0.0;
  double adaptive_mise = 0.0;
  int winner = 0;   // +1 adaptive smaller, -1 global smaller, 0 tie
  double ratio = 0.0; // adaptive / global
};

// Cell-by-cell comparison of two reports with matching layouts.
inline std::vector<SelectorComparison> compare_selectors(const BenchmarkReport& global_report,
                                                         const BenchmarkReport& adaptive_report) {
  if (global_report.cells.size() != adaptive_report.cells.size())
    throw std::invalid_argument("compare_selectors: cell layouts differ");
  std::vector<SelectorComparison> rows;
  rows.reserve(global_report.cells.size());
  for (std::size_t i = 0; i < global_report.cells.size(); ++i) {
    const CellReport& g = global_report.cells[i];
    const CellReport& a = adaptive_report.cells[i];
    if (g.intensity_id != a.intensity_id || g.family != a.family)
      throw std::invalid_argument("compare_selectors: cell layouts differ");
    SelectorComparison row;
    row.intensity_id = g.intensity_id;
    row.family = g.family;
    row.global_mise = g.mean_rel_mise;
    row.adaptive_mise = a.mean_rel_mise;
    row.winner = a.mean_rel_mise < g.mean_rel_mise   ? 1
                 : g.mean_rel_mise < a.mean_rel_mise ? -1
                                                     : 0;
    row.ratio = a.mean_rel_mise / g.mean_rel_mise;
    rows.push_back(row);
  }
  return rows;
}

} // namespace ppkde
