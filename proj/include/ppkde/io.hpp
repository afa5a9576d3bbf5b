#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ppkde/benchmark.hpp"
#include "ppkde/estimators.hpp"
#include "ppkde/generators.hpp"
#include "ppkde/geometry.hpp"
#include "ppkde/selection.hpp"
#include "ppkde/version.hpp"

namespace ppkde {

namespace detail {

// Shortest round-trip decimal representation; keeps every emitted file
// byte-stable across runs.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

inline bool parse_double(const std::string& token, double& out) {
  const std::string t = trim(token);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && std::isfinite(out);
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary); // binary: LF line endings everywhere
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

} // namespace detail

struct CsvLoadResult {
  PointPattern pattern;
  std::vector<std::string> warnings;
};

// Point catalog CSV: one header row, one coordinate column per axis named
// x1..xd (x,y accepted as aliases when d = 2), '.' decimal separator, LF or
// CRLF line endings. Extra columns are ignored with a warning; malformed rows
// fail with their 1-based line number.
inline CsvLoadResult load_points_csv(const std::filesystem::path& path, const Window& window) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");

  const int d = window.dimension();
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path.string() + ": missing header row");
  // Strip a UTF-8 byte-order mark if present.
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  line = detail::strip_cr(line);

  const std::vector<std::string> header = detail::split_csv_line(line);
  std::vector<int> column_of_axis(static_cast<std::size_t>(d), -1);
  std::vector<std::string> names(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) names[c] = detail::trim(header[c]);

  auto locate = [&](const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
  };
  for (int axis = 0; axis < d; ++axis)
    column_of_axis[axis] = locate("x" + std::to_string(axis + 1));
  const bool canonical =
      std::all_of(column_of_axis.begin(), column_of_axis.end(), [](int c) { return c >= 0; });
  if (!canonical && d == 2) {
    column_of_axis[0] = locate("x");
    column_of_axis[1] = locate("y");
  }
  for (int axis = 0; axis < d; ++axis) {
    if (column_of_axis[axis] < 0)
      throw std::runtime_error(path.string() + ": header must name coordinate columns x1..x" +
                               std::to_string(d) + (d == 2 ? " (or x,y)" : ""));
  }

  CsvLoadResult result{PointPattern::empty(window), {}};
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (std::find(column_of_axis.begin(), column_of_axis.end(), static_cast<int>(c)) ==
        column_of_axis.end())
      result.warnings.push_back("ignoring column '" + names[c] + "'");
  }

  std::vector<double> flat;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_cr(line);
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    for (int axis = 0; axis < d; ++axis) {
      double v = 0.0;
      if (!detail::parse_double(fields[static_cast<std::size_t>(column_of_axis[axis])], v))
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                 ": malformed number in column '" +
                                 names[static_cast<std::size_t>(column_of_axis[axis])] + "'");
      flat.push_back(v);
    }
  }

  try {
    result.pattern = PointPattern(window, std::move(flat));
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return result;
}

inline void write_points_csv(const std::filesystem::path& path, const PointPattern& pattern) {
  std::ofstream out = detail::open_out(path);
  const int d = pattern.dimension();
  if (d == 2) {
    out << "x,y\n";
  } else {
    for (int axis = 0; axis < d; ++axis) out << (axis ? "," : "") << "x" << axis + 1;
    out << "\n";
  }
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const auto p = pattern.point(i);
    for (int axis = 0; axis < d; ++axis)
      out << (axis ? "," : "") << detail::format_double(p[static_cast<std::size_t>(axis)]);
    out << "\n";
  }
}

// Raster CSV: header x,y,value (x1..xd,value for d != 2), one row per cell in
// flat cell order (x fastest, then y, ...).
inline void write_field_csv(const std::filesystem::path& path, const IntensityField& field) {
  std::ofstream out = detail::open_out(path);
  const int d = field.grid.dimension();
  if (d == 2) {
    out << "x,y,value\n";
  } else {
    for (int axis = 0; axis < d; ++axis) out << "x" << axis + 1 << ",";
    out << "value\n";
  }
  std::vector<double> center(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    field.grid.center(i, center);
    for (double c : center) out << detail::format_double(c) << ",";
    out << detail::format_double(field.values[i]) << "\n";
  }
}

// ESRI-style ASCII grid (d = 2, square cells): six header lines
// (ncols/nrows/xllcorner/yllcorner/cellsize/NODATA_value -9999) then one line
// per row, top row first (highest y), values left to right, space separated.
inline void write_field_asc(const std::filesystem::path& path, const IntensityField& field) {
  if (field.grid.dimension() != 2)
    throw std::runtime_error("ASCII-grid export requires a planar raster");
  const int nx = field.grid.resolution()[0];
  const int ny = field.grid.resolution()[1];
  const double sx = field.grid.step(0);
  const double sy = field.grid.step(1);
  if (std::abs(sx - sy) > 1e-9 * std::max(sx, sy))
    throw std::runtime_error("ASCII-grid export requires square cells; pick a resolution "
                             "proportional to the window sides or use the CSV raster");
  std::ofstream out = detail::open_out(path);
  out << "ncols " << nx << "\n"
      << "nrows " << ny << "\n"
      << "xllcorner " << detail::format_double(field.grid.window().lower()[0]) << "\n"
      << "yllcorner " << detail::format_double(field.grid.window().lower()[1]) << "\n"
      << "cellsize " << detail::format_double(sx) << "\n"
      << "NODATA_value -9999\n";
  for (int iy = ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t flat = static_cast<std::size_t>(iy) * nx + ix;
      out << (ix ? " " : "") << detail::format_double(field.values[flat]);
    }
    out << "\n";
  }
}

// Selection diagnostics: h, criterion value, and absolute discrepancy from the
// window volume, one row per probed bandwidth.
inline void write_trace_csv(const std::filesystem::path& path, const CriterionTrace& trace) {
  std::ofstream out = detail::open_out(path);
  out << "h,T,F\n";
  for (std::size_t i = 0; i < trace.h_values.size(); ++i)
    out << detail::format_double(trace.h_values[i]) << ","
        << detail::format_double(trace.T_values[i]) << ","
        << detail::format_double(std::abs(trace.T_values[i] - trace.target)) << "\n";
}

inline void write_report_csv(const std::filesystem::path& path, const BenchmarkReport& report) {
  std::ofstream out = detail::open_out(path);
  out << "intensity_id,family,selector,mean_rel_mise,stderr,n_fail\n";
  for (const CellReport& cell : report.cells)
    out << cell.intensity_id << "," << family_name(cell.family) << ","
        << selector_name(cell.selector) << "," << detail::format_double(cell.mean_rel_mise) << ","
        << detail::format_double(cell.std_error) << "," << cell.n_fail << "\n";
}

inline void write_replications_csv(const std::filesystem::path& path,
                                   const BenchmarkReport& report) {
  std::ofstream out = detail::open_out(path);
  out << "intensity_id,family,selector,rep,seed,n_points,h_pilot,h_selected,converged,ise,rel_ise,"
         "error\n";
  for (const CellReport& cell : report.cells) {
    for (const ReplicationRecord& rec : cell.replications) {
      std::string err = rec.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      out << cell.intensity_id << "," << family_name(cell.family) << ","
          << selector_name(cell.selector) << "," << rec.rep << "," << rec.seed << ","
          << rec.n_points << "," << detail::format_double(rec.h_pilot) << ","
          << detail::format_double(rec.h_selected) << "," << (rec.converged ? 1 : 0) << ","
          << detail::format_double(rec.ise) << "," << detail::format_double(rec.rel_ise) << ","
          << err << "\n";
    }
  }
}

inline void write_comparison_csv(const std::filesystem::path& path,
                                 const std::vector<SelectorComparison>& rows) {
  std::ofstream out = detail::open_out(path);
  out << "intensity_id,family,global_mean_rel_mise,adaptive_mean_rel_mise,winner,ratio\n";
  for (const SelectorComparison& row : rows)
    out << row.intensity_id << "," << family_name(row.family) << ","
        << detail::format_double(row.global_mise) << ","
        << detail::format_double(row.adaptive_mise) << ","
        << (row.winner > 0 ? "adaptive" : row.winner < 0 ? "global" : "tie") << ","
        << detail::format_double(row.ratio) << "\n";
}

// Human-readable table: intensities as rows, families as columns.
inline std::string render_report_table(const BenchmarkReport& report) {
  std::vector<int> ids;
  std::vector<ProcessFamily> families;
  for (const auto& cell : report.cells) {
    if (std::find(ids.begin(), ids.end(), cell.intensity_id) == ids.end())
      ids.push_back(cell.intensity_id);
    if (std::find(families.begin(), families.end(), cell.family) == families.end())
      families.push_back(cell.family);
  }
  auto value_of = [&](int id, ProcessFamily f) -> const CellReport* {
    for (const auto& cell : report.cells)
      if (cell.intensity_id == id && cell.family == f) return &cell;
    return nullptr;
  };

  std::ostringstream out;
  out << "mean integrated squared error / expected points  (selector: "
      << selector_name(report.selector) << ", reps: " << report.n_reps << ", seed: "
      << report.master_seed << ")\n";
  out << std::left << std::setw(12) << "intensity";
  for (ProcessFamily f : families) out << std::right << std::setw(12) << family_name(f);
  out << "\n";
  out << std::fixed << std::setprecision(2);
  for (int id : ids) {
    out << std::left << std::setw(12) << ("lambda_" + std::to_string(id));
    for (ProcessFamily f : families) {
      const CellReport* cell = value_of(id, f);
      if (!cell) {
        out << std::right << std::setw(12) << "-";
        continue;
      }
      std::ostringstream v;
      v << std::fixed << std::setprecision(2) << cell->mean_rel_mise;
      if (cell->n_fail > 0) v << "!" << cell->n_fail;
      out << std::right << std::setw(12) << v.str();
    }
    out << "\n";
  }
  return out.str();
}

inline std::string render_comparison_table(const std::vector<SelectorComparison>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "intensity" << std::setw(12) << "family" << std::right
      << std::setw(12) << "global" << std::setw(12) << "adaptive" << std::setw(10) << "winner"
      << std::setw(10) << "ratio" << "\n";
  for (const SelectorComparison& row : rows) {
    out << std::left << std::setw(12) << ("lambda_" + std::to_string(row.intensity_id))
        << std::setw(12) << std::string(family_name(row.family));
    out << std::right << std::fixed << std::setprecision(2) << std::setw(12) << row.global_mise
        << std::setw(12) << row.adaptive_mise;
    out << std::setw(10) << (row.winner > 0 ? "adaptive" : row.winner < 0 ? "global" : "tie");
    out << std::setw(10) << std::setprecision(3) << row.ratio << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// JSON run configs. Schemas are strict: unknown keys are rejected so a typo
// cannot silently fall back to a default.

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::vector<std::string>& required,
                         const std::vector<std::string>& optional, const std::string& what) {
  if (!j.is_object()) throw std::runtime_error(what + ": expected a JSON object");
  for (const auto& key : required)
    if (!j.contains(key)) throw std::runtime_error(what + ": missing required key '" + key + "'");
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (std::find(required.begin(), required.end(), key) == required.end() &&
        std::find(optional.begin(), optional.end(), key) == optional.end())
      throw std::runtime_error(what + ": unknown key '" + key + "'");
  }
}

inline Window parse_window_json(const nlohmann::json& j) {
  if (j.is_array()) {
    // [xmin, xmax, ymin, ymax]
    if (j.size() != 4) throw std::runtime_error("window: expected [xmin,xmax,ymin,ymax]");
    return Window::box2(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                        j[3].get<double>());
  }
  require_keys(j, {"lower", "upper"}, {}, "window");
  return Window(j["lower"].get<std::vector<double>>(), j["upper"].get<std::vector<double>>());
}

inline IntensitySpec parse_intensity_json(const nlohmann::json& j) {
  if (j.contains("id")) {
    require_keys(j, {"id"}, {}, "intensity");
    return IntensitySpec::table1(j["id"].get<int>());
  }
  require_keys(j, {"form"}, {"a", "b", "lambda"}, "intensity");
  const std::string form = j["form"].get<std::string>();
  if (form == "constant") {
    if (!j.contains("lambda")) throw std::runtime_error("intensity: constant form needs 'lambda'");
    return IntensitySpec::constant(j["lambda"].get<double>());
  }
  if (!j.contains("a") || !j.contains("b"))
    throw std::runtime_error("intensity: form '" + form + "' needs 'a' and 'b'");
  if (form == "trend") return IntensitySpec::trend(j["a"].get<double>(), j["b"].get<double>());
  if (form == "feature") return IntensitySpec::feature(j["a"].get<double>(), j["b"].get<double>());
  throw std::runtime_error("intensity: unknown form '" + form + "'");
}

} // namespace detail

struct SimulateConfig {
  std::string family; // poisson | matern_cluster | matern_hardcore
  double rate = 0.0;  // poisson
  double parent_rate = 0.0, mean_daughters = 0.0, cluster_radius = 0.0;
  double ground_rate = 0.0, hardcore_radius = 0.0;
  Window window = Window::unit_square();
  std::uint64_t seed = 0;
  std::optional<IntensitySpec> thin_to;

  // Homogeneous intensity of the base process; the thinning denominator.
  double base_intensity() const {
    if (family == "poisson") return rate;
    if (family == "matern_cluster") return parent_rate * mean_daughters;
    return matern_hardcore_intensity(ground_rate, hardcore_radius);
  }
};

inline SimulateConfig parse_simulate_config(const nlohmann::json& j) {
  detail::require_keys(j, {"schema", "family", "seed", "window"},
                       {"rate", "parent_rate", "mean_daughters", "cluster_radius", "ground_rate",
                        "hardcore_radius", "thin_to"},
                       "simulate config");
  if (j["schema"].get<std::string>() != kSimulateConfigSchema)
    throw std::runtime_error("simulate config: schema must be '" +
                             std::string(kSimulateConfigSchema) + "'");
  SimulateConfig cfg;
  cfg.family = j["family"].get<std::string>();
  cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.window = detail::parse_window_json(j["window"]);
  auto need = [&](const char* key) {
    if (!j.contains(key))
      throw std::runtime_error(std::string("simulate config: family '") + cfg.family +
                               "' needs key '" + key + "'");
    return j[key].get<double>();
  };
  if (cfg.family == "poisson") {
    cfg.rate = need("rate");
  } else if (cfg.family == "matern_cluster") {
    cfg.parent_rate = need("parent_rate");
    cfg.mean_daughters = need("mean_daughters");
    cfg.cluster_radius = need("cluster_radius");
  } else if (cfg.family == "matern_hardcore") {
    cfg.ground_rate = need("ground_rate");
    cfg.hardcore_radius = need("hardcore_radius");
  } else {
    throw std::runtime_error("simulate config: unknown family '" + cfg.family +
                             "' (expected poisson|matern_cluster|matern_hardcore)");
  }
  if (j.contains("thin_to")) cfg.thin_to = detail::parse_intensity_json(j["thin_to"]);
  return cfg;
}

inline PointPattern run_simulate_config(const SimulateConfig& cfg) {
  SplitRng rng(cfg.seed);
  PointPattern base = [&] {
    if (cfg.family == "poisson")
      return sample_homogeneous_poisson(cfg.rate, cfg.window, rng);
    if (cfg.family == "matern_cluster")
      return sample_matern_cluster(cfg.parent_rate, cfg.mean_daughters, cfg.cluster_radius,
                                   cfg.window, rng);
    return sample_matern_hardcore(cfg.ground_rate, cfg.hardcore_radius, cfg.window, rng);
  }();
  if (!cfg.thin_to) return base;
  return thin(base, *cfg.thin_to, cfg.base_intensity(), rng);
}

struct BenchmarkCliConfig {
  ExperimentConfig experiment;
  bool run_global = true;
  bool run_adaptive = false;
};

inline BenchmarkCliConfig parse_benchmark_config(const nlohmann::json& j) {
  detail::require_keys(j, {"schema", "intensity_ids", "families", "selector", "master_seed"},
                       {"n_reps", "kernel", "alpha", "grid_resolution", "h_min", "h_max", "n_h"},
                       "benchmark config");
  if (j["schema"].get<std::string>() != kBenchmarkConfigSchema)
    throw std::runtime_error("benchmark config: schema must be '" +
                             std::string(kBenchmarkConfigSchema) + "'");
  BenchmarkCliConfig cfg;
  ExperimentConfig& e = cfg.experiment;
  e.intensity_ids = j["intensity_ids"].get<std::vector<int>>();
  for (const auto& name : j["families"].get<std::vector<std::string>>())
    e.families.push_back(family_from_name(name));
  e.master_seed = j["master_seed"].get<std::uint64_t>();
  if (j.contains("n_reps")) e.n_reps = j["n_reps"].get<int>();
  if (j.contains("kernel")) e.kernel = Kernel::parse(2, j["kernel"].get<std::string>());
  if (j.contains("alpha")) e.alpha = j["alpha"].get<double>();
  if (j.contains("grid_resolution")) {
    const auto res = j["grid_resolution"].get<std::vector<int>>();
    if (res.size() != 2) throw std::runtime_error("benchmark config: grid_resolution must be [nx,ny]");
    e.grid_resolution = {res[0], res[1]};
  }
  if (j.contains("h_min")) e.search.h_min = j["h_min"].get<double>();
  if (j.contains("h_max")) e.search.h_max = j["h_max"].get<double>();
  if (j.contains("n_h")) e.search.n_h = j["n_h"].get<int>();

  const std::string selector = j["selector"].get<std::string>();
  if (selector == "global") {
    cfg.run_global = true;
    cfg.run_adaptive = false;
  } else if (selector == "adaptive") {
    cfg.run_global = false;
    cfg.run_adaptive = true;
  } else if (selector == "both") {
    cfg.run_global = cfg.run_adaptive = true;
  } else {
    throw std::runtime_error("benchmark config: selector must be global|adaptive|both");
  }
  e.validate();
  return cfg;
}

} // namespace ppkde
