#pragma once

#include <string_view>

namespace ppkde {

inline constexpr std::string_view kVersion = "0.1.0";

// Schema tags embedded in config files and printed by `ppkde --version`.
// Bump the trailing integer whenever the corresponding byte format changes.
inline constexpr std::string_view kPointsCsvSchema = "ppkde/points/1";
inline constexpr std::string_view kFieldCsvSchema = "ppkde/raster-csv/1";
inline constexpr std::string_view kFieldAscSchema = "ppkde/raster-asc/1";
inline constexpr std::string_view kTraceCsvSchema = "ppkde/trace/1";
inline constexpr std::string_view kReportCsvSchema = "ppkde/report/1";
inline constexpr std::string_view kSimulateConfigSchema = "ppkde/simulate/1";
inline constexpr std::string_view kBenchmarkConfigSchema = "ppkde/benchmark/1";

} // namespace ppkde
