#pragma once

// File exports: trajectory CSV/JSON, collapse-scan results and plain
// two-column data for gnuplot. Floats are written with 17 significant digits.

#include <vortexlab/collapse_lab.hpp>
#include <vortexlab/config.hpp>
#include <vortexlab/dynamics.hpp>

#include <filesystem>
#include <string>

namespace vortexlab {

std::string format_double(double value);

/// Writes via a sibling temporary file and a rename, so readers never see a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Columns t, x1_x, x1_y, ..., min_dist, H, M_x, M_y, I, C. Relative records
/// use y<j>_x, y<j>_y for the anchor's partners.
std::string trajectory_csv(const TrajectoryRecord& record);

Json trajectory_json(const TrajectoryRecord& record, const SimulateConfig& config, const DriftReport& drift);

struct ScanProvenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string timestamp;
};

Json scan_result_json(const CollapseScanResult& result, const ScanConfig& config, const ScanProvenance& provenance);

/// epsilon, hit_count, sample_count, inconclusive_count, initial_hit_count,
/// measure_fraction, ci_lower, ci_upper, rate
std::string scan_cells_csv(const CollapseScanResult& result);

/// Two whitespace-separated columns with a leading comment line.
std::string two_column_dat(const std::string& header, std::span<const double> x, std::span<const double> y);

/// UTC time as an ISO 8601 string.
std::string utc_timestamp();

/// git describe of the source tree at configure time.
const char* version_string();

}  // namespace vortexlab
