#include <vortexlab/io.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#ifndef VORTEXLAB_VERSION
#define VORTEXLAB_VERSION "unknown"
#endif

namespace vortexlab {

namespace {

// Numbers that do not fit JSON (non-finite) are written as null.
Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string trajectory_csv(const TrajectoryRecord& record) {
  const int n = record.states.empty() ? 0 : static_cast<int>(record.states.front().cols());
  const bool relative = record.kind == StateKind::Relative;
  std::ostringstream out;
  out << "t";
  for (int c = 0; c < n; ++c) {
    if (relative) {
      const int j = c < record.anchor ? c : c + 1;
      out << ",y" << j + 1 << "_x,y" << j + 1 << "_y";
    } else {
      out << ",x" << c + 1 << "_x,x" << c + 1 << "_y";
    }
  }
  out << ",min_dist,H,M_x,M_y,I,C\r\n";
  for (std::size_t k = 0; k < record.size(); ++k) {
    out << format_double(record.times[k]);
    for (int c = 0; c < n; ++c) {
      out << ',' << format_double(record.states[k](0, c)) << ',' << format_double(record.states[k](1, c));
    }
    out << ',' << format_double(record.min_pair_distance[k]);
    if (k < record.invariant_log.size()) {
      const InvariantSample& q = record.invariant_log[k];
      out << ',' << format_double(q.hamiltonian) << ',' << format_double(q.vorticity_vector.x()) << ','
          << format_double(q.vorticity_vector.y()) << ',' << format_double(q.moment_of_inertia) << ','
          << format_double(q.collapse_constraint);
    } else {
      out << ",,,,,";
    }
    out << "\r\n";
  }
  return out.str();
}

Json trajectory_json(const TrajectoryRecord& record, const SimulateConfig& config, const DriftReport& drift) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = version_string();
  j["config"] = to_json(config);
  j["config_hash"] = config_hash(to_json(config));
  const TerminationInfo& term = record.termination;
  Json t{{"cause", to_string(term.cause)}, {"time", term.time}};
  if (term.first >= 0) {
    t["pair"] = {term.first, term.second};
    t["distance"] = number_or_null(term.distance);
  }
  j["termination"] = t;
  j["stats"] = {{"accepted_steps", record.stats.accepted},
                {"rejected_steps", record.stats.rejected},
                {"rhs_evaluations", record.stats.rhs_evaluations}};
  j["drift"] = {{"H", number_or_null(drift.hamiltonian)},
                {"M", number_or_null(drift.vorticity_vector)},
                {"I", number_or_null(drift.moment_of_inertia)},
                {"C", number_or_null(drift.collapse_constraint)}};
  j["samples"] = record.size();
  if (record.size() > 0) {
    const Pointsd& last = record.states.back();
    Json pos = Json::array();
    for (int c = 0; c < last.cols(); ++c) pos.push_back({last(0, c), last(1, c)});
    j["final_time"] = record.times.back();
    j["final_positions"] = pos;
    j["final_min_dist"] = number_or_null(record.min_pair_distance.back());
  }
  return j;
}

Json scan_result_json(const CollapseScanResult& result, const ScanConfig& config, const ScanProvenance& provenance) {
  Json cells = Json::array();
  for (const ScanCell& c : result.cells) {
    cells.push_back({{"epsilon", c.epsilon},
                     {"hit_count", c.hit_count},
                     {"sample_count", c.sample_count},
                     {"inconclusive_count", c.inconclusive_count},
                     {"initial_hit_count", c.initial_hit_count},
                     {"measure_fraction", c.measure_fraction},
                     {"wilson_ci_95", {c.wilson_ci_95.lower, c.wilson_ci_95.upper}},
                     {"rate", c.rate}});
  }
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = version_string();
  j["config_hash"] = provenance.config_hash;
  j["seed"] = provenance.seed;
  j["timestamp"] = provenance.timestamp;
  j["config"] = to_json(config);
  j["rate_law"] = to_string(result.rate_law);
  j["nominal_exponent"] = nominal_exponent(result.rate_law, config.s);
  j["cells"] = cells;
  j["fitted_exponent"] = result.fitted_exponent ? Json(*result.fitted_exponent) : Json(nullptr);
  j["fit_cells"] = result.fit_cells;
  j["upper_bound_constant"] = result.upper_bound_constant;
  j["insufficient_hits"] = result.insufficient_hits;
  return j;
}

std::string scan_cells_csv(const CollapseScanResult& result) {
  std::ostringstream out;
  out << "epsilon,hit_count,sample_count,inconclusive_count,initial_hit_count,measure_fraction,ci_lower,ci_upper,"
         "rate\r\n";
  for (const ScanCell& c : result.cells) {
    out << format_double(c.epsilon) << ',' << c.hit_count << ',' << c.sample_count << ',' << c.inconclusive_count
        << ',' << c.initial_hit_count << ',' << format_double(c.measure_fraction) << ','
        << format_double(c.wilson_ci_95.lower) << ',' << format_double(c.wilson_ci_95.upper) << ','
        << format_double(c.rate) << "\r\n";
  }
  return out.str();
}

std::string two_column_dat(const std::string& header, std::span<const double> x, std::span<const double> y) {
  std::ostringstream out;
  out << "# " << header << '\n';
  for (std::size_t k = 0; k < x.size() && k < y.size(); ++k) {
    out << format_double(x[k]) << ' ' << format_double(y[k]) << '\n';
  }
  return out.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* version_string() { return VORTEXLAB_VERSION; }

}  // namespace vortexlab
