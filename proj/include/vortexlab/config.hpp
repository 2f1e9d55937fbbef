#pragma once

// JSON configuration documents for the command-line front end. Every
// document carries "schema_version": 1 and unknown fields are rejected.

#include <vortexlab/collapse_lab.hpp>
#include <vortexlab/kernels.hpp>

#include "json.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace vortexlab {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Validation failure; what() carries the JSON pointer of the field or the
/// line/column of a syntax error.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"kind": "euler"} or {"kind": "sqg", "s": 0.75}, optionally with
/// "epsilon" for the regularized variant. "sqg" with s = 1 is Euler.
struct KernelSpec {
  KernelKind kind = KernelKind::Euler;
  double s = 1.0;
  std::optional<double> epsilon;

  KernelProfile<double> profile() const;
  std::string describe() const;
};

/// Singular or regularized kernel chosen at run time.
using AnyKernel = std::variant<KernelProfile<double>, RegularizedKernel<double>>;
AnyKernel make_kernel(const KernelSpec& spec);

struct SystemSpec {
  std::vector<double> intensities;
  std::vector<std::array<double, 2>> positions;

  VortexSystem<double> build() const;
};

struct SimulateConfig {
  SystemSpec system;
  KernelSpec kernel;
  double final_time = 1.0;
  IntegratorConfig integrator;
  /// Record every output_interval time units instead of every step.
  std::optional<double> output_interval;
};

struct InvariantsConfig {
  SystemSpec system;
  KernelSpec kernel;
};

struct KernelCheckConfig {
  std::vector<KernelSpec> kernels;
  std::vector<double> epsilons;
  int grid_points = 2000;
  double grid_extent = 10.0;
};

struct CollapseDemoConfig {
  std::array<double, 3> intensities{1.0, 1.0, -0.5};
  std::uint64_t seed = 1;
  int search_budget = 2000;
  double final_time = 10.0;
  IntegratorConfig integrator;
};

Json load_json_file(const std::filesystem::path& path);

KernelSpec parse_kernel(const Json& doc, const std::string& path = "/kernel");
SimulateConfig parse_simulate(const Json& doc);
InvariantsConfig parse_invariants(const Json& doc);
KernelCheckConfig parse_kernel_check(const Json& doc);
CollapseDemoConfig parse_collapse_demo(const Json& doc);
ScanConfig parse_scan(const Json& doc);

Json to_json(const KernelSpec& spec);
Json to_json(const IntegratorConfig& config);
Json to_json(const ScanConfig& config);
Json to_json(const SimulateConfig& config);

/// 64-bit FNV-1a of the compact serialization, as "fnv1a64:<hex>".
std::string config_hash(const Json& doc);

}  // namespace vortexlab
