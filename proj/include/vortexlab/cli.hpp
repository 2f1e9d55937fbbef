#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vortexlab {

enum class Command { Simulate, Invariants, CollapseScan, KernelCheck, CollapseDemo };

struct RunManifest {
  Command command = Command::Simulate;
  std::filesystem::path config_path;
  std::filesystem::path output_dir = ".";
  std::optional<std::uint64_t> seed_override;
  int threads = 0;  // 0: hardware concurrency
  bool emit_gnuplot = false;
};

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitCollapse = 2;  // simulate: EpsCollapse; kernel-check: a condition failed
inline constexpr int kExitUnderflow = 3;
inline constexpr int kExitNotFound = 4;  // collapse-demo found no candidate

/// Runs one command. Messages go to out, diagnostics to err.
int run(const RunManifest& manifest, std::ostream& out, std::ostream& err);

/// Parses argv and runs the selected subcommand.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vortexlab
