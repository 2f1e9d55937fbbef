#include <vortexlab/cli.hpp>

#include <vortexlab/collapse_lab.hpp>
#include <vortexlab/config.hpp>
#include <vortexlab/dynamics.hpp>
#include <vortexlab/io.hpp>

#include "CLI11.hpp"

#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace vortexlab {

namespace fs = std::filesystem;

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("VORTEXLAB_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (errno != 0 || *end != '\0' || raw[0] == '-') throw ConfigError("VORTEXLAB_SEED: expected a non-negative integer");
  return v;
}

std::optional<std::uint64_t> effective_seed(const RunManifest& m) {
  if (m.seed_override) return m.seed_override;
  return env_seed();
}

void prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

std::string sci(double v, int digits = 3) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(digits) << v;
  return s.str();
}

std::vector<double> sample_grid(double final_time, double interval) {
  std::vector<double> times;
  for (long k = 1;; ++k) {
    const double t = static_cast<double>(k) * interval;
    if (t >= final_time * (1.0 - 1e-12)) break;
    times.push_back(t);
  }
  times.push_back(final_time);
  return times;
}

int simulate(const RunManifest& m, std::ostream& out, std::ostream&) {
  const SimulateConfig config = parse_simulate(load_json_file(m.config_path));
  const VortexSystem<double> system = config.system.build();
  RecordOptions options;
  if (config.output_interval) options.sample_times = sample_grid(config.final_time, *config.output_interval);

  const TrajectoryRecord record = std::visit(
      [&](const auto& kernel) { return integrate(system, kernel, config.final_time, config.integrator, options); },
      make_kernel(config.kernel));
  const DriftReport drift = drift_audit(record);

  prepare_output_dir(m.output_dir);
  write_file_atomic(m.output_dir / "trajectory.csv", trajectory_csv(record));
  write_file_atomic(m.output_dir / "trajectory.json", trajectory_json(record, config, drift).dump(2) + "\n");
  if (m.emit_gnuplot) {
    write_file_atomic(m.output_dir / "min_dist.dat",
                      two_column_dat("t min_dist", record.times, record.min_pair_distance));
  }

  const TerminationInfo& term = record.termination;
  out << "termination: " << to_string(term.cause) << " at t = " << format_double(term.time);
  if (term.first >= 0) out << " (vortices " << term.first << " and " << term.second << ", distance " << sci(term.distance) << ")";
  out << "\n";
  out << "steps: " << record.stats.accepted << " accepted, " << record.stats.rejected << " rejected\n";
  out << "drift: H " << sci(drift.hamiltonian) << ", M " << sci(drift.vorticity_vector) << ", I "
      << sci(drift.moment_of_inertia) << ", C " << sci(drift.collapse_constraint) << "\n";

  switch (term.cause) {
    case Termination::ReachedFinalTime: return kExitOk;
    case Termination::EpsCollapse: return kExitCollapse;
    case Termination::StepUnderflow: return kExitUnderflow;
  }
  return kExitOk;
}

int invariants(const RunManifest& m, std::ostream& out, std::ostream&) {
  const InvariantsConfig config = parse_invariants(load_json_file(m.config_path));
  const VortexSystem<double> system = config.system.build();
  const auto snap = std::visit([&](const auto& kernel) { return snapshot(system, kernel); }, make_kernel(config.kernel));
  const CollapseConstraint<double> c = collapse_constraint(system);
  const ClusterDiagnostics clusters = cluster_diagnostics(system.intensities());

  Json j{{"schema_version", kSchemaVersion},
         {"kernel", config.kernel.describe()},
         {"H", snap.hamiltonian},
         {"M", {snap.vorticity_vector.x(), snap.vorticity_vector.y()}},
         {"I", snap.moment_of_inertia},
         {"C", snap.collapse_constraint},
         {"C_identity", c.from_identity},
         {"C_identity_residual", c.relative_residual},
         {"diameter", snap.diameter},
         {"cluster_class", to_string(clusters.classification)},
         {"min_proper_subset_sum", clusters.min_proper_subset_sum},
         {"min_subset_sum", clusters.min_subset_sum}};
  if (snap.center_of_vorticity) {
    j["center_of_vorticity"] = {snap.center_of_vorticity->x(), snap.center_of_vorticity->y()};
  } else {
    j["center_of_vorticity"] = nullptr;
  }
  if (!std::isfinite(clusters.min_proper_subset_sum)) j["min_proper_subset_sum"] = nullptr;

  prepare_output_dir(m.output_dir);
  write_file_atomic(m.output_dir / "invariants.json", j.dump(2) + "\n");

  auto row = [&](const std::string& name, const std::string& value) {
    out << std::left << std::setw(24) << name << value << "\n";
  };
  row("kernel", config.kernel.describe());
  row("H", format_double(snap.hamiltonian));
  row("M", format_double(snap.vorticity_vector.x()) + " " + format_double(snap.vorticity_vector.y()));
  row("I", format_double(snap.moment_of_inertia));
  row("C", format_double(snap.collapse_constraint));
  row("2(sum a)I - 2|M|^2", format_double(c.from_identity));
  row("identity residual", sci(c.relative_residual));
  row("diameter", format_double(snap.diameter));
  row("center of vorticity", snap.center_of_vorticity ? format_double(snap.center_of_vorticity->x()) + " " +
                                                           format_double(snap.center_of_vorticity->y())
                                                     : "undefined (zero total intensity)");
  row("clusters", to_string(clusters.classification));
  return kExitOk;
}

int collapse_scan(const RunManifest& m, std::ostream& out, std::ostream& err) {
  const Json doc = load_json_file(m.config_path);
  ScanConfig config = parse_scan(doc);
  if (const auto seed = effective_seed(m)) config.rng_seed = *seed;

  ScanOptions options;
  options.threads = m.threads > 0 ? m.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  options.progress = [&](std::size_t index, const ScanCell& cell) {
    err << "cell " << index + 1 << "/" << config.epsilons.size() << ": eps = " << format_double(cell.epsilon)
        << ", hits " << cell.hit_count << "/" << cell.sample_count << " (" << cell.initial_hit_count
        << " at t = 0, " << cell.inconclusive_count << " inconclusive)\n";
  };
  const CollapseScanResult result = scan(config, options);

  const ScanProvenance provenance{config_hash(to_json(config)), config.rng_seed, utc_timestamp()};
  prepare_output_dir(m.output_dir);
  write_file_atomic(m.output_dir / "scan_result.json", scan_result_json(result, config, provenance).dump(2) + "\n");
  write_file_atomic(m.output_dir / "scan_cells.csv", scan_cells_csv(result));
  if (m.emit_gnuplot) {
    std::vector<double> eps, frac;
    for (const ScanCell& c : result.cells) {
      eps.push_back(c.epsilon);
      frac.push_back(c.measure_fraction);
    }
    write_file_atomic(m.output_dir / "measure_fraction.dat", two_column_dat("epsilon measure_fraction", eps, frac));
  }

  out << "rate law: " << to_string(result.rate_law) << " (nominal exponent "
      << format_double(nominal_exponent(result.rate_law, config.s)) << ")\n";
  if (result.fitted_exponent) {
    out << "fitted exponent: " << format_double(*result.fitted_exponent) << " over " << result.fit_cells << " cells\n";
  } else {
    out << "fitted exponent: unavailable (fewer than two cells with " << CollapseScanResult::kMinFitHits
        << " hits)\n";
  }
  out << "upper bound constant: " << format_double(result.upper_bound_constant) << "\n";
  return kExitOk;
}

int kernel_check(const RunManifest& m, std::ostream& out, std::ostream&) {
  const KernelCheckConfig config = parse_kernel_check(load_json_file(m.config_path));
  constexpr double kJunctionTolerance = 1e-6;

  Json rows = Json::array();
  bool all_pass = true;
  out << std::left << std::setw(16) << "kernel" << std::setw(10) << "eps" << std::setw(12) << "cond1"
      << std::setw(12) << "cond2" << std::setw(12) << "cond3" << std::setw(12) << "cond4" << "junction\n";
  for (const KernelSpec& spec : config.kernels) {
    for (double eps : config.epsilons) {
      const RegularizedKernel<double> kernel = regularize(spec.profile(), eps);
      const RegularizationReport r = check_regularization(kernel, config.grid_points, config.grid_extent);
      const bool junction_ok = r.junction_residual() <= kJunctionTolerance;
      const bool pass = r.conditions_pass() && junction_ok;
      all_pass = all_pass && pass;

      auto cell = [](const ConditionCheck& c) {
        return (c.pass ? std::string("ok ") : std::string("FAIL ")) + sci(c.worst_margin, 1);
      };
      auto check_json = [](const ConditionCheck& c) {
        return Json{{"pass", c.pass}, {"worst_margin", c.worst_margin}, {"worst_at", c.worst_at},
                    {"violations", c.violations}};
      };
      out << std::setw(16) << spec.describe() << std::setw(10) << sci(eps, 1) << std::setw(12)
          << cell(r.matches_base) << std::setw(12) << cell(r.bounded_by_base) << std::setw(12) << cell(r.slope_bounded)
          << std::setw(12) << cell(r.bounded_by_twice) << ' ' << (junction_ok ? "ok " : "FAIL ") << sci(r.junction_residual(), 1)
          << "\n";
      rows.push_back({{"kernel", to_json(spec)},
                      {"epsilon", eps},
                      {"pass", pass},
                      {"condition_1", check_json(r.matches_base)},
                      {"condition_2", check_json(r.bounded_by_base)},
                      {"condition_3", check_json(r.slope_bounded)},
                      {"condition_4", check_json(r.bounded_by_twice)},
                      {"junction_value_residual", r.junction_value_residual},
                      {"junction_slope_residual", r.junction_slope_residual},
                      {"max_fd_error_away", r.max_fd_error_away},
                      {"max_fd_error_junction", r.max_fd_error_junction}});
    }
  }
  prepare_output_dir(m.output_dir);
  write_file_atomic(m.output_dir / "kernel_check.json",
                    Json{{"schema_version", kSchemaVersion},
                         {"grid_points", config.grid_points},
                         {"grid_extent", config.grid_extent},
                         {"all_pass", all_pass},
                         {"results", rows}}
                            .dump(2) + "\n");
  return all_pass ? kExitOk : kExitCollapse;
}

int collapse_demo(const RunManifest& m, std::ostream& out, std::ostream&) {
  CollapseDemoConfig config = parse_collapse_demo(load_json_file(m.config_path));
  if (const auto seed = effective_seed(m)) config.seed = *seed;

  Rng rng = stream_rng(config.seed, 0, 0);
  CollapseSearchOptions options;
  options.budget = config.search_budget;
  options.max_collapse_time = 0.5 * config.final_time;
  const auto candidate = find_collapse_candidate(config.intensities, rng, options);
  if (!candidate) {
    out << "no collapsing configuration found within " << config.search_budget << " attempts\n";
    return kExitNotFound;
  }

  const KernelProfile<double> euler = KernelProfile<double>::euler();
  const TrajectoryRecord record = integrate(*candidate, euler, config.final_time, config.integrator);
  const double min_dist = *std::min_element(record.min_pair_distance.begin(), record.min_pair_distance.end());

  SimulateConfig sim;
  sim.system.intensities.assign(config.intensities.begin(), config.intensities.end());
  for (int i = 0; i < 3; ++i) sim.system.positions.push_back({candidate->position(i).x(), candidate->position(i).y()});
  sim.kernel = KernelSpec{};
  sim.final_time = config.final_time;
  sim.integrator = config.integrator;

  const CollapseConstraint<double> c = collapse_constraint(*candidate);
  Json j{{"schema_version", kSchemaVersion},
         {"seed", config.seed},
         {"intensities", config.intensities},
         {"positions", to_json(sim)["positions"]},
         {"C", c.value},
         {"termination", {{"cause", to_string(record.termination.cause)}, {"time", record.termination.time}}},
         {"min_pair_distance", min_dist}};

  prepare_output_dir(m.output_dir);
  write_file_atomic(m.output_dir / "collapse_demo.json", j.dump(2) + "\n");
  write_file_atomic(m.output_dir / "simulate_config.json", to_json(sim).dump(2) + "\n");
  write_file_atomic(m.output_dir / "trajectory.csv", trajectory_csv(record));
  if (m.emit_gnuplot) {
    write_file_atomic(m.output_dir / "min_dist.dat",
                      two_column_dat("t min_dist", record.times, record.min_pair_distance));
  }

  out << "candidate: C = " << sci(c.value) << "\n";
  for (int i = 0; i < 3; ++i) {
    out << "  x" << i + 1 << " = (" << format_double(candidate->position(i).x()) << ", "
        << format_double(candidate->position(i).y()) << ")\n";
  }
  out << "termination: " << to_string(record.termination.cause) << " at t = "
      << format_double(record.termination.time) << ", min pair distance " << sci(min_dist) << "\n";
  return kExitOk;
}

}  // namespace

int run(const RunManifest& m, std::ostream& out, std::ostream& err) {
  try {
    switch (m.command) {
      case Command::Simulate: return simulate(m, out, err);
      case Command::Invariants: return invariants(m, out, err);
      case Command::CollapseScan: return collapse_scan(m, out, err);
      case Command::KernelCheck: return kernel_check(m, out, err);
      case Command::CollapseDemo: return collapse_demo(m, out, err);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const SingularityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"vortexlab: point-vortex dynamics and collapse experiments"};
  app.set_version_flag("--version", std::string(version_string()));
  app.require_subcommand(1);

  RunManifest manifest;
  std::string config_path;
  std::string output_dir = ".";
  std::uint64_t seed = 0;

  struct Entry {
    const char* name;
    const char* help;
    Command command;
  };
  const Entry entries[] = {
      {"simulate", "Integrate a vortex system and write its trajectory", Command::Simulate},
      {"invariants", "Print the conserved quantities of a configuration", Command::Invariants},
      {"collapse-scan", "Monte Carlo estimate of the epsilon-collapse measure", Command::CollapseScan},
      {"kernel-check", "Verify regularized kernels against the domination conditions", Command::KernelCheck},
      {"collapse-demo", "Search for a collapsing three-vortex configuration", Command::CollapseDemo},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("-c,--config", config_path, "JSON configuration file")->required();
    sub->add_option("-o,--out", output_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Seed, overriding the configuration and VORTEXLAB_SEED");
    sub->add_option("--threads", manifest.threads, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--emit-gnuplot", manifest.emit_gnuplot, "Also write two-column .dat files");
    subs.emplace_back(sub, e.command);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  for (const auto& [sub, command] : subs) {
    if (sub->parsed()) {
      manifest.command = command;
      if (sub->count("--seed") > 0) manifest.seed_override = seed;
    }
  }
  manifest.config_path = config_path;
  manifest.output_dir = output_dir;
  return run(manifest, out, err);
}

}  // namespace vortexlab
