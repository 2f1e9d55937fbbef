#include <vortexlab/config.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace vortexlab {

namespace {

/// Reads fields of one JSON object and rejects whatever was not consumed.
class Fields {
 public:
  Fields(const Json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) fail(path_.empty() ? "/" : path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& why) {
    throw ConfigError(path + ": " + why);
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }

  bool has(const std::string& key) const { return doc_.contains(key); }

  const Json& raw(const std::string& key) {
    if (!doc_.contains(key)) fail(at(key), "missing required field");
    seen_.insert(key);
    return doc_.at(key);
  }

  double number(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(at(key), "expected a finite number");
    return d;
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  double positive(const std::string& key) {
    const double d = number(key);
    if (!(d > 0.0)) fail(at(key), "must be positive");
    return d;
  }

  std::int64_t integer(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(at(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) fail(at(key) + "/" + std::to_string(k), "expected a number");
      out.push_back(v[k].get<double>());
      if (!std::isfinite(out.back())) fail(at(key) + "/" + std::to_string(k), "expected a finite number");
    }
    return out;
  }

  void schema_version() {
    if (path_.empty()) {
      const std::int64_t v = integer("schema_version");
      if (v != kSchemaVersion) fail(at("schema_version"), "unsupported version " + std::to_string(v));
    }
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown field");
    }
  }

 private:
  const Json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

IntegratorConfig parse_integrator(const Json& doc, const std::string& path, IntegratorConfig defaults = {}) {
  Fields f(doc, path);
  IntegratorConfig c = defaults;
  c.rel_tol = f.number_or("rel_tol", c.rel_tol);
  c.abs_tol = f.number_or("abs_tol", c.abs_tol);
  c.max_step = f.number_or("max_step", c.max_step);
  c.min_step = f.number_or("min_step", c.min_step);
  c.collapse_threshold = f.number_or("collapse_threshold", c.collapse_threshold);
  c.compensated_summation = f.boolean_or("compensated_summation", c.compensated_summation);
  f.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    // "integrator.rel_tol: ..." -> "<path>/rel_tol: ..."
    std::string what = e.what();
    const auto dot = what.find('.');
    throw ConfigError(path + "/" + (dot == std::string::npos ? what : what.substr(dot + 1)));
  }
  return c;
}

SystemSpec parse_system(Fields& f) {
  SystemSpec spec;
  spec.intensities = f.numbers("intensities");
  if (spec.intensities.empty()) Fields::fail(f.at("intensities"), "need at least one vortex");
  for (std::size_t i = 0; i < spec.intensities.size(); ++i) {
    if (spec.intensities[i] == 0.0) Fields::fail(f.at("intensities") + "/" + std::to_string(i), "must be nonzero");
  }
  const Json& pos = f.raw("positions");
  if (!pos.is_array()) Fields::fail(f.at("positions"), "expected an array of [x, y] pairs");
  if (pos.size() != spec.intensities.size()) {
    Fields::fail(f.at("positions"), "expected " + std::to_string(spec.intensities.size()) + " positions, got " +
                                        std::to_string(pos.size()));
  }
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const Json& p = pos[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      Fields::fail(f.at("positions") + "/" + std::to_string(i), "expected [x, y]");
    }
    spec.positions.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return spec;
}

void require_separated(const SystemSpec& system, const KernelSpec& kernel, const std::string& path) {
  if (kernel.epsilon) return;
  for (std::size_t i = 0; i < system.positions.size(); ++i) {
    for (std::size_t j = i + 1; j < system.positions.size(); ++j) {
      if (system.positions[i] == system.positions[j]) {
        Fields::fail(path, "vortices " + std::to_string(i) + " and " + std::to_string(j) +
                               " coincide under the singular " + kernel.describe() + " kernel");
      }
    }
  }
}

}  // namespace

KernelProfile<double> KernelSpec::profile() const {
  return kind == KernelKind::Euler ? KernelProfile<double>::euler() : KernelProfile<double>::sqg(s);
}

std::string KernelSpec::describe() const {
  std::ostringstream out;
  if (kind == KernelKind::Euler) {
    out << "euler";
  } else {
    out << "sqg(s=" << s << ")";
  }
  if (epsilon) out << " eps=" << *epsilon;
  return out.str();
}

AnyKernel make_kernel(const KernelSpec& spec) {
  if (spec.epsilon) return regularize(spec.profile(), *spec.epsilon);
  return spec.profile();
}

VortexSystem<double> SystemSpec::build() const {
  const int n = static_cast<int>(intensities.size());
  Vector<double> a = Eigen::Map<const Vector<double>>(intensities.data(), n);
  Pointsd x(2, n);
  for (int i = 0; i < n; ++i) x.col(i) = Vec2d(positions[i][0], positions[i][1]);
  return VortexSystem<double>(std::move(a), std::move(x));
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Translate the byte offset into line:column.
    std::size_t line = 1, column = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": JSON syntax error");
  }
}

KernelSpec parse_kernel(const Json& doc, const std::string& path) {
  Fields f(doc, path);
  KernelSpec spec;
  const std::string kind = f.string("kind");
  if (kind == "euler") {
    spec.kind = KernelKind::Euler;
    spec.s = 1.0;
  } else if (kind == "sqg") {
    spec.s = f.number("s");
    if (!(spec.s > 0.0 && spec.s <= 1.0)) Fields::fail(f.at("s"), "must lie in (0, 1]");
    spec.kind = spec.s == 1.0 ? KernelKind::Euler : KernelKind::Sqg;
  } else {
    Fields::fail(f.at("kind"), "unknown kernel kind '" + kind + "' (expected euler or sqg)");
  }
  if (f.has("epsilon")) {
    spec.epsilon = f.number("epsilon");
    if (!(*spec.epsilon > 0.0 && *spec.epsilon <= 0.5)) Fields::fail(f.at("epsilon"), "must lie in (0, 1/2]");
  }
  f.finish();
  return spec;
}

SimulateConfig parse_simulate(const Json& doc) {
  Fields f(doc, "");
  f.schema_version();
  SimulateConfig c;
  c.system = parse_system(f);
  c.kernel = parse_kernel(f.raw("kernel"), "/kernel");
  c.final_time = f.positive("final_time");
  if (f.has("integrator")) c.integrator = parse_integrator(f.raw("integrator"), "/integrator");
  if (f.has("output_interval")) c.output_interval = f.positive("output_interval");
  f.finish();
  require_separated(c.system, c.kernel, "/positions");
  return c;
}

InvariantsConfig parse_invariants(const Json& doc) {
  Fields f(doc, "");
  f.schema_version();
  InvariantsConfig c;
  c.system = parse_system(f);
  c.kernel = parse_kernel(f.raw("kernel"), "/kernel");
  // Simulation configs are accepted as-is; their dynamics fields are checked but unused.
  if (f.has("final_time")) f.positive("final_time");
  if (f.has("integrator")) parse_integrator(f.raw("integrator"), "/integrator");
  if (f.has("output_interval")) f.positive("output_interval");
  f.finish();
  require_separated(c.system, c.kernel, "/positions");
  return c;
}

KernelCheckConfig parse_kernel_check(const Json& doc) {
  Fields f(doc, "");
  f.schema_version();
  KernelCheckConfig c;
  const Json& kernels = f.raw("kernels");
  if (!kernels.is_array() || kernels.empty()) Fields::fail("/kernels", "expected a non-empty array of kernels");
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    const std::string path = "/kernels/" + std::to_string(k);
    KernelSpec spec = parse_kernel(kernels[k], path);
    if (spec.epsilon) Fields::fail(path + "/epsilon", "list cutoffs under /epsilons instead");
    c.kernels.push_back(spec);
  }
  c.epsilons = f.numbers("epsilons");
  if (c.epsilons.empty()) Fields::fail("/epsilons", "must not be empty");
  for (std::size_t k = 0; k < c.epsilons.size(); ++k) {
    if (!(c.epsilons[k] > 0.0 && c.epsilons[k] <= 0.5)) {
      Fields::fail("/epsilons/" + std::to_string(k), "must lie in (0, 1/2]");
    }
  }
  if (f.has("grid_points")) {
    const auto n = f.integer("grid_points");
    if (n < 10 || n > 10'000'000) Fields::fail("/grid_points", "must lie in [10, 1e7]");
    c.grid_points = static_cast<int>(n);
  }
  if (f.has("grid_extent")) {
    c.grid_extent = f.positive("grid_extent");
    if (c.grid_extent < 1.0) Fields::fail("/grid_extent", "must be at least 1 (the grid has to reach epsilon)");
  }
  f.finish();
  return c;
}

CollapseDemoConfig parse_collapse_demo(const Json& doc) {
  Fields f(doc, "");
  f.schema_version();
  CollapseDemoConfig c;
  const std::vector<double> a = f.numbers("intensities");
  if (a.size() != 3) Fields::fail("/intensities", "exactly three intensities required");
  for (std::size_t i = 0; i < 3; ++i) {
    if (a[i] == 0.0) Fields::fail("/intensities/" + std::to_string(i), "must be nonzero");
    c.intensities[i] = a[i];
  }
  if (f.has("seed")) c.seed = f.unsigned_integer("seed");
  if (f.has("search_budget")) {
    const auto b = f.integer("search_budget");
    if (b < 1) Fields::fail("/search_budget", "must be positive");
    c.search_budget = static_cast<int>(b);
  }
  if (f.has("final_time")) c.final_time = f.positive("final_time");
  IntegratorConfig defaults;
  defaults.rel_tol = 1e-12;
  defaults.abs_tol = 1e-14;
  defaults.min_step = 1e-14;
  c.integrator = defaults;
  if (f.has("integrator")) c.integrator = parse_integrator(f.raw("integrator"), "/integrator", defaults);
  f.finish();
  return c;
}

ScanConfig parse_scan(const Json& doc) {
  Fields f(doc, "");
  f.schema_version();
  ScanConfig c;
  c.s = f.number("s");
  if (f.has("anchor")) c.anchor = static_cast<int>(f.integer("anchor"));
  c.intensities = f.numbers("intensities");
  c.rho = f.number_or("rho", c.rho);
  c.horizon = f.number_or("horizon", c.horizon);
  c.epsilons = f.numbers("epsilons");
  c.samples_per_epsilon = static_cast<int>(f.integer("samples_per_epsilon"));
  c.rng_seed = f.unsigned_integer("rng_seed");
  IntegratorConfig defaults;
  defaults.rel_tol = 1e-8;
  defaults.abs_tol = 1e-10;
  c.integrator = defaults;
  if (f.has("integrator")) c.integrator = parse_integrator(f.raw("integrator"), "/integrator", defaults);
  f.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("/") + e.what());
  }
  return c;
}

Json to_json(const KernelSpec& spec) {
  Json j;
  if (spec.kind == KernelKind::Euler) {
    j["kind"] = "euler";
  } else {
    j["kind"] = "sqg";
    j["s"] = spec.s;
  }
  if (spec.epsilon) j["epsilon"] = *spec.epsilon;
  return j;
}

Json to_json(const IntegratorConfig& c) {
  return Json{{"rel_tol", c.rel_tol},
              {"abs_tol", c.abs_tol},
              {"max_step", c.max_step},
              {"min_step", c.min_step},
              {"collapse_threshold", c.collapse_threshold},
              {"compensated_summation", c.compensated_summation}};
}

Json to_json(const ScanConfig& c) {
  return Json{{"schema_version", kSchemaVersion},
              {"s", c.s},
              {"anchor", c.anchor},
              {"intensities", c.intensities},
              {"rho", c.rho},
              {"horizon", c.horizon},
              {"epsilons", c.epsilons},
              {"samples_per_epsilon", c.samples_per_epsilon},
              {"rng_seed", c.rng_seed},
              {"integrator", to_json(c.integrator)}};
}

Json to_json(const SimulateConfig& c) {
  Json positions = Json::array();
  for (const auto& p : c.system.positions) positions.push_back({p[0], p[1]});
  Json j{{"schema_version", kSchemaVersion},
         {"intensities", c.system.intensities},
         {"positions", positions},
         {"kernel", to_json(c.kernel)},
         {"final_time", c.final_time},
         {"integrator", to_json(c.integrator)}};
  if (c.output_interval) j["output_interval"] = *c.output_interval;
  return j;
}

std::string config_hash(const Json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vortexlab
