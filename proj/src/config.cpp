#include "nlwave/app/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "nlwave/solitary.hpp"

namespace nlwave::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads one JSON object, tracking which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(field(key) + ": " + what);
  }
  std::string field(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    if (!j_.contains(key)) fail(key, "missing required field");
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "must be finite");
    return d;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  double positive(const std::string& key) {
    const double d = number(key);
    if (!(d > 0)) fail(key, "must be positive");
    return d;
  }
  double positive(const std::string& key, double fallback) { return has(key) ? positive(key) : fallback; }

  std::int64_t integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<std::int64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
        fail(key + "[" + std::to_string(i) + "]", "expected a finite number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  ObjectReader object(const std::string& key) { return ObjectReader(at(key), field(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(it.key(), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

PdeParams<double> read_params(ObjectReader r) {
  const double gamma = r.number("gamma");
  const double omega = r.number("omega");
  r.finish();
  if (omega < 0) r.fail("omega", "must be nonnegative");
  return PdeParams<double>(gamma, omega);
}

GridSpec read_grid(ObjectReader r) {
  GridSpec g;
  g.L = r.positive("L");
  const auto n = r.integer("N");
  if (n < 16 || (n & (n - 1)) != 0) r.fail("N", "must be a power of two, at least 16");
  g.N = static_cast<Eigen::Index>(n);
  r.finish();
  return g;
}

SolverConfig read_solver(ObjectReader r) {
  SolverConfig s;
  s.dt_init = r.positive("dt_init", s.dt_init);
  s.dt_min = r.positive("dt_min", s.dt_min);
  s.t_end = r.positive("t_end", s.t_end);
  s.cfl_fraction = r.positive("cfl_fraction", s.cfl_fraction);
  s.blowup_m_threshold = r.positive("blowup_m_threshold", s.blowup_m_threshold);
  s.energy_drift_tol = r.positive("energy_drift_tol", s.energy_drift_tol);
  s.sample_interval = r.positive("sample_interval", s.sample_interval);
  s.decay_tolerance = r.positive("decay_tolerance", s.decay_tolerance);
  s.contamination_tolerance = r.positive("contamination_tolerance", s.contamination_tolerance);
  if (r.has("checkpoint_times")) s.checkpoint_times = r.numbers("checkpoint_times");
  if (r.has("tail_capacity")) {
    const auto cap = r.integer("tail_capacity");
    if (cap < 3) r.fail("tail_capacity", "must be at least 3");
    s.tail_capacity = static_cast<std::size_t>(cap);
  }
  r.finish();
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    r.fail("", e.what());
  }
  return s;
}

InitialSpec read_initial(ObjectReader r, const fs::path& base_dir) {
  const std::string kind = r.string("kind");
  InitialSpec spec;
  if (kind == "gaussian") {
    GaussianData d;
    d.amplitude = r.number("amplitude");
    d.width = r.positive("width");
    d.center = r.number("center", 0.0);
    spec = d;
  } else if (kind == "steep") {
    SteepData d;
    d.amplitude = r.number("amplitude");
    d.steepness = r.positive("steepness");
    spec = d;
  } else if (kind == "soliton") {
    spec = SolitonData{r.positive("c")};
  } else if (kind == "scaled_soliton") {
    ScaledSolitonData d;
    d.c = r.positive("c");
    d.alpha = r.number("alpha");
    spec = d;
  } else if (kind == "bumps") {
    BumpsData d;
    d.amplitude = r.number("amplitude");
    const auto count = r.integer("count");
    if (count < 1 || count > 64) r.fail("count", "must lie in [1, 64]");
    d.count = static_cast<int>(count);
    spec = d;
  } else if (kind == "file") {
    fs::path p = r.string("path");
    if (p.is_relative()) p = base_dir / p;
    if (!fs::is_regular_file(p)) r.fail("path", "file not found: " + p.string());
    spec = FileData{fs::weakly_canonical(p)};
  } else {
    r.fail("kind", "unknown initial data kind '" + kind +
                       "' (expected gaussian, steep, soliton, scaled_soliton, bumps or file)");
  }
  r.finish();
  return spec;
}

OutputSpec read_output(ObjectReader r, const fs::path& base_dir) {
  OutputSpec o;
  if (r.has("directory")) {
    fs::path p = r.string("directory");
    o.directory = p.is_relative() ? base_dir / p : p;
  }
  o.trace = r.boolean("trace", o.trace);
  o.checkpoints = r.boolean("checkpoints", o.checkpoints);
  r.finish();
  return o;
}

FamilySpec read_family(ObjectReader r) {
  FamilySpec f;
  f.id = r.string("id");
  f.vary = r.string("vary");
  f.values = r.numbers("values");
  if (f.values.empty()) r.fail("values", "family must have at least one member");
  if (r.has("threshold_factor")) f.threshold_factor = r.positive("threshold_factor");
  f.tolerance = r.positive("tolerance", f.tolerance);
  if (f.tolerance >= 1) r.fail("tolerance", "must be below 1");
  r.finish();
  return f;
}

[[noreturn]] void rethrow_with(const std::string& field, const std::exception& e) {
  throw ConfigError(field + ": " + e.what());
}

}  // namespace

const char* kind_name(const InitialSpec& spec) {
  struct {
    const char* operator()(const GaussianData&) const { return "gaussian"; }
    const char* operator()(const SteepData&) const { return "steep"; }
    const char* operator()(const SolitonData&) const { return "soliton"; }
    const char* operator()(const ScaledSolitonData&) const { return "scaled_soliton"; }
    const char* operator()(const BumpsData&) const { return "bumps"; }
    const char* operator()(const FileData&) const { return "file"; }
  } visitor;
  return std::visit(visitor, spec);
}

RunConfig parse_config(const json& j, const fs::path& base_dir) {
  ObjectReader root(j, "");
  RunConfig c;
  c.params = read_params(root.object("params"));
  c.grid = read_grid(root.object("grid"));
  if (root.has("solver")) c.solver = read_solver(root.object("solver"));
  c.solver.validate();
  c.initial = read_initial(root.object("initial"), base_dir);
  if (root.has("output")) c.output = read_output(root.object("output"), base_dir);
  if (root.has("seed")) {
    const auto s = root.integer("seed");
    if (s < 0) root.fail("seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (root.has("family")) {
    c.family = read_family(root.object("family"));
    try {
      with_parameter(c.initial, c.family->vary, c.family->values.front());
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("family.vary: ") + e.what());
    }
  }
  root.finish();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (const auto pos = msg.find("parse error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError(path.string() + ": " + msg);
  }
  return parse_config(j, fs::absolute(path).parent_path());
}

json to_json(const RunConfig& c) {
  json j;
  j["params"] = {{"gamma", c.params.gamma}, {"omega", c.params.omega}};
  j["grid"] = {{"L", c.grid.L}, {"N", c.grid.N}};
  const SolverConfig& s = c.solver;
  j["solver"] = {{"dt_init", s.dt_init},
                 {"dt_min", s.dt_min},
                 {"t_end", s.t_end},
                 {"cfl_fraction", s.cfl_fraction},
                 {"blowup_m_threshold", s.blowup_m_threshold},
                 {"energy_drift_tol", s.energy_drift_tol},
                 {"sample_interval", s.sample_interval},
                 {"decay_tolerance", s.decay_tolerance},
                 {"contamination_tolerance", s.contamination_tolerance},
                 {"checkpoint_times", s.checkpoint_times},
                 {"tail_capacity", s.tail_capacity}};
  json init = {{"kind", kind_name(c.initial)}};
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianData>) {
          init["amplitude"] = d.amplitude;
          init["width"] = d.width;
          init["center"] = d.center;
        } else if constexpr (std::is_same_v<T, SteepData>) {
          init["amplitude"] = d.amplitude;
          init["steepness"] = d.steepness;
        } else if constexpr (std::is_same_v<T, SolitonData>) {
          init["c"] = d.c;
        } else if constexpr (std::is_same_v<T, ScaledSolitonData>) {
          init["c"] = d.c;
          init["alpha"] = d.alpha;
        } else if constexpr (std::is_same_v<T, BumpsData>) {
          init["amplitude"] = d.amplitude;
          init["count"] = d.count;
        } else {
          init["path"] = d.path.string();
        }
      },
      c.initial);
  j["initial"] = init;
  json out = {{"trace", c.output.trace}, {"checkpoints", c.output.checkpoints}};
  if (!c.output.directory.empty()) out["directory"] = c.output.directory.string();
  j["output"] = out;
  j["seed"] = c.seed;
  if (c.family) {
    json f = {{"id", c.family->id}, {"vary", c.family->vary}, {"values", c.family->values},
              {"tolerance", c.family->tolerance}};
    if (c.family->threshold_factor) f["threshold_factor"] = *c.family->threshold_factor;
    j["family"] = f;
  }
  return j;
}

Grid<double> make_grid(const GridSpec& g) { return Grid<double>(g.L, g.N); }

InitialSpec with_parameter(InitialSpec spec, const std::string& name, double value) {
  bool found = false;
  auto set = [&](double& field) {
    field = value;
    found = true;
  };
  std::visit(
      [&](auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianData>) {
          if (name == "amplitude") set(d.amplitude);
          if (name == "width") set(d.width);
          if (name == "center") set(d.center);
        } else if constexpr (std::is_same_v<T, SteepData>) {
          if (name == "amplitude") set(d.amplitude);
          if (name == "steepness") set(d.steepness);
        } else if constexpr (std::is_same_v<T, SolitonData>) {
          if (name == "c") set(d.c);
        } else if constexpr (std::is_same_v<T, ScaledSolitonData>) {
          if (name == "c") set(d.c);
          if (name == "alpha") set(d.alpha);
        } else if constexpr (std::is_same_v<T, BumpsData>) {
          if (name == "amplitude") set(d.amplitude);
        }
      },
      spec);
  if (!found)
    throw ConfigError("initial data kind '" + std::string(kind_name(spec)) + "' has no numeric field '" + name + "'");
  return spec;
}

StateField<double> make_initial(const InitialSpec& spec, const Grid<double>& grid, const PdeParams<double>& p,
                                std::uint64_t seed) {
  return std::visit(
      [&](const auto& d) -> StateField<double> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianData>) {
          if (!(d.width > 0)) throw ConfigError("initial.width: must be positive");
          return StateField<double>::sample(grid, [&](double x) {
            const double z = (x - d.center) / d.width;
            return d.amplitude * std::exp(-z * z);
          });
        } else if constexpr (std::is_same_v<T, SteepData>) {
          if (!(d.steepness > 0)) throw ConfigError("initial.steepness: must be positive");
          return StateField<double>::sample(grid, [&](double x) {
            const double s = 1.0 / std::cosh(d.steepness * x);
            return d.amplitude * s * s;
          });
        } else if constexpr (std::is_same_v<T, SolitonData> || std::is_same_v<T, ScaledSolitonData>) {
          double alpha = 1.0;
          if constexpr (std::is_same_v<T, ScaledSolitonData>) alpha = d.alpha;
          try {
            const auto prof = build_profile(SolitonParams<double>(d.c, p), grid);
            return alpha * prof.phi;
          } catch (const std::invalid_argument& e) {
            rethrow_with("initial", e);
          }
        } else if constexpr (std::is_same_v<T, BumpsData>) {
          std::mt19937_64 rng(seed);
          auto uniform = [&](double lo, double hi) {
            return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
          };
          const double span = 0.3 * grid.half_width();
          Vector<double> v = Vector<double>::Zero(grid.size());
          for (int b = 0; b < d.count; ++b) {
            const double a = uniform(-d.amplitude, d.amplitude);
            const double c = uniform(-span, span);
            const double w = uniform(1.0, 2.5);
            for (Eigen::Index i = 0; i < grid.size(); ++i) {
              const double z = (grid.x(i) - c) / w;
              v[i] += a * std::exp(-z * z);
            }
          }
          return StateField<double>(grid, std::move(v));
        } else {
          return read_field_csv(d.path, grid);
        }
      },
      spec);
}

StateField<double> make_initial(const RunConfig& c) {
  const auto u0 = make_initial(c.initial, make_grid(c.grid), c.params, c.seed);
  const double peak = max_abs(u0);
  if (peak > 0 && boundary_magnitude(u0) > c.solver.decay_tolerance * peak) {
    std::ostringstream msg;
    msg << "initial: data does not decay at the box boundary (|u0(+-L)|/max|u0| = "
        << boundary_magnitude(u0) / peak << " exceeds solver.decay_tolerance = " << c.solver.decay_tolerance
        << "); widen grid.L";
    throw ConfigError(msg.str());
  }
  return u0;
}

namespace {

struct CsvColumns {
  std::vector<double> x, u;
  bool has_x = false;
};

CsvColumns read_columns(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open data file");
  std::string line;
  // Skip comment lines (the soliton export writes its parameters there).
  do {
    if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty data file");
  } while (!line.empty() && line[0] == '#');
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) header.push_back(name);
  }
  int ix = -1, iu = -1;
  for (int k = 0; k < static_cast<int>(header.size()); ++k) {
    if (header[k] == "x") ix = k;
    if (header[k] == "u" || (header[k] == "phi" && iu < 0)) iu = k;
  }
  if (iu < 0) throw ConfigError(path.string() + ":1: header needs a 'u' or 'phi' column");
  CsvColumns out;
  out.has_x = ix >= 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size())
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns");
    auto parse = [&](const std::string& s) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size() || !std::isfinite(v))
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
      return v;
    };
    out.u.push_back(parse(cells[iu]));
    if (ix >= 0) out.x.push_back(parse(cells[ix]));
  }
  return out;
}

}  // namespace

StateField<double> read_field_csv(const fs::path& path, const Grid<double>& grid) {
  const auto cols = read_columns(path);
  if (static_cast<Eigen::Index>(cols.u.size()) != grid.size())
    throw ConfigError(path.string() + ": has " + std::to_string(cols.u.size()) + " rows, grid has " +
                      std::to_string(grid.size()) + " points");
  if (cols.has_x)
    for (Eigen::Index i = 0; i < grid.size(); ++i)
      if (std::abs(cols.x[i] - grid.x(i)) > 1e-9 * grid.half_width())
        throw ConfigError(path.string() + ":" + std::to_string(i + 2) + ": x does not match the grid point " +
                          std::to_string(grid.x(i)));
  return StateField<double>(grid, Eigen::Map<const Vector<double>>(cols.u.data(), grid.size()));
}

StateField<double> read_field_csv(const fs::path& path) {
  const auto cols = read_columns(path);
  if (!cols.has_x) throw ConfigError(path.string() + ":1: header needs an 'x' column to infer the grid");
  const auto n = static_cast<Eigen::Index>(cols.u.size());
  if (n < 16 || (n & (n - 1)) != 0) throw ConfigError(path.string() + ": row count must be a power of two");
  const double L = -cols.x.front();
  try {
    return read_field_csv(path, Grid<double>(L, n));
  } catch (const std::invalid_argument& e) {
    rethrow_with(path.string(), e);
  }
}

}  // namespace nlwave::app
