#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nlwave/model.hpp"
#include "nlwave/timestepper.hpp"

namespace nlwave::app {

/// Invalid configuration; the message starts with the offending field path
/// (or file:line:column for syntax errors).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  double L = 0;
  Eigen::Index N = 0;
};

struct GaussianData {
  double amplitude = 1;
  double width = 1;
  double center = 0;
};
/// amplitude sech^2(steepness x)
struct SteepData {
  double amplitude = 1;
  double steepness = 1;
};
struct SolitonData {
  double c = 0;
};
struct ScaledSolitonData {
  double c = 0;
  double alpha = 1;
};
/// Sum of `count` Gaussian bumps drawn from the run seed.
struct BumpsData {
  double amplitude = 1;
  int count = 3;
};
struct FileData {
  std::filesystem::path path;
};

using InitialSpec = std::variant<GaussianData, SteepData, SolitonData, ScaledSolitonData, BumpsData, FileData>;

const char* kind_name(const InitialSpec& spec);

struct OutputSpec {
  std::filesystem::path directory;
  bool trace = true;
  bool checkpoints = false;
};

struct FamilySpec {
  std::string id;
  /// Numeric field of the initial preset that is varied.
  std::string vary;
  std::vector<double> values;
  std::optional<double> threshold_factor;
  double tolerance = 0.02;
};

struct RunConfig {
  PdeParams<double> params{0.0, 0.0};
  GridSpec grid;
  SolverConfig solver;
  InitialSpec initial;
  OutputSpec output;
  std::uint64_t seed = 0;
  std::optional<FamilySpec> family;
};

/// Strict schema: unknown keys, wrong types and out-of-range values are rejected.
/// Relative file paths are resolved against base_dir.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved config; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& c);

Grid<double> make_grid(const GridSpec& g);

/// Samples the initial data on the run grid and applies the boundary-decay gate.
StateField<double> make_initial(const RunConfig& c);
StateField<double> make_initial(const InitialSpec& spec, const Grid<double>& grid, const PdeParams<double>& p,
                                std::uint64_t seed);

/// Sets the named numeric field of a preset; throws ConfigError if it has none.
InitialSpec with_parameter(InitialSpec spec, const std::string& name, double value);

/// Field read from a CSV file with a header row: column u (or phi) holds the
/// values and an optional x column must match the grid.
StateField<double> read_field_csv(const std::filesystem::path& path, const Grid<double>& grid);
/// Grid and values from a CSV with x and u (or phi) columns.
StateField<double> read_field_csv(const std::filesystem::path& path);

}  // namespace nlwave::app
