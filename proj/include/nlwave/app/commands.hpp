#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

namespace nlwave::app {

/// Exit codes. Blow-up is a result and exits with ok.
enum ExitCode : int { ok = 0, failed = 1, bad_config = 2, io_error = 3 };

/// Writes trace.csv, optional checkpoint_NNN.csv files and summary.json.
int cmd_simulate(const std::filesystem::path& config, const std::optional<std::filesystem::path>& out_dir,
                 std::ostream& out, std::ostream& err);

struct SolitonArgs {
  double c = 0;
  double omega = 0;
  double gamma = 0;
  double L = 30;
  long N = 1024;
  std::optional<std::filesystem::path> out_dir;
};

/// Writes profile.csv and prints a, kappa and the first-integral residual.
int cmd_soliton(const SolitonArgs& args, std::ostream& out, std::ostream& err);

struct BoundArgs {
  std::optional<std::filesystem::path> config;
  /// CSV with x and u (or phi) columns.
  std::optional<std::filesystem::path> data;
  std::optional<double> gamma;
  std::optional<double> omega;
  /// Direct evaluation from E0 and m0 without data.
  std::optional<double> e0;
  std::optional<double> m0;
};

/// Prints {E0, m0, gamma_case, K, threshold_4i, triggered, T_lower} as JSON.
int cmd_bound(const BoundArgs& args, std::ostream& out, std::ostream& err);

/// Runs the family of the config and writes sweep.csv and sweep.json.
int cmd_sweep(const std::filesystem::path& config, const std::optional<std::filesystem::path>& out_dir,
              unsigned workers, std::ostream& out, std::ostream& err);

}  // namespace nlwave::app
