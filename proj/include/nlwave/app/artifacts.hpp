#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlwave/analysis.hpp"
#include "nlwave/solitary.hpp"

namespace nlwave::app {

/// Round-trip decimal form (%.17g); "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

/// Creates the directory (and parents) or throws std::runtime_error.
void ensure_directory(const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Columns t, E, m, xi, max_u, dt.
void write_trace_csv(const std::filesystem::path& path, const std::vector<SampleSummary<double>>& samples);
/// Columns x, <name>.
void write_field_csv(const std::filesystem::path& path, const StateField<double>& f, const std::string& name = "u");
/// A "# c=..,omega=..,gamma=..,a=..,kappa=.." line, then columns x, phi, phi_x.
void write_profile_csv(const std::filesystem::path& path, const SolitonProfile<double>& prof);
/// Columns family_id, alpha, E0, m0, gamma_case, K, T_lower, t_star, ratio,
/// censored, then t_stop, stop_reason, error.
void write_sweep_csv(const std::filesystem::path& path, const std::string& family_id,
                     const SharpnessTable<double>& table);

/// JSON number, or the string "infinite" / null for non-finite values.
nlohmann::json json_number(double v);

}  // namespace nlwave::app
