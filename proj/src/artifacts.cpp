#include "nlwave/app/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nlwave::app {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void write_trace_csv(const fs::path& path, const std::vector<SampleSummary<double>>& samples) {
  std::ostringstream out;
  out << "t,E,m,xi,max_u,dt\n";
  for (const auto& s : samples)
    out << format_number(s.t) << ',' << format_number(s.energy) << ',' << format_number(s.m) << ','
        << format_number(s.xi) << ',' << format_number(s.max_u) << ',' << format_number(s.dt) << '\n';
  write_text(path, out.str());
}

void write_field_csv(const fs::path& path, const StateField<double>& f, const std::string& name) {
  std::ostringstream out;
  out << "x," << name << '\n';
  for (Eigen::Index i = 0; i < f.grid().size(); ++i)
    out << format_number(f.grid().x(i)) << ',' << format_number(f[i]) << '\n';
  write_text(path, out.str());
}

void write_profile_csv(const fs::path& path, const SolitonProfile<double>& prof) {
  const auto& sp = prof.params;
  std::ostringstream out;
  out << "# c=" << format_number(sp.c) << ",omega=" << format_number(sp.params.omega)
      << ",gamma=" << format_number(sp.params.gamma) << ",a=" << format_number(sp.amplitude())
      << ",kappa=" << format_number(prof.kappa) << '\n';
  out << "x,phi,phi_x\n";
  const auto& grid = prof.phi.grid();
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    out << format_number(grid.x(i)) << ',' << format_number(prof.phi[i]) << ',' << format_number(prof.phi_x[i])
        << '\n';
  write_text(path, out.str());
}

namespace {

// Commas and newlines would break the row; error messages are free text.
std::string csv_cell(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

}  // namespace

void write_sweep_csv(const fs::path& path, const std::string& family_id, const SharpnessTable<double>& table) {
  std::ostringstream out;
  out << "family_id,alpha,E0,m0,gamma_case,K,T_lower,t_star,ratio,censored,t_stop,stop_reason,error\n";
  for (const auto& r : table.rows) {
    out << csv_cell(family_id) << ',' << format_number(r.alpha) << ',';
    if (r.error) {
      out << ",,,,,,,,,," << csv_cell(*r.error) << '\n';
      continue;
    }
    const auto ratio = r.ratio();
    out << format_number(r.bound.E0) << ',' << format_number(r.bound.m0) << ',' << to_string(r.bound.gamma_case)
        << ',' << format_number(r.bound.K) << ',' << format_number(r.bound.T_lower) << ','
        << (r.t_star ? format_number(*r.t_star) : "") << ',' << (ratio ? format_number(*ratio) : "") << ','
        << (r.censored ? "true" : "false") << ',' << format_number(r.t_stop) << ',' << to_string(r.stop_reason)
        << ",\n";
  }
  write_text(path, out.str());
}

nlohmann::json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "infinite" : "-infinite";
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace nlwave::app
