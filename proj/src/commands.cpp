#include "nlwave/app/commands.hpp"

#include <cstdio>
#include <sstream>

#include "nlwave/app/artifacts.hpp"
#include "nlwave/app/config.hpp"

namespace nlwave::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* global_note = "gamma = 0: all solutions are global, no blow-up criterion applies";

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return bad_config;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return bad_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return io_error;
  }
}

fs::path output_dir(const RunConfig& c, const std::optional<fs::path>& override_dir) {
  if (override_dir) return *override_dir;
  if (!c.output.directory.empty()) return c.output.directory;
  throw ConfigError("output.directory: missing (set it in the config or pass --out)");
}

json bound_json(const BoundResult<double>& b, const PdeParams<double>& p) {
  json j;
  j["E0"] = b.E0;
  j["m0"] = b.m0;
  j["gamma_case"] = to_string(b.gamma_case);
  j["K"] = b.K;
  j["T_lower"] = json_number(b.T_lower);
  if (p.global_regime()) {
    j["note"] = global_note;
  } else {
    const double threshold = blowup_threshold(p.gamma, p.omega, b.E0);
    j["threshold_4i"] = threshold;
    j["triggered"] = b.m0 < threshold;
  }
  return j;
}

std::string checkpoint_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "checkpoint_%03zu.csv", k);
  return buf;
}

}  // namespace

int cmd_simulate(const fs::path& config, const std::optional<fs::path>& out_dir, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_config(config);
    const fs::path dir = output_dir(cfg, out_dir);
    const auto u0 = make_initial(cfg);
    const auto& p = cfg.params;

    // Traveling-wave oracle for soliton data: u(t) = u0(x - c t).
    std::optional<double> speed;
    if (const auto* s = std::get_if<SolitonData>(&cfg.initial)) speed = s->c;
    double shape_l2 = 0, shape_max = 0;
    const double ref = l2_norm(u0);
    SampleObserver<double> observer;
    if (speed && ref > 0)
      observer = [&](double t, const StateField<double>& u) {
        const auto diff = u - spectral_shift(u0, *speed * t);
        shape_l2 = std::max(shape_l2, l2_norm(diff) / ref);
        shape_max = std::max(shape_max, max_abs(diff));
      };

    const auto res = simulate(u0, p, cfg.solver, observer);
    const auto bound = existence_bound(u0, p);

    ensure_directory(dir);
    if (cfg.output.trace) write_trace_csv(dir / "trace.csv", res.samples);
    json checkpoints = json::array();
    if (cfg.output.checkpoints)
      for (std::size_t k = 0; k < res.checkpoints.size(); ++k) {
        const auto name = checkpoint_name(k);
        write_field_csv(dir / name, res.checkpoints[k].field);
        checkpoints.push_back({{"t", res.checkpoints[k].t}, {"file", name}});
      }

    json summary;
    summary["stop_reason"] = to_string(res.stop_reason);
    summary["t_stop"] = res.t_stop;
    summary["steps"] = res.steps;
    summary["energy_drift"] = res.max_energy_drift;
    summary["E0"] = bound.E0;
    summary["m0"] = bound.m0;
    summary["gamma_case"] = to_string(bound.gamma_case);
    summary["K"] = bound.K;
    summary["T_lower"] = json_number(bound.T_lower);
    const auto t_star = res.stop_reason == StopReason::blowup_slope ? extrapolate_blowup_time(res.slope_trace)
                                                                    : std::optional<double>{};
    summary["t_star"] = t_star ? json(*t_star) : json(nullptr);
    if (p.global_regime()) {
      summary["blowup_condition"] = {{"note", global_note}};
    } else {
      const auto v = blowup_condition(u0, p);
      json bc = {{"threshold", v.threshold}, {"triggered", v.triggered}};
      bc["witness_x0"] = v.witness_x0 ? json(*v.witness_x0) : json(nullptr);
      summary["blowup_condition"] = bc;
    }
    if (speed) summary["shape_error"] = {{"max_rel_l2", shape_l2}, {"max_abs", shape_max}};
    if (cfg.output.checkpoints) summary["checkpoints"] = checkpoints;
    summary["warnings"] = res.warnings;
    summary["config"] = to_json(cfg);
    write_json(dir / "summary.json", summary);

    out << "stop_reason " << to_string(res.stop_reason) << " at t = " << format_number(res.t_stop) << '\n';
    for (const auto& w : res.warnings) err << "warning: " << w << '\n';
    return static_cast<int>(ok);
  });
}

int cmd_soliton(const SolitonArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (a.N < 16 || (a.N & (a.N - 1)) != 0) throw ConfigError("N: must be a power of two, at least 16");
    const SolitonParams<double> sp(a.c, PdeParams<double>(a.gamma, a.omega));
    if (const auto adm = check_admissible(sp); !adm) {
      err << "inadmissible: " << adm.diagnostic << '\n';
      return failed;
    }
    const auto prof = build_profile(sp, Grid<double>(a.L, a.N));
    if (a.out_dir) {
      ensure_directory(*a.out_dir);
      write_profile_csv(*a.out_dir / "profile.csv", prof);
    }
    out << "a = " << format_number(sp.amplitude()) << '\n';
    out << "kappa = " << format_number(prof.kappa) << '\n';
    out << "first_integral_residual = " << format_number(first_integral_residual(prof)) << '\n';
    return ok;
  });
}

int cmd_bound(const BoundArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const int sources = int(a.config.has_value()) + int(a.data.has_value()) + int(a.e0.has_value() || a.m0.has_value());
    if (sources != 1) throw ConfigError("bound: give exactly one of --config, --data, or --e0 with --m0");
    json j;
    if (a.config) {
      if (a.gamma || a.omega) throw ConfigError("bound: --gamma/--omega come from the config when --config is used");
      const RunConfig cfg = load_config(*a.config);
      const auto u0 = make_initial(cfg);
      j = bound_json(existence_bound(u0, cfg.params), cfg.params);
      if (!cfg.params.global_regime()) {
        const auto v = blowup_condition(u0, cfg.params);
        j["witness_x0"] = v.witness_x0 ? json(*v.witness_x0) : json(nullptr);
      }
    } else {
      if (!a.gamma || !a.omega) throw ConfigError("bound: --gamma and --omega are required");
      const PdeParams<double> p(*a.gamma, *a.omega);
      if (a.data) {
        const auto u0 = read_field_csv(*a.data);
        j = bound_json(existence_bound(u0, p), p);
      } else {
        if (!a.e0 || !a.m0) throw ConfigError("bound: --e0 and --m0 go together");
        j = bound_json(existence_bound(*a.e0, *a.m0, p), p);
      }
    }
    out << j.dump(2) << '\n';
    return ok;
  });
}

int cmd_sweep(const fs::path& config, const std::optional<fs::path>& out_dir, unsigned workers, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&]() -> int {
    const RunConfig cfg = load_config(config);
    if (!cfg.family) throw ConfigError("family: missing (sweep needs a family spec)");
    if (cfg.params.global_regime()) throw ConfigError("params.gamma: the sweep compares blow-up times and needs gamma != 0");
    const FamilySpec& fam = *cfg.family;
    const fs::path dir = output_dir(cfg, out_dir);
    const Grid<double> grid = make_grid(cfg.grid);

    // Members whose data cannot be built become error rows; the rest run.
    std::vector<FamilyMember<double>> members;
    std::vector<std::size_t> index_of;
    std::vector<std::optional<std::string>> build_error(fam.values.size());
    for (std::size_t i = 0; i < fam.values.size(); ++i) {
      try {
        RunConfig member = cfg;
        member.initial = with_parameter(cfg.initial, fam.vary, fam.values[i]);
        members.push_back({fam.values[i], make_initial(member)});
        index_of.push_back(i);
      } catch (const std::exception& e) {
        build_error[i] = e.what();
      }
    }

    SharpnessOptions opt;
    opt.tolerance = fam.tolerance;
    opt.workers = workers;
    opt.threshold_factor = fam.threshold_factor;
    const auto ran = members.empty() ? SharpnessTable<double>{} : sharpness_experiment(members, cfg.params, cfg.solver, opt);

    SharpnessTable<double> table;
    table.tolerance = fam.tolerance;
    table.rows.resize(fam.values.size());
    for (std::size_t k = 0; k < ran.rows.size(); ++k) {
      table.rows[index_of[k]] = ran.rows[k];
      table.rows[index_of[k]].member = index_of[k];
    }
    std::size_t failures = 0;
    for (std::size_t i = 0; i < fam.values.size(); ++i) {
      if (build_error[i]) {
        table.rows[i].member = i;
        table.rows[i].alpha = fam.values[i];
        table.rows[i].error = build_error[i];
      }
      if (table.rows[i].error) ++failures;
    }

    ensure_directory(dir);
    write_sweep_csv(dir / "sweep.csv", fam.id, table);
    json rows = json::array();
    for (const auto& r : table.rows) {
      json row = {{"member", r.member}, {"alpha", r.alpha}};
      if (r.error) {
        row["error"] = *r.error;
      } else {
        row["T_lower"] = json_number(r.bound.T_lower);
        row["t_star"] = r.t_star ? json(*r.t_star) : json(nullptr);
        const auto q = r.ratio();
        row["ratio"] = q ? json(*q) : json(nullptr);
        row["censored"] = r.censored;
        row["stop_reason"] = to_string(r.stop_reason);
        row["energy_drift"] = r.max_energy_drift;
      }
      rows.push_back(row);
    }
    write_json(dir / "sweep.json",
               {{"family_id", fam.id}, {"bound_respected", table.bound_respected()}, {"rows", rows},
                {"config", to_json(cfg)}});

    for (const auto& r : table.rows) {
      out << fam.id << " alpha = " << format_number(r.alpha);
      if (r.error) {
        out << " failed: " << *r.error << '\n';
        continue;
      }
      const auto q = r.ratio();
      out << " T_lower = " << format_number(r.bound.T_lower)
          << (q ? " t* = " + format_number(*r.t_star) + " ratio = " + format_number(*q) : std::string(" censored"))
          << '\n';
    }
    if (!table.bound_respected()) err << "warning: some member blew up earlier than the lower bound allows\n";
    if (failures == table.rows.size()) {
      err << "every family member failed\n";
      return failed;
    }
    return ok;
  });
}

}  // namespace nlwave::app
