#pragma once

// Command-line front end. Every subcommand writes its tables to the output
// directory, a <command>_manifest.json next to them, and a JSON summary to
// the output stream. Failures exit with the code of their error category.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "pretherm/coupling.hpp"
#include "pretherm/dynamics.hpp"
#include "pretherm/ensembles.hpp"
#include "pretherm/errors.hpp"
#include "pretherm/experiments.hpp"
#include "pretherm/io.hpp"
#include "pretherm/ion_chain.hpp"
#include "pretherm/validation.hpp"

namespace pretherm {

inline constexpr int kExitInternal = 1;

struct CliOptions {
  std::string config;
  std::string preset;
  std::string out_dir = "out";
  int threads = 0;      // 0: keep the configured value
  double t_max = -1.0;  // < 0: keep the configured value
  int grid = 0;         // 0: keep the configured value
  double control_alpha = -1.0;
  int control_n = 0;
};

namespace cli_detail {

using nlohmann::json;
namespace fs = std::filesystem;

inline Settings resolve_settings(const CliOptions& o) {
  if (!o.config.empty() && !o.preset.empty()) throw ArgumentError("use either --config or --preset, not both");
  Settings s = !o.config.empty() ? load_config(o.config) : preset(o.preset.empty() ? "fig2b" : o.preset);
  if (o.threads != 0) s.threads = o.threads;
  if (o.t_max >= 0.0) s.t_max = o.t_max;
  if (o.grid != 0) s.grid_points = o.grid;
  if (o.control_alpha >= 0.0) s.control_alpha = o.control_alpha;
  if (o.control_n != 0) s.control_n = o.control_n;
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ArgumentError(e.what());
  }
  return s;
}

/// Collects written files and the summary for one run.
class Run {
 public:
  Run(std::string command, const Settings& s, fs::path dir, std::ostream& log)
      : command_(std::move(command)), settings_(s), dir_(std::move(dir)), hash_(config_hash(s)), log_(log) {}

  const Settings& settings() const { return settings_; }

  void table(const std::string& name, const CsvTable& t) {
    const fs::path path = dir_ / (name + ".csv");
    write_csv(path, t, manifest_line(hash_, name));
    outputs_.push_back(path.filename().string());
    log_ << "[" << command_ << "] wrote " << path.string() << " (" << t.rows.size() << " rows)\n";
  }

  json& result() { return result_; }

  json finish() {
    json summary;
    summary["status"] = "ok";
    summary["command"] = command_;
    summary["version"] = kVersion;
    summary["config_hash"] = hash_;
    summary["settings"] = settings_to_json(settings_);
    summary["outputs"] = outputs_;
    summary["result"] = result_;
    const fs::path manifest = dir_ / (command_ + "_manifest.json");
    write_text(manifest, summary.dump(2) + "\n");
    return summary;
  }

 private:
  std::string command_;
  Settings settings_;
  fs::path dir_;
  std::string hash_;
  std::ostream& log_;
  std::vector<std::string> outputs_;
  json result_ = json::object();
};

inline json fit_json(const CouplingMatrix& c) {
  if (!c.fit) return nullptr;
  return {{"alpha", c.fit->alpha},
          {"alpha_loglog", c.fit->alpha_loglog},
          {"amplitude", c.fit->amplitude},
          {"relative_residual", c.fit->relative_residual},
          {"points", c.fit->points}};
}

inline std::string site_col(const std::string& prefix, int i) { return prefix + std::to_string(i + 1); }

inline void cmd_chain(Run& run) {
  const TrapConfig& c = run.settings().trap;
  c.validate();
  const IonChain chain = solve_equilibrium(c);
  CsvTable t{{"site", "position"}, {}};
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < chain.size(); ++i) {
    t.add({i + 1, chain.positions[static_cast<std::size_t>(i)]});
    if (i > 0) min_gap = std::min(min_gap, chain.positions[static_cast<std::size_t>(i)] - chain.positions[static_cast<std::size_t>(i - 1)]);
  }
  run.table("chain", t);
  run.result() = {{"n_ions", chain.size()},
                  {"residual", chain.residual},
                  {"iterations", chain.iterations},
                  {"min_spacing", min_gap},
                  {"max_position", chain.positions.back()}};
}

inline void cmd_modes(Run& run) {
  const TrapConfig& c = run.settings().trap;
  const IonChain chain = solve_equilibrium(c);
  const PhononSpectrum ps = transverse_modes(chain, c);
  CsvTable t{{"mode", "frequency_mhz", "lamb_dicke_scale"}, {}};
  for (int m = 0; m < ps.size(); ++m) t.add({m + 1, ps.frequencies(m), ps.lamb_dicke_scale(m)});
  run.table("modes", t);
  CsvTable v{{"site"}, {}};
  for (int m = 0; m < ps.size(); ++m) v.header.push_back(site_col("b_mode", m));
  for (int i = 0; i < ps.size(); ++i) {
    std::vector<CsvCell> row{i + 1};
    for (int m = 0; m < ps.size(); ++m) row.emplace_back(ps.mode_vectors(i, m));
    v.add(std::move(row));
  }
  run.table("mode_vectors", v);
  run.result() = {{"n_ions", ps.size()},
                  {"com_mhz", ps.frequencies(0)},
                  {"lowest_mhz", ps.frequencies(ps.size() - 1)},
                  {"bandwidth_mhz", ps.frequencies(0) - ps.frequencies(ps.size() - 1)}};
}

inline void cmd_coupling(Run& run) {
  const Pipeline p = run_pipeline(run.settings().trap);
  const int n = p.size();
  CsvTable pairs{{"i", "j", "distance", "j_hz", "j_over_j0"}, {}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.add({i + 1, j + 1, j - i, p.coupling_hz.j(i, j), p.coupling.j(i, j)});
  run.table("coupling", pairs);
  CsvTable m{{"site"}, {}};
  for (int j = 0; j < n; ++j) m.header.push_back(site_col("j_hz_", j));
  for (int i = 0; i < n; ++i) {
    std::vector<CsvCell> row{i + 1};
    for (int j = 0; j < n; ++j) row.emplace_back(p.coupling_hz.j(i, j));
    m.add(std::move(row));
  }
  run.table("coupling_matrix", m);
  run.result() = {{"n_ions", n}, {"j0_hz", p.coupling_hz.j0}, {"fit", fit_json(p.coupling)},
                  {"source", source_name(p.coupling.source)}};
}

inline void cmd_evolve(Run& run) {
  const Settings& s = run.settings();
  const Pipeline p = run_pipeline(s.trap);
  const QuenchSeries q = run_quench_experiment(p, s.time_grid());
  const int n = p.size();
  CsvTable t{{"t", "c", "c_bar"}, {}};
  for (int i = 0; i < n; ++i) t.header.push_back(site_col("sz_", i));
  for (const auto& [a, b] : q.zz_pairs) t.header.push_back("zz_" + std::to_string(a + 1) + "_" + std::to_string(b + 1));
  for (const auto& [a, b] : q.zz_pairs)
    t.header.push_back("zz_bar_" + std::to_string(a + 1) + "_" + std::to_string(b + 1));
  double peak_last = 0.0;
  for (std::size_t k = 0; k < q.times.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    std::vector<CsvCell> row{q.times[k], q.c[k], q.c_bar[k]};
    for (int i = 0; i < n; ++i) row.emplace_back(q.sigma_z(r, i));
    for (Eigen::Index c = 0; c < q.zz.cols(); ++c) row.emplace_back(q.zz(r, c));
    for (Eigen::Index c = 0; c < q.zz_bar.cols(); ++c) row.emplace_back(q.zz_bar(r, c));
    t.add(std::move(row));
    peak_last = std::max(peak_last, 0.5 * (q.sigma_z(r, n - 1) + 1.0));
  }
  run.table("timeseries", t);
  run.result() = {{"n_ions", n},
                  {"alpha", p.alpha()},
                  {"t_max", q.times.back()},
                  {"points", q.times.size()},
                  {"c_final", q.c.back()},
                  {"c_bar_final", q.c_bar.back()},
                  {"peak_p_last_site", peak_last},
                  {"max_norm_drift", q.max_norm_drift},
                  {"max_energy_drift", q.max_energy_drift}};
}

inline void cmd_spectrum(Run& run) {
  const Pipeline p = run_pipeline(run.settings().trap);
  const GapStructure g = gap_structure(p.spectrum);
  const BranchReport br = branch_detector(g);
  const Timescales ts = timescale_estimates(g);
  CsvTable e{{"m", "energy"}, {}};
  for (int m = 0; m < p.spectrum.size(); ++m) e.add({m + 1, p.spectrum.energies(m)});
  run.table("energies", e);
  CsvTable pg{{"k", "gap"}, {}};
  for (std::size_t k = 0; k < g.pair_gaps.size(); ++k) pg.add({static_cast<int>(k + 1), g.pair_gaps[k]});
  run.table("pair_gaps", pg);
  CsvTable ag{{"m", "n", "gap"}, {}};
  std::size_t idx = 0;
  for (int m = 0; m < g.n; ++m)
    for (int k = m + 1; k < g.n; ++k) ag.add({m + 1, k + 1, g.all_gaps[idx++]});
  run.table("all_gaps", ag);
  double max_branch_pair_gap = 0.0;
  for (double x : br.branch_gaps) max_branch_pair_gap = std::max(max_branch_pair_gap, x);
  run.result() = {{"n_ions", p.size()},
                  {"alpha", p.alpha()},
                  {"mean_spacing", g.mean_spacing},
                  {"min_spacing", g.min_spacing},
                  {"prethermal_time", ts.prethermal_time},
                  {"thermal_time", ts.thermal_time},
                  {"branch_detected", br.detected},
                  {"branch_size", br.branch_gaps.size()},
                  {"branch_max_gap", max_branch_pair_gap},
                  {"window_low", br.window_low},
                  {"window_high", br.window_high},
                  {"stragglers", br.stragglers}};
}

inline void cmd_ensembles(Run& run) {
  const Pipeline p = run_pipeline(run.settings().trap);
  const EnsemblePrediction de = diagonal_ensemble(p.spectrum, p.psi0);
  const EnsemblePrediction pde = partial_diagonal_ensemble(p.spectrum, p.psi0, kT0);
  const double t_th = thermal_readout_time(p.spectrum);
  const Eigen::VectorXd sz_t0 = sigma_z_bar(p.spectrum, p.psi0, kT0);
  const Eigen::VectorXd sz_th = sigma_z_bar(p.spectrum, p.psi0, t_th);
  CsvTable t{{"site", "sz_bar_t0", "sz_pde", "sz_bar_thermal", "sz_de"}, {}};
  for (int i = 0; i < p.size(); ++i) t.add({i + 1, sz_t0(i), pde.sigma_z(i), sz_th(i), de.sigma_z(i)});
  run.table("ensembles", t);
  run.result() = {{"n_ions", p.size()},
                  {"alpha", p.alpha()},
                  {"t0", kT0},
                  {"thermal_time", t_th},
                  {"c_bar_t0", c_bar(p.spectrum, p.psi0, kT0)},
                  {"c_pde", pde.c_value},
                  {"c_bar_thermal", c_bar(p.spectrum, p.psi0, t_th)},
                  {"c_de", de.c_value},
                  {"pde_retained_pairs", pde.retained_pairs.size()},
                  {"max_dev_t0_pde", (sz_t0 - pde.sigma_z).cwiseAbs().maxCoeff()},
                  {"max_dev_thermal_de", (sz_th - de.sigma_z).cwiseAbs().maxCoeff()}};
}

inline void cmd_sweep(Run& run) {
  const Settings& s = run.settings();
  const SweepResult r = phase_diagram_sweep(s.sweep_base(), s.sweep_mu_grid(), s.sweep_sizes(), s.threads, s.delta);
  CsvTable t{{"n", "mu_mhz", "omega_z_mhz", "alpha", "c_bar_t0", "c_bar_thermal", "c_bar_readout", "thermal_time",
              "phase_label"},
             {}};
  for (const auto& p : r.points)
    t.add({p.n, p.mu, p.omega_z, p.alpha, p.c_bar_t0, p.c_bar_thermal, p.c_bar_readout, p.thermal_time,
           phase_name(p.phase)});
  run.table("phase_diagram", t);
  CsvTable f{{"n", "mu_mhz", "category", "message"}, {}};
  for (const auto& x : r.failures) {
    std::string msg = x.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    f.add({x.n, x.mu, x.category, msg});
  }
  run.table("sweep_failures", f);
  json per_n = json::array();
  for (int n : s.sweep_sizes()) {
    const TransitionAnalysis a = analyze_transition(r.for_size(n), s.delta);
    per_n.push_back({{"n", n},
                     {"points", r.for_size(n).size()},
                     {"alpha_c", a.alpha_c ? json(*a.alpha_c) : json(nullptr)},
                     {"sharpness", a.sharpness},
                     {"sharpness_full_grid", a.sharpness_full},
                     {"anomalies", a.anomalies}});
  }
  run.result() = {{"points", r.points.size()}, {"failures", r.failures.size()}, {"transitions", per_n}};
}

inline void cmd_control(Run& run) {
  const Settings& s = run.settings();
  const ControlReport r = equally_spaced_control(s.control_n, s.control_alpha, s.delta);
  CsvTable t{{"variant", "alpha_fit", "branch_detected", "branch_size", "stragglers", "min_gap", "c_bar_t0", "c_de",
              "plateau"},
             {}};
  json variants = json::array();
  for (const ControlVariant* v : {&r.open, &r.ring}) {
    const char* name = v->periodic ? "ring" : "open";
    t.add({name, v->alpha_fit, v->branch.detected ? 1 : 0, static_cast<int>(v->branch.branch_gaps.size()),
           v->branch.stragglers, v->min_gap, v->c_bar_t0, v->c_de, v->plateau ? 1 : 0});
    variants.push_back({{"variant", name},
                        {"alpha_fit", v->alpha_fit},
                        {"branch_detected", v->branch.detected},
                        {"min_gap", v->min_gap},
                        {"c_bar_t0", v->c_bar_t0},
                        {"c_de", v->c_de},
                        {"plateau", v->plateau}});
  }
  run.table("control", t);
  run.result() = {{"n", r.n}, {"alpha", r.alpha}, {"variants", variants}};
}

inline void cmd_validate(Run& run) {
  const auto checks = run_validation_suite();
  CsvTable t{{"check", "value", "bound", "relation", "passed"}, {}};
  json arr = json::array();
  int failed = 0;
  for (const auto& c : checks) {
    t.add({c.name, c.value, c.bound, c.relation, c.passed ? 1 : 0});
    arr.push_back({{"check", c.name}, {"value", c.value}, {"bound", c.bound}, {"passed", c.passed}});
    if (!c.passed) ++failed;
  }
  run.table("validation", t);
  run.result() = {{"checks", arr}, {"failed", failed}};
  if (failed) {
    run.finish();
    throw ValidationError(std::to_string(failed) + " validation check(s) failed");
  }
}

inline json error_json(const std::string& category, int code, const std::string& message) {
  return {{"status", "error"}, {"category", category}, {"exit_code", code}, {"message", message}};
}

}  // namespace cli_detail

/// Parses argv, runs one subcommand, and returns the process exit status.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  using namespace cli_detail;
  CLI::App app{"Prethermalization in a trapped-ion XY chain", "pretherm"};
  app.require_subcommand(1);
  CliOptions opt;

  using Handler = std::function<void(Run&)>;
  const std::vector<std::tuple<std::string, std::string, Handler>> commands{
      {"chain", "equilibrium ion positions", cmd_chain},
      {"modes", "transverse normal modes", cmd_modes},
      {"coupling", "spin-spin coupling matrix and power-law fit", cmd_coupling},
      {"evolve", "quench time series", cmd_evolve},
      {"spectrum", "energies, gaps and branch detection", cmd_spectrum},
      {"ensembles", "diagonal and partial diagonal ensembles", cmd_ensembles},
      {"sweep", "phase diagram over the beatnote grid", cmd_sweep},
      {"control", "equally spaced lattice control", cmd_control},
      {"validate", "oracle and invariant self-checks", cmd_validate},
  };
  std::map<std::string, Handler> handlers;
  for (const auto& [name, help, handler] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--preset", opt.preset, "built-in preset");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--tmax", opt.t_max, "final time in units of 1/J0")->check(CLI::PositiveNumber);
    sub->add_option("--grid", opt.grid, "number of time grid points")->check(CLI::Range(2, 10000000));
    if (name == "control") {
      sub->add_option("--alpha", opt.control_alpha, "power-law exponent")->check(CLI::NonNegativeNumber);
      sub->add_option("--n", opt.control_n, "chain length")->check(CLI::Range(4, 100000));
    }
    handlers[name] = handler;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = static_cast<int>(ErrorCategory::argument);
    out << error_json("argument", code, e.what()).dump() << "\n";
    log << "error: " << e.what() << "\n";
    return code;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Settings settings = resolve_settings(opt);
    Run run(command, settings, opt.out_dir, log);
    log << "[" << command << "] config_hash=" << config_hash(settings) << "\n";
    handlers.at(command)(run);
    out << run.finish().dump() << "\n";
    return 0;
  } catch (const Error& e) {
    out << error_json(category_name(e.category()), e.exit_code(), e.what()).dump() << "\n";
    log << "error (" << category_name(e.category()) << "): " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    out << error_json("internal", kExitInternal, e.what()).dump() << "\n";
    log << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace pretherm
