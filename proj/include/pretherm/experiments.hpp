#pragma once

// Experiment orchestration: the chain -> modes -> coupling -> spectrum
// pipeline, quench time series, the alpha phase diagram, and the equally
// spaced lattice control.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iterator>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pretherm/coupling.hpp"
#include "pretherm/dynamics.hpp"
#include "pretherm/ensembles.hpp"
#include "pretherm/errors.hpp"
#include "pretherm/ion_chain.hpp"

namespace pretherm {

/// Intermediate observation time in units of 1/J0.
inline constexpr double kT0 = 10.0;
/// Default phase classification threshold on |C|.
inline constexpr double kPhaseDelta = 0.05;

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct Pipeline {
  TrapConfig config;
  IonChain chain;
  PhononSpectrum modes;
  CouplingMatrix coupling_hz;  // normalized to config.j0_hz
  CouplingMatrix coupling;     // normalized to j0 = 1; energies in J0, times in 1/J0
  SingleExcitationHamiltonian hamiltonian;
  SpectralDecomposition spectrum;
  QuenchState psi0;

  int size() const { return config.n_ions; }
  double alpha() const { return coupling.alpha_fit(); }
};

/// Dynamics stage shared by physical and synthetic couplings.
inline Pipeline pipeline_from_coupling(const CouplingMatrix& coupling_unit) {
  Pipeline p;
  p.config.n_ions = coupling_unit.size();
  p.coupling = coupling_unit;
  p.coupling_hz = coupling_unit;
  p.hamiltonian = build_hamiltonian(p.coupling);
  p.spectrum = decompose(p.hamiltonian);
  p.psi0 = quench_initial_state(p.coupling.size());
  return p;
}

inline Pipeline run_pipeline(const TrapConfig& config) {
  config.validate();
  IonChain chain = solve_equilibrium(config);
  PhononSpectrum modes = transverse_modes(chain, config);
  CouplingMatrix hz = build_physical_coupling(modes, config);
  Pipeline p = pipeline_from_coupling(normalize_to_j0(hz, 1.0));
  p.config = config;
  p.chain = std::move(chain);
  p.modes = std::move(modes);
  p.coupling_hz = std::move(hz);
  return p;
}

/// Thermal readout time max(T0, min(1e5, 10 / min_spacing)) in units of 1/J0.
inline double thermal_readout_time(const SpectralDecomposition& spec) {
  const Timescales ts = timescale_estimates(gap_structure(spec));
  return std::max(kT0, std::min(1e5, 10.0 * ts.thermal_time));
}

// ---------------------------------------------------------------------------
// Quench time series
// ---------------------------------------------------------------------------

struct QuenchSeries {
  std::vector<double> times;
  Eigen::MatrixXd sigma_z;       // rows: time, cols: site
  std::vector<double> c;         // <C(t)>
  std::vector<double> c_bar;     // running time average of C
  std::vector<std::pair<int, int>> zz_pairs;  // 0-based site pairs
  Eigen::MatrixXd zz;            // rows: time, cols: pair; <sz_i sz_j>(t)
  Eigen::MatrixXd zz_bar;        // rows: time, cols: pair; time averaged
  double max_norm_drift = 0.0;
  double max_energy_drift = 0.0;  // relative to max(|E0|, spectral width)
};

/// Pairs (1,2), (1,N) and the central pair, 0-based.
inline std::vector<std::pair<int, int>> default_zz_pairs(int n) {
  std::vector<std::pair<int, int>> pairs{{0, 1}, {0, n - 1}};
  if (n >= 4) pairs.emplace_back(n / 2 - 1, n / 2);
  return pairs;
}

inline QuenchSeries run_quench_experiment(const Pipeline& p, const std::vector<double>& times,
                                          std::vector<std::pair<int, int>> zz_pairs = {}) {
  const int n = p.size();
  if (zz_pairs.empty()) zz_pairs = default_zz_pairs(n);
  for (const auto& [a, b] : zz_pairs)
    if (a == b || a < 0 || b < 0 || a >= n || b >= n) throw ArgumentError("run_quench_experiment: bad zz pair");
  for (double t : times)
    if (!(t >= 0.0)) throw ArgumentError("run_quench_experiment: times must be >= 0");

  QuenchSeries s;
  s.times = times;
  s.zz_pairs = zz_pairs;
  const auto nt = static_cast<Eigen::Index>(times.size());
  const auto np = static_cast<Eigen::Index>(zz_pairs.size());
  s.sigma_z.resize(nt, n);
  s.zz.resize(nt, np);
  s.zz_bar.resize(nt, np);
  s.c.resize(times.size());
  s.c_bar.resize(times.size());
  const Eigen::VectorXd f = c_weights(n);
  const double e0 = energy_expectation(p.hamiltonian, p.psi0);
  const double e_scale = std::max(std::abs(e0), p.spectrum.width());

  for (Eigen::Index k = 0; k < nt; ++k) {
    const double t = times[static_cast<std::size_t>(k)];
    const QuenchState st = evolve(p.spectrum, p.psi0, t);
    const Eigen::VectorXd prob = st.probabilities();
    s.sigma_z.row(k) = (2.0 * prob.array() - 1.0).matrix().transpose();
    s.c[static_cast<std::size_t>(k)] = f.dot(prob);
    const Eigen::VectorXd p_bar = t > 0.0 ? time_averaged_occupations(p.spectrum, p.psi0, t) : prob;
    s.c_bar[static_cast<std::size_t>(k)] = f.dot(p_bar);
    for (Eigen::Index q = 0; q < np; ++q) {
      const auto [a, b] = zz_pairs[static_cast<std::size_t>(q)];
      s.zz(k, q) = zz_correlation(st, a, b);
      s.zz_bar(k, q) = zz_bar(p_bar, a, b);
    }
    s.max_norm_drift = std::max(s.max_norm_drift, std::abs(st.norm2() - 1.0));
    s.max_energy_drift =
        std::max(s.max_energy_drift, std::abs(energy_expectation(p.hamiltonian, st) - e0) / e_scale);
  }
  return s;
}

inline QuenchSeries run_quench_experiment(const TrapConfig& config, const std::vector<double>& times) {
  return run_quench_experiment(run_pipeline(config), times);
}

// ---------------------------------------------------------------------------
// Phase diagram
// ---------------------------------------------------------------------------

enum class Phase { thermal_only, prethermal_then_thermal, prethermal_only };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::thermal_only: return "thermal-only";
    case Phase::prethermal_then_thermal: return "prethermal-then-thermal";
    case Phase::prethermal_only: return "prethermal-only";
  }
  return "unknown";
}

struct SweepPoint {
  int n = 0;
  double mu = 0.0;              // MHz
  double omega_z = 0.0;         // MHz
  double alpha = 0.0;           // fitted exponent
  double c_bar_t0 = 0.0;        // time-averaged C at T0
  double c_bar_thermal = 0.0;   // diagonal-ensemble C, used for classification
  double c_bar_readout = 0.0;   // time-averaged C at the thermal readout time
  double thermal_time = 0.0;    // readout time, 1/J0
  Phase phase = Phase::thermal_only;
};

inline Phase classify_phase(const SweepPoint& point, double delta = kPhaseDelta) {
  if (!(delta > 0.0 && delta < 0.5)) throw ArgumentError("classify_phase: delta must lie in (0, 0.5)");
  if (std::abs(point.c_bar_t0) <= delta) return Phase::thermal_only;
  if (std::abs(point.c_bar_thermal) <= delta) return Phase::prethermal_then_thermal;
  return Phase::prethermal_only;
}

/// Evaluates one sweep point from a finished pipeline.
inline SweepPoint evaluate_point(const Pipeline& p, double delta = kPhaseDelta) {
  SweepPoint pt;
  pt.n = p.size();
  pt.mu = p.config.mu_mhz;
  pt.omega_z = p.config.omega_z_mhz;
  pt.alpha = p.coupling.fit ? p.coupling.fit->alpha : 0.0;
  pt.c_bar_t0 = c_bar(p.spectrum, p.psi0, kT0);
  pt.c_bar_thermal = diagonal_ensemble(p.spectrum, p.psi0).c_value;
  pt.thermal_time = thermal_readout_time(p.spectrum);
  pt.c_bar_readout = c_bar(p.spectrum, p.psi0, pt.thermal_time);
  pt.phase = classify_phase(pt, delta);
  return pt;
}

struct SweepFailure {
  int n = 0;
  double mu = 0.0;
  std::string category;
  std::string message;
};

struct SweepResult {
  std::vector<SweepPoint> points;  // sorted by (n, alpha, mu)
  std::vector<SweepFailure> failures;

  std::vector<SweepPoint> for_size(int n) const {
    std::vector<SweepPoint> out;
    std::copy_if(points.begin(), points.end(), std::back_inserter(out), [n](const SweepPoint& p) { return p.n == n; });
    return out;
  }
};

/// mu = omega_x + d for `points` detunings d log-spaced over [d_min, d_max] MHz.
inline std::vector<double> default_mu_grid(double omega_x, int points = 40, double d_min = 1e-5,
                                           double d_max = std::pow(10.0, 0.5)) {
  if (points < 2 || !(d_min > 0) || !(d_max > d_min)) throw ArgumentError("default_mu_grid: bad range");
  std::vector<double> g(static_cast<std::size_t>(points));
  const double l0 = std::log10(d_min), l1 = std::log10(d_max);
  for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = omega_x + std::pow(10.0, l0 + (l1 - l0) * k / (points - 1));
  return g;
}

/// Trap for chain length n: omega_z rescaled from the base trap when n differs.
inline TrapConfig config_for_size(const TrapConfig& base, int n) {
  TrapConfig c = base;
  c.n_ions = n;
  if (n != base.n_ions) c.omega_z_mhz = scaled_omega_z(n, base.n_ions, base.omega_z_mhz);
  return c;
}

/// Evaluates every (N, mu) point, in parallel when threads > 1. Failing
/// points are recorded and skipped. Output order does not depend on threads.
inline SweepResult phase_diagram_sweep(const TrapConfig& base, const std::vector<double>& mu_grid,
                                       const std::vector<int>& n_list, int threads = 1, double delta = kPhaseDelta) {
  base.validate();
  if (mu_grid.empty() || n_list.empty()) throw ArgumentError("phase_diagram_sweep: empty grid");
  if (!(delta > 0.0 && delta < 0.5)) throw ArgumentError("phase_diagram_sweep: delta must lie in (0, 0.5)");
  struct Task {
    int n;
    double mu;
  };
  std::vector<Task> tasks;
  for (int n : n_list)
    for (double mu : mu_grid) tasks.push_back({n, mu});

  std::vector<std::optional<SweepPoint>> results(tasks.size());
  std::vector<std::optional<SweepFailure>> failures(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      const Task& t = tasks[k];
      try {
        TrapConfig c = config_for_size(base, t.n);
        c.mu_mhz = t.mu;
        results[k] = evaluate_point(run_pipeline(c), delta);
      } catch (const Error& e) {
        failures[k] = SweepFailure{t.n, t.mu, category_name(e.category()), e.what()};
      }
    }
  };
  const int nthreads = std::clamp(threads, 1, static_cast<int>(tasks.size()));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
  }

  SweepResult out;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    if (results[k]) out.points.push_back(*results[k]);
    if (failures[k]) out.failures.push_back(*failures[k]);
  }
  std::stable_sort(out.points.begin(), out.points.end(), [](const SweepPoint& a, const SweepPoint& b) {
    if (a.n != b.n) return a.n < b.n;
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    return a.mu < b.mu;
  });
  return out;
}

struct TransitionAnalysis {
  int n = 0;
  std::optional<double> alpha_c;  // onset of prethermalization, interpolated where |C(T0)| = delta
  double sharpness = 0.0;         // max |dC(T0)/dalpha| over alpha >= alpha_c / 2
  double sharpness_full = 0.0;    // the same over the whole grid
  std::vector<std::string> anomalies;
};

/// Locates the thermal-only -> prethermal boundary scanning from large alpha
/// and measures the steepest finite-difference slope of C(T0) in alpha.
/// Points sharing an alpha value within 1e-9 are not differenced.
inline TransitionAnalysis analyze_transition(std::vector<SweepPoint> points, double delta = kPhaseDelta) {
  TransitionAnalysis out;
  if (points.empty()) return out;
  out.n = points.front().n;
  std::sort(points.begin(), points.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.alpha > b.alpha; });

  for (std::size_t k = 1; k < points.size(); ++k) {
    const double ca = std::abs(points[k - 1].c_bar_t0), cb = std::abs(points[k].c_bar_t0);
    if (ca <= delta && cb > delta) {
      const double w = (delta - ca) / (cb - ca);
      out.alpha_c = points[k - 1].alpha + w * (points[k].alpha - points[k - 1].alpha);
      break;
    }
  }

  const double floor_alpha = out.alpha_c ? 0.5 * *out.alpha_c : -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < points.size(); ++k) {
    const double da = points[k - 1].alpha - points[k].alpha;
    if (!(da > 1e-9)) continue;
    const double slope = std::abs(points[k - 1].c_bar_t0 - points[k].c_bar_t0) / da;
    out.sharpness_full = std::max(out.sharpness_full, slope);
    if (points[k].alpha >= floor_alpha) out.sharpness = std::max(out.sharpness, slope);
  }

  // Monotone phase ordering: thermal-only, then prethermal-then-thermal, with
  // prethermal-only only at the alpha -> 0 end.
  auto rank = [](Phase p) { return p == Phase::thermal_only ? 0 : p == Phase::prethermal_then_thermal ? 1 : 2; };
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (rank(points[k].phase) < rank(points[k - 1].phase)) {
      out.anomalies.push_back("phase order reversed between alpha=" + std::to_string(points[k - 1].alpha) +
                              " (" + phase_name(points[k - 1].phase) + ") and alpha=" +
                              std::to_string(points[k].alpha) + " (" + phase_name(points[k].phase) + ")");
    }
  }
  for (const auto& p : points)
    if (p.phase == Phase::prethermal_only && p.alpha > 1e-3)
      out.anomalies.push_back("prethermal-only at alpha=" + std::to_string(p.alpha));
  return out;
}

// ---------------------------------------------------------------------------
// Equally spaced control
// ---------------------------------------------------------------------------

struct ControlVariant {
  bool periodic = false;
  double alpha_fit = 0.0;
  BranchReport branch;
  double min_gap = 0.0;       // smallest nonzero |E_m - E_n|
  double c_bar_t0 = 0.0;
  double c_de = 0.0;
  bool plateau = false;       // |C(T0) - C_DE| > delta
};

struct ControlReport {
  int n = 0;
  double alpha = 0.0;
  ControlVariant open;
  ControlVariant ring;
};

inline ControlVariant run_control_variant(int n, double alpha, bool periodic, double delta) {
  ControlVariant v;
  v.periodic = periodic;
  const Pipeline p = pipeline_from_coupling(build_synthetic_coupling(n, alpha, periodic));
  v.alpha_fit = p.coupling.fit ? p.coupling.fit->alpha : 0.0;
  const GapStructure g = gap_structure(p.spectrum);
  v.branch = branch_detector(g);
  v.min_gap = std::numeric_limits<double>::infinity();
  for (double x : g.all_gaps)
    if (x > g.degeneracy_floor) v.min_gap = std::min(v.min_gap, x);
  v.c_bar_t0 = c_bar(p.spectrum, p.psi0, kT0);
  v.c_de = diagonal_ensemble(p.spectrum, p.psi0).c_value;
  v.plateau = std::abs(v.c_bar_t0 - v.c_de) > delta;
  return v;
}

/// Synthetic power-law chain on an equally spaced lattice, open and ring variants.
inline ControlReport equally_spaced_control(int n, double alpha, double delta = kPhaseDelta) {
  if (n < 4) throw ArgumentError("equally_spaced_control: n must be >= 4");
  ControlReport r;
  r.n = n;
  r.alpha = alpha;
  r.open = run_control_variant(n, alpha, false, delta);
  r.ring = run_control_variant(n, alpha, true, delta);
  return r;
}

}  // namespace pretherm
