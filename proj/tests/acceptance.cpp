// Acceptance run: one pass/fail line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "pretherm/pretherm.hpp"

using namespace pretherm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string g(double x) { return fmt("%.4g", x); }

Pipeline preset_pipeline(const std::string& name) { return run_pipeline(preset(name).trap); }

// 1. Uniform coupling: DE value and long-time running average equal 2/N - 1.
Outcome uniform_closed_form() {
  Outcome o{true, ""};
  double worst_de = 0.0, worst_avg = 0.0;
  for (int n : {4, 16, 64}) {
    const Pipeline p = pipeline_from_coupling(build_synthetic_coupling(n, 0.0));
    const double target = 2.0 / n - 1.0;
    worst_de = std::max(worst_de, std::abs(diagonal_ensemble(p.spectrum, p.psi0).c_value - target));
    for (double t : {1e2, 3e2, 1e3, 1e4, 1e5})
      worst_avg = std::max(worst_avg, std::abs(c_bar(p.spectrum, p.psi0, t) - target));
  }
  o.pass = worst_de <= 1e-9 && worst_avg <= 1e-9;
  o.detail = "max |DE - (2/N-1)| = " + g(worst_de) + ", max |C(t>=100) - (2/N-1)| = " + g(worst_avg) + " (bound 1e-9)";
  return o;
}

// 2. Initial state: C = -1 and sum of sz = 2 - N, exactly.
Outcome initial_state() {
  bool ok = true;
  for (int n : {2, 16, 64, 256}) {
    const QuenchState s = quench_initial_state(n);
    ok = ok && c_expectation(s) == -1.0 && sigma_z_profile(s).sum() == 2.0 - n;
  }
  const Pipeline p = preset_pipeline("fig2b");
  const QuenchSeries q = run_quench_experiment(p, {0.0});
  ok = ok && q.c.front() == -1.0 && q.sigma_z.row(0).sum() == 2.0 - p.size();
  return {ok, ok ? "exact for N in {2, 16, 64, 256} and the fig2b series at t=0" : "initial-state identity violated"};
}

// 3. Fitted exponents of the two reference traps.
Outcome fitted_exponents() {
  const double a = preset_pipeline("fig2a").alpha();
  const double b = preset_pipeline("fig2b").alpha();
  return {a >= 2.3 && a <= 2.9 && b >= 0.37 && b <= 0.67,
          "fig2a alpha = " + g(a) + " in [2.3, 2.9]; fig2b alpha = " + g(b) + " in [0.37, 0.67]"};
}

// 4. Prethermal plateau then thermalization for the long-range trap.
Outcome prethermal_plateau() {
  const Pipeline p = preset_pipeline("fig2b");
  const double c0 = c_bar(p.spectrum, p.psi0, kT0);
  const double t_th = thermal_readout_time(p.spectrum);
  const double c_th = c_bar(p.spectrum, p.psi0, t_th);
  const double de = diagonal_ensemble(p.spectrum, p.psi0).c_value;
  return {std::abs(c0 + 0.4) <= 0.1 && std::abs(c_th) <= 0.1 && std::abs(de) <= 0.1,
          "C(T0) = " + g(c0) + ", C(t=" + g(t_th) + ") = " + g(c_th) + ", DE = " + g(de)};
}

// 5. Short-range trap relaxes in one stage: C(t >= T0) tracks the DE value.
Outcome single_stage() {
  const Pipeline p = preset_pipeline("fig2a");
  const double de = diagonal_ensemble(p.spectrum, p.psi0).c_value;
  double worst = 0.0;
  for (double t : log_time_grid(kT0, 1e5, 50)) worst = std::max(worst, std::abs(c_bar(p.spectrum, p.psi0, t) - de));
  return {worst <= 0.1, "max |C(t) - DE| over t in [10, 1e5] = " + g(worst) + " (bound 0.1), DE = " + g(de)};
}

struct SweepSummary {
  TransitionAnalysis t;
  std::size_t points = 0, failures = 0;
};

SweepSummary sweep_for(const std::string& name) {
  const Settings s = preset(name);
  const SweepResult r = phase_diagram_sweep(s.sweep_base(), s.sweep_mu_grid(), s.sweep_sizes(), 1, s.delta);
  return {analyze_transition(r.points, s.delta), r.points.size(), r.failures.size()};
}

// 6. N=16 transition point.
Outcome transition_n16() {
  const SweepSummary s = sweep_for("fig4-n16");
  if (!s.t.alpha_c) return {false, "no thermal-only -> prethermal crossing found"};
  const double a = *s.t.alpha_c;
  return {a >= 1.0 && a <= 1.6, "alpha_C = " + g(a) + " in [1.0, 1.6] (" + std::to_string(s.points) + " points)"};
}

// 7. Sharper transition at smaller alpha_C for larger N.
Outcome sharpening() {
  std::vector<SweepSummary> s;
  for (const char* name : {"fig4-n16", "fig4-n64", "fig4-n256"}) s.push_back(sweep_for(name));
  std::string d;
  bool ok = true;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const int n = 16 << (2 * k);
    d += (k ? "; " : "") + std::string("N=") + std::to_string(n) + " alpha_C=" +
         (s[k].t.alpha_c ? g(*s[k].t.alpha_c) : "none") + " sharpness=" + g(s[k].t.sharpness);
    if (!s[k].t.alpha_c || s[k].failures) ok = false;
    if (k > 0 && ok) {
      ok = s[k].t.sharpness > s[k - 1].t.sharpness && *s[k].t.alpha_c < *s[k - 1].t.alpha_c;
    }
  }
  return {ok, d};
}

// 8. Separate low-gap branch for the long-range N=256 chain only.
Outcome spectral_branch() {
  const Pipeline lr = preset_pipeline("fig5c");
  const Pipeline sr = preset_pipeline("fig5b");
  const GapStructure gl = gap_structure(lr.spectrum);
  const BranchReport bl = branch_detector(gl);
  const BranchReport bs = branch_detector(gap_structure(sr.spectrum));
  double branch_max = 0.0;
  for (double x : bl.branch_gaps) branch_max = std::max(branch_max, x);
  std::vector<double> main;
  for (double x : gl.all_gaps)
    if (x > bl.window_high) main.push_back(x);
  std::sort(main.begin(), main.end());
  const double lo = main.empty() ? 0.0 : main[main.size() / 20];
  const double hi = main.empty() ? 0.0 : main.back();
  // Order-of-magnitude reading of "J0 to 100 J0": bulk above 0.1 J0, top between 10 and 1000 J0.
  const bool span_ok = lo >= 0.1 && hi >= 10.0 && hi <= 1000.0;
  const bool ok = lr.alpha() >= 0.6 && lr.alpha() <= 0.9 && sr.alpha() >= 2.1 && sr.alpha() <= 2.7 && bl.detected &&
                  branch_max <= 1e-4 && span_ok && !bs.detected;
  return {ok, "long-range alpha=" + g(lr.alpha()) + " branch=" + (bl.detected ? "yes" : "no") + " (" +
                  std::to_string(bl.branch_gaps.size()) + " gaps, max " + g(branch_max) + "), main gaps 5%=" + g(lo) +
                  " max=" + g(hi) + "; short-range alpha=" + g(sr.alpha()) + " branch=" + (bs.detected ? "yes" : "no")};
}

// 9. Equally spaced lattice with the same exponent: no branch, no plateau.
Outcome equally_spaced() {
  const ControlReport r = equally_spaced_control(256, 0.74);
  const ControlVariant& v = r.open;
  const double dev = std::abs(v.c_bar_t0 - v.c_de);
  return {!v.branch.detected && dev <= 0.05,
          "open chain: branch=" + std::string(v.branch.detected ? "yes" : "no") + ", |C(T0) - DE| = " + g(dev) +
              " (bound 0.05); ring: branch=" + (r.ring.branch.detected ? "yes" : "no") +
              ", |C(T0) - DE| = " + g(std::abs(r.ring.c_bar_t0 - r.ring.c_de))};
}

// 10. PDE at T0 and DE at the thermal readout reproduce the site profiles.
Outcome ensembles_agree() {
  const Pipeline p = preset_pipeline("fig2b");
  const EnsemblePrediction pde = partial_diagonal_ensemble(p.spectrum, p.psi0, kT0);
  const EnsemblePrediction de = diagonal_ensemble(p.spectrum, p.psi0);
  const double t_th = thermal_readout_time(p.spectrum);
  const double d0 = (sigma_z_bar(p.spectrum, p.psi0, kT0) - pde.sigma_z).cwiseAbs().maxCoeff();
  const double d1 = (sigma_z_bar(p.spectrum, p.psi0, t_th) - de.sigma_z).cwiseAbs().maxCoeff();
  return {d0 <= 0.05 && d1 <= 0.05, "max |sz(T0) - PDE| = " + g(d0) + ", max |sz(thermal) - DE| = " + g(d1)};
}

// 11. Independent propagators agree.
Outcome oracle_equivalence() {
  const Pipeline p = preset_pipeline("fig2b");
  const QuenchState a = evolve(p.spectrum, p.psi0, kT0);
  const QuenchState b = integrate_schrodinger(p.hamiltonian, p.psi0, kT0, 1e-12);
  const double d_int = (a.amplitudes - b.amplitudes).cwiseAbs().maxCoeff();
  std::string d = "spectral vs integrator " + g(d_int) + " (bound 1e-8)";
  bool ok = d_int <= 1e-8;
  for (const char* name : {"fig2a", "fig2b"}) {
    TrapConfig c = preset(name).trap;
    c.n_ions = 8;
    const double dev = ising_xy_deviation(run_pipeline(c).coupling.j, 50.0, linear_time_grid(kT0, 21));
    d += std::string("; Ising vs XY, ") + name + "-style N=8: " + g(dev) + " (bound 0.05)";
    ok = ok && dev <= 0.05;
  }
  return {ok, d};
}

// 12. Conservation laws and quadrature agreement.
Outcome conservation() {
  double norm = 0.0, energy = 0.0;
  std::vector<Pipeline> ps{preset_pipeline("fig2a"), preset_pipeline("fig2b"), preset_pipeline("fig5c"),
                           pipeline_from_coupling(build_synthetic_coupling(64, 0.0))};
  for (const Pipeline& p : ps) {
    const double e0 = energy_expectation(p.hamiltonian, p.psi0);
    const double scale = std::max(std::abs(e0), p.spectrum.width());
    for (double t : {0.1, 1.0, 10.0, 1e3, 1e5}) {
      const QuenchState s = evolve(p.spectrum, p.psi0, t);
      norm = std::max(norm, std::abs(s.norm2() - 1.0));
      energy = std::max(energy, std::abs(energy_expectation(p.hamiltonian, s) - e0) / scale);
    }
  }
  const Pipeline& b = ps[1];
  double acc = 0.0;
  const int points = 10001;
  for (int k = 0; k < points; ++k) {
    const double w = (k == 0 || k == points - 1) ? 0.5 : 1.0;
    acc += w * c_expectation(evolve(b.spectrum, b.psi0, kT0 * k / (points - 1)));
  }
  const double quad = std::abs(c_bar(b.spectrum, b.psi0, kT0) - acc / (points - 1));
  return {norm <= 1e-12 && energy <= 1e-10 && quad <= 1e-4,
          "norm drift " + g(norm) + " (1e-12), energy drift " + g(energy) + " (1e-10), closed form vs quadrature " +
              g(quad) + " (1e-4)"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "uniform closed form", 1.0, uniform_closed_form},
      {2, "initial-state contract", 1.0, initial_state},
      {3, "fitted exponents", 1.0, fitted_exponents},
      {4, "prethermal plateau", 10.0, prethermal_plateau},
      {5, "short-range single-stage relaxation", 10.0, single_stage},
      {6, "dynamical transition N=16", 120.0, transition_n16},
      {7, "sharpening with N", 1800.0, sharpening},
      {8, "spectral branch N=256", 300.0, spectral_branch},
      {9, "equally spaced control", 300.0, equally_spaced},
      {10, "PDE/DE agreement", 10.0, ensembles_agree},
      {11, "oracle equivalence", 60.0, oracle_equivalence},
      {12, "conservation suite", 60.0, conservation},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = o.pass && in_budget;
    if (!pass) ++failed;
    std::printf("criterion %2d %s  %s: %s [%.2f s, budget %.0f s%s]\n", c.id, pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs, c.budget_s, in_budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
