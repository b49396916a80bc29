#pragma once

// Self-check suite behind the `validate` subcommand: oracle comparisons and
// invariants evaluated on the built-in presets.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "pretherm/coupling.hpp"
#include "pretherm/dynamics.hpp"
#include "pretherm/ensembles.hpp"
#include "pretherm/experiments.hpp"
#include "pretherm/oracle.hpp"

namespace pretherm {

struct ValidationCheck {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool passed = false;
  std::string relation;  // "<=" or "in [lo, hi]"
};

namespace detail {

inline ValidationCheck at_most(std::string name, double value, double bound) {
  return {std::move(name), value, bound, value <= bound, "<="};
}

inline ValidationCheck within(std::string name, double value, double lo, double hi) {
  return {std::move(name), value, hi, value >= lo && value <= hi,
          "in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"};
}

/// Trapezoidal average of C(tau) over [0, t] on `points` nodes.
inline double c_bar_trapezoid(const SpectralDecomposition& spec, const QuenchState& psi0, double t, int points) {
  double acc = 0.0;
  for (int k = 0; k < points; ++k) {
    const double tau = t * k / (points - 1);
    const double w = (k == 0 || k == points - 1) ? 0.5 : 1.0;
    acc += w * c_expectation(evolve(spec, psi0, tau));
  }
  return acc / (points - 1);
}

}  // namespace detail

/// Largest per-site |sz_full - sz_xy| over `times` for the full Ising model at
/// B = b_ratio * max|J| against its rotating-wave single-excitation limit.
inline double ising_xy_deviation(const Eigen::MatrixXd& j, double b_ratio, const std::vector<double>& times) {
  const int n = static_cast<int>(j.rows());
  const double b = b_ratio * j.cwiseAbs().maxCoeff();
  const auto full = FullIsingModel(j, b).evolve(quench_configuration(n), times);
  const SpectralDecomposition spec = decompose(rotating_wave_limit(j));
  const QuenchState psi0 = quench_initial_state(n);
  double worst = 0.0;
  for (const auto& o : full) {
    const Eigen::VectorXd sz = sigma_z_profile(evolve(spec, psi0, o.time));
    worst = std::max(worst, (o.sigma_z - sz).cwiseAbs().maxCoeff());
  }
  return worst;
}

inline std::vector<ValidationCheck> run_validation_suite() {
  using detail::at_most;
  using detail::within;
  std::vector<ValidationCheck> out;
  const TrapConfig fig2a{16, 5.0, 0.1, 5.2, 40.0, 20.0};
  const TrapConfig fig2b{16, 5.0, 0.6, 5.02, 3.9, 20.0};
  const Pipeline pa = run_pipeline(fig2a);
  const Pipeline pb = run_pipeline(fig2b);
  const int n = pb.size();

  out.push_back(at_most("equilibrium_force_residual", pb.chain.residual, 1e-12));
  out.push_back(at_most("initial_c_offset", std::abs(c_expectation(pb.psi0) + 1.0), 0.0));
  out.push_back(at_most("initial_sigma_z_sum_offset", std::abs(sigma_z_profile(pb.psi0).sum() - (2.0 - n)), 0.0));
  out.push_back(within("alpha_fig2a", pa.alpha(), 2.3, 2.9));
  out.push_back(within("alpha_fig2b", pb.alpha(), 0.37, 0.67));

  const Pipeline uni = pipeline_from_coupling(build_synthetic_coupling(16, 0.0));
  out.push_back(at_most("uniform_de_offset", std::abs(diagonal_ensemble(uni.spectrum, uni.psi0).c_value - (2.0 / 16 - 1.0)),
                        1e-9));

  const QuenchState spectral = evolve(pb.spectrum, pb.psi0, kT0);
  const QuenchState integrated = integrate_schrodinger(pb.hamiltonian, pb.psi0, kT0, 1e-12);
  out.push_back(at_most("spectral_vs_integrator", (spectral.amplitudes - integrated.amplitudes).cwiseAbs().maxCoeff(), 1e-8));

  double norm_drift = 0.0, energy_drift = 0.0;
  const double e0 = energy_expectation(pb.hamiltonian, pb.psi0);
  const double e_scale = std::max(std::abs(e0), pb.spectrum.width());
  for (double t : {1.0, 1e3, 1e5}) {
    const QuenchState s = evolve(pb.spectrum, pb.psi0, t);
    norm_drift = std::max(norm_drift, std::abs(s.norm2() - 1.0));
    energy_drift = std::max(energy_drift, std::abs(energy_expectation(pb.hamiltonian, s) - e0) / e_scale);
  }
  out.push_back(at_most("norm_drift", norm_drift, 1e-12));
  out.push_back(at_most("energy_drift_relative", energy_drift, 1e-10));

  out.push_back(at_most("time_average_vs_quadrature",
                        std::abs(c_bar(pb.spectrum, pb.psi0, kT0) - detail::c_bar_trapezoid(pb.spectrum, pb.psi0, kT0, 10001)),
                        1e-4));

  TrapConfig small = fig2a;
  small.n_ions = 8;
  const Pipeline ps = run_pipeline(small);
  out.push_back(at_most("ising_vs_xy_sigma_z", ising_xy_deviation(ps.coupling.j, 50.0, linear_time_grid(kT0, 21)), 0.05));
  return out;
}

}  // namespace pretherm
