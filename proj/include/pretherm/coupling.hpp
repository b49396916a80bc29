#pragma once

// Spin-spin coupling matrices: phonon-mediated (physical), synthetic power
// law, and the power-law exponent fit used to label interaction range.

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "pretherm/errors.hpp"
#include "pretherm/ion_chain.hpp"

namespace pretherm {

enum class CouplingSource { physical, synthetic_power_law, uniform };

inline const char* source_name(CouplingSource s) {
  switch (s) {
    case CouplingSource::physical: return "physical";
    case CouplingSource::synthetic_power_law: return "synthetic-power-law";
    case CouplingSource::uniform: return "uniform";
  }
  return "unknown";
}

struct PowerLawFit {
  double alpha = 0.0;
  double amplitude = 0.0;          // J(d) ~ amplitude * d^-alpha
  double relative_residual = 0.0;  // sqrt(sum r^2 / sum J^2)
  double alpha_loglog = 0.0;       // log-space OLS slope, reported for comparison
  int points = 0;
};

struct CouplingMatrix {
  Eigen::MatrixXd j;  // symmetric, zero diagonal
  CouplingSource source = CouplingSource::physical;
  std::optional<PowerLawFit> fit;  // absent for N < 3
  double j0 = 0.0;                 // sum_{i != j} J_ij / N^2

  int size() const { return static_cast<int>(j.rows()); }
  double alpha_fit() const {
    if (!fit) throw FitError("no power-law fit available (N < 3)");
    return fit->alpha;
  }
};

inline double average_coupling(const Eigen::MatrixXd& j) {
  const double n = static_cast<double>(j.rows());
  return (j.sum() - j.trace()) / (n * n);
}

namespace detail {

struct FitPoints {
  std::vector<double> sep;
  std::vector<double> val;
};

inline FitPoints collect_fit_points(const Eigen::MatrixXd& j) {
  const int n = static_cast<int>(j.rows());
  double jmax = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) jmax = std::max(jmax, std::abs(j(a, b)));
  FitPoints p;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const double v = std::abs(j(a, b));
      if (v == 0.0 || v < 1e-12 * jmax) continue;
      p.sep.push_back(static_cast<double>(b - a));
      p.val.push_back(v);
    }
  return p;
}

}  // namespace detail

/// Log-space ordinary least squares through (log|i-j|, log|J_ij|).
inline double fit_power_law_loglog(const Eigen::MatrixXd& j, double* residual_ss = nullptr) {
  const auto p = detail::collect_fit_points(j);
  const std::size_t m = p.sep.size();
  double sx = 0, sy = 0;
  for (std::size_t k = 0; k < m; ++k) {
    sx += std::log(p.sep[k]);
    sy += std::log(p.val[k]);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double dx = std::log(p.sep[k]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(p.val[k]) - my);
  }
  if (m < 2 || !(sxx > 0.0)) throw FitError("degenerate power-law fit: fewer than two distinct separations");
  const double slope = sxy / sxx;
  if (residual_ss) {
    double ss = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const double r = std::log(p.val[k]) - (my + slope * (std::log(p.sep[k]) - mx));
      ss += r * r;
    }
    *residual_ss = ss;
  }
  return -slope;
}

/// Least-squares fit of |J_ij| ~ A |i-j|^-alpha over all pairs i<j, in linear
/// space. The amplitude is eliminated in closed form, leaving a 1-D profile in
/// alpha that is scanned on a grid and refined with Brent's method.
inline PowerLawFit fit_power_law(const Eigen::MatrixXd& j) {
  if (j.rows() < 3) throw FitError("fit_power_law requires N >= 3");
  const auto p = detail::collect_fit_points(j);
  PowerLawFit out;
  double loglog_ss = 0.0;
  out.alpha_loglog = fit_power_law_loglog(j, &loglog_ss);
  out.points = static_cast<int>(p.sep.size());

  double vv = 0;
  for (double v : p.val) vv += v * v;

  auto profile = [&](double alpha, double* amp) {
    double vp = 0, pp = 0;
    for (std::size_t k = 0; k < p.sep.size(); ++k) {
      const double w = std::pow(p.sep[k], -alpha);
      vp += p.val[k] * w;
      pp += w * w;
    }
    if (amp) *amp = vp / pp;
    return vv - vp * vp / pp;
  };

  // Exact power law: log-log points collinear, both criteria share the optimum.
  if (loglog_ss <= 1e-26 * static_cast<double>(p.sep.size())) {
    out.alpha = out.alpha_loglog;
    if (std::abs(out.alpha) < 1e-14) out.alpha = 0.0;
  } else {
    constexpr double lo = -2.0, hi = 8.0, step = 0.01;
    const int n_grid = static_cast<int>(std::lround((hi - lo) / step));
    int best = 0;
    double best_r = std::numeric_limits<double>::infinity();
    for (int g = 0; g <= n_grid; ++g) {
      const double r = profile(lo + g * step, nullptr);
      if (r < best_r) {
        best_r = r;
        best = g;
      }
    }
    const double a = lo + std::max(best - 1, 0) * step;
    const double b = lo + std::min(best + 1, n_grid) * step;
    const auto res = boost::math::tools::brent_find_minima(
        [&](double x) { return profile(x, nullptr); }, a, b, std::numeric_limits<double>::digits / 2 + 8);
    out.alpha = res.first;
  }
  const double r = profile(out.alpha, &out.amplitude);
  out.relative_residual = vv > 0 ? std::sqrt(std::max(r, 0.0) / vv) : 0.0;
  return out;
}

inline PowerLawFit fit_power_law(const CouplingMatrix& c) { return fit_power_law(c.j); }

/// Rescale so that sum_{i != j} J_ij / N^2 equals `target`; the fit is unchanged.
inline CouplingMatrix normalize_to_j0(const CouplingMatrix& c, double target) {
  const double j0 = average_coupling(c.j);
  const double scale_ref = c.j.cwiseAbs().maxCoeff();
  if (!(std::abs(j0) > 1e-14 * scale_ref))
    throw NormalizationError("cannot normalize coupling with zero average");
  CouplingMatrix out = c;
  out.j *= target / j0;
  out.j0 = target;
  if (out.fit) out.fit->amplitude *= target / j0;
  return out;
}

/// Phonon-mediated coupling J_ij = (eta_x Omega)^2 wx sum_m b_im b_jm / (mu^2 - w_m^2),
/// rescaled to config.j0_hz.
inline CouplingMatrix build_physical_coupling(const PhononSpectrum& modes, const TrapConfig& config) {
  config.validate();
  const int n = modes.size();
  if (n != config.n_ions) throw ArgumentError("build_physical_coupling: mode count does not match n_ions");
  constexpr double min_detuning = 1e-6;
  double closest = std::numeric_limits<double>::infinity();
  for (int m = 0; m < n; ++m) closest = std::min(closest, std::abs(config.mu_mhz - modes.frequencies(m)));
  if (closest < min_detuning) {
    std::ostringstream msg;
    msg << "beatnote mu=" << config.mu_mhz << " MHz within " << closest << " MHz of a transverse mode";
    throw BeatnoteResonance(msg.str(), closest);
  }
  Eigen::VectorXd weight(n);
  for (int m = 0; m < n; ++m) {
    const double wm = modes.frequencies(m);
    weight(m) = 1.0 / (config.mu_mhz * config.mu_mhz - wm * wm);
  }
  const double prefactor = config.drive_khz * config.drive_khz * config.omega_x_mhz;
  CouplingMatrix c;
  c.source = CouplingSource::physical;
  c.j = prefactor * modes.mode_vectors * weight.asDiagonal() * modes.mode_vectors.transpose();
  c.j.diagonal().setZero();
  c.j = (0.5 * (c.j + c.j.transpose())).eval();
  c.j0 = average_coupling(c.j);
  if (n >= 3) c.fit = fit_power_law(c.j);
  return normalize_to_j0(c, config.j0_hz);
}

/// J_ij proportional to d_ij^-alpha on an equally spaced lattice, normalized to j0 = 1.
/// d_ij = |i-j| (open) or min(|i-j|, n-|i-j|) (periodic ring).
inline CouplingMatrix build_synthetic_coupling(int n, double alpha, bool periodic = false) {
  if (n < 2) throw ArgumentError("build_synthetic_coupling: n must be >= 2");
  if (!(alpha >= 0.0)) throw ArgumentError("build_synthetic_coupling: alpha must be >= 0");
  CouplingMatrix c;
  c.source = alpha == 0.0 ? CouplingSource::uniform : CouplingSource::synthetic_power_law;
  c.j = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      int d = std::abs(a - b);
      if (periodic) d = std::min(d, n - d);
      c.j(a, b) = alpha == 0.0 ? 1.0 : std::pow(static_cast<double>(d), -alpha);
    }
  c.j0 = average_coupling(c.j);
  if (n >= 3) c.fit = fit_power_law(c.j);
  return normalize_to_j0(c, 1.0);
}

}  // namespace pretherm
