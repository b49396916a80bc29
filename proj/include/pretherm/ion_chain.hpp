#pragma once

// Equilibrium positions and transverse normal modes of a linear Coulomb
// crystal in a harmonic trap.
//
// Positions are in units of the axial length scale l = (e^2 / 4 pi eps0 m wz^2)^(1/3),
// so the force balance on ion m reads
//
//     u_m - sum_{n<m} (u_m - u_n)^-2 + sum_{n>m} (u_m - u_n)^-2 = 0 .
//
// The transverse Hessian (units of wz^2) is
//
//     K_ii = (wx/wz)^2 - sum_{n != i} |u_i - u_n|^-3,   K_ij = |u_i - u_j|^-3 .

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "pretherm/errors.hpp"

namespace pretherm {

/// Physical inputs. Frequencies in MHz, drive in kHz, j0 in Hz.
struct TrapConfig {
  int n_ions = 16;
  double omega_x_mhz = 5.0;
  double omega_z_mhz = 0.6;
  double mu_mhz = 5.02;
  double drive_khz = 3.9;  // eta_x * Omega
  double j0_hz = 20.0;

  void validate() const {
    if (n_ions < 2) throw ConfigError("n_ions must be >= 2");
    if (!(omega_z_mhz > 0.0)) throw ConfigError("omega_z_mhz must be > 0");
    if (!(omega_x_mhz > omega_z_mhz))
      throw ConfigError("omega_x_mhz must exceed omega_z_mhz (linear-chain regime)");
    if (!(mu_mhz > 0.0)) throw ConfigError("mu_mhz must be > 0");
    if (!(drive_khz > 0.0)) throw ConfigError("drive_khz must be > 0");
    if (!(j0_hz > 0.0)) throw ConfigError("j0_hz must be > 0");
  }

  bool operator==(const TrapConfig&) const = default;
};

struct IonChain {
  std::vector<double> positions;  // ascending, dimensionless
  double residual = 0.0;          // max |force|
  int iterations = 0;

  int size() const { return static_cast<int>(positions.size()); }
};

struct PhononSpectrum {
  Eigen::VectorXd frequencies;      // MHz, descending; frequencies(0) is the COM mode
  Eigen::MatrixXd mode_vectors;     // b(i, m), columns orthonormal
  Eigen::VectorXd lamb_dicke_scale; // sqrt(wx / w_m): eta(i, m) = eta_x * scale(m) * b(i, m)

  int size() const { return static_cast<int>(frequencies.size()); }
};

namespace detail {

using ExtVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using ExtMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

template <class Vec>
Vec chain_forces(const Vec& u) {
  const Eigen::Index n = u.size();
  Vec f(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    long double s = u(m);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == m) continue;
      const long double d = static_cast<long double>(u(m)) - u(k);
      s -= (d > 0 ? 1.0L : -1.0L) / (d * d);
    }
    f(m) = static_cast<typename Vec::Scalar>(s);
  }
  return f;
}

inline ExtMatrix chain_jacobian(const ExtVector& u) {
  const Eigen::Index n = u.size();
  ExtMatrix jac = ExtMatrix::Zero(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    long double diag = 1.0L;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == m) continue;
      const long double d = std::abs(u(m) - u(k));
      const long double c = 2.0L / (d * d * d);
      jac(m, k) = -c;
      diag += c;
    }
    jac(m, m) = diag;
  }
  return jac;
}

// Project onto the mirror-symmetric subspace u_i = -u_{N+1-i}.
template <class Vec>
void symmetrize(Vec& u) {
  const Eigen::Index n = u.size();
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    const auto a = (u(n - 1 - i) - u(i)) / 2;
    u(i) = -a;
    u(n - 1 - i) = a;
  }
  if (n % 2 == 1) u(n / 2) = 0;
}

template <class Vec>
bool strictly_increasing(const Vec& u) {
  for (Eigen::Index i = 1; i < u.size(); ++i)
    if (!(u(i) > u(i - 1))) return false;
  return true;
}

}  // namespace detail

/// Dimensionless potential energy sum u_i^2/2 + sum_{i<j} 1/|u_i - u_j|.
inline double chain_potential_energy(const std::vector<double>& u) {
  double e = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    e += 0.5 * u[i] * u[i];
    for (std::size_t j = i + 1; j < u.size(); ++j) e += 1.0 / std::abs(u[i] - u[j]);
  }
  return e;
}

/// Max |force| evaluated at the given double positions. For long chains this
/// exceeds the solver residual by the rounding of the positions themselves.
inline double chain_force_residual(const std::vector<double>& u) {
  const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
  return detail::chain_forces(v).cwiseAbs().maxCoeff();
}

/// Damped Newton iteration from a uniform grid; throws SolverFailure when the
/// residual does not reach `tolerance` within `max_iterations`. The iteration
/// runs in extended precision and `residual` is measured there; positions are
/// then rounded to double.
inline IonChain solve_equilibrium(int n_ions, double tolerance = 1e-12, int max_iterations = 200) {
  if (n_ions < 2) throw ArgumentError("solve_equilibrium: n_ions must be >= 2");
  using detail::ExtVector;
  const long double s = 2.0L * std::pow(1.0L / n_ions, 0.56L);
  ExtVector u = ExtVector::LinSpaced(n_ions, -0.5L * n_ions * s, 0.5L * n_ions * s);
  detail::symmetrize(u);

  ExtVector f = detail::chain_forces(u);
  long double res = f.cwiseAbs().maxCoeff();
  int it = 0;
  while (res > tolerance && it < max_iterations) {
    ++it;
    const ExtVector step = detail::chain_jacobian(u).ldlt().solve(-f);
    long double lambda = 1.0L;
    ExtVector trial;
    long double trial_res = res;
    for (int halvings = 0; halvings < 40; ++halvings) {
      trial = u + lambda * step;
      detail::symmetrize(trial);
      if (detail::strictly_increasing(trial)) {
        trial_res = detail::chain_forces(trial).cwiseAbs().maxCoeff();
        if (trial_res < res || halvings == 39) break;
      }
      lambda /= 2;
    }
    if (!(trial_res < res)) break;  // no progress; rounding floor reached
    u = trial;
    f = detail::chain_forces(u);
    res = f.cwiseAbs().maxCoeff();
  }
  if (!(res <= tolerance)) {
    std::ostringstream msg;
    msg << "equilibrium solver did not converge for N=" << n_ions << " after " << it
        << " iterations (residual " << static_cast<double>(res) << ")";
    throw SolverFailure(msg.str(), static_cast<double>(res));
  }
  IonChain chain;
  chain.positions.resize(static_cast<std::size_t>(n_ions));
  for (int i = 0; i < n_ions; ++i) chain.positions[static_cast<std::size_t>(i)] = static_cast<double>(u(i));
  chain.residual = static_cast<double>(res);
  chain.iterations = it;
  return chain;
}

inline IonChain solve_equilibrium(const TrapConfig& config) {
  config.validate();
  return solve_equilibrium(config.n_ions);
}

/// Transverse Hessian in units of omega_z^2.
inline Eigen::MatrixXd transverse_hessian(const IonChain& chain, double omega_x, double omega_z) {
  const int n = chain.size();
  const double beta2 = (omega_x / omega_z) * (omega_x / omega_z);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = 1.0 / std::pow(std::abs(chain.positions[i] - chain.positions[j]), 3);
      k(i, j) = c;
      s += c;
    }
    k(i, i) = beta2 - s;
  }
  return k;
}

inline PhononSpectrum transverse_modes(const IonChain& chain, const TrapConfig& config) {
  config.validate();
  if (chain.size() != config.n_ions)
    throw ArgumentError("transverse_modes: chain size does not match n_ions");
  const int n = chain.size();
  const Eigen::MatrixXd k = transverse_hessian(chain, config.omega_x_mhz, config.omega_z_mhz);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  if (es.info() != Eigen::Success) throw NumericalError("transverse Hessian eigensolver failed");

  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0.0)) {
    std::ostringstream msg;
    msg << "zigzag instability: transverse Hessian eigenvalue " << lmin
        << " <= 0 (omega_x/omega_z = " << config.omega_x_mhz / config.omega_z_mhz << ", N=" << n << ")";
    throw ZigzagInstability(msg.str(), lmin);
  }

  PhononSpectrum ps;
  ps.frequencies.resize(n);
  ps.mode_vectors.resize(n, n);
  ps.lamb_dicke_scale.resize(n);
  for (int m = 0; m < n; ++m) {
    const int src = n - 1 - m;  // descending
    ps.frequencies(m) = config.omega_z_mhz * std::sqrt(es.eigenvalues()(src));
    Eigen::VectorXd v = es.eigenvectors().col(src);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0) v = -v;
    ps.mode_vectors.col(m) = v;
    ps.lamb_dicke_scale(m) = std::sqrt(config.omega_x_mhz / ps.frequencies(m));
  }
  return ps;
}

/// omega_z scaled as sqrt(ln N)/N relative to a reference chain length.
inline double scaled_omega_z(int n_ions, int reference_n, double reference_omega_z) {
  if (n_ions < 2 || reference_n < 2) throw ArgumentError("scaled_omega_z: chain lengths must be >= 2");
  auto g = [](int n) { return std::sqrt(std::log(static_cast<double>(n))) / n; };
  return reference_omega_z * g(n_ions) / g(reference_n);
}

}  // namespace pretherm
