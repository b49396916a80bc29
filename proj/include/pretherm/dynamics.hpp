#pragma once

// Quench dynamics of the XY chain in the single-excitation sector.
//
// Energies are in units of J0 and times in units of 1/J0 whenever the
// coupling has been normalized to j0 = 1. The uniform field term is a
// constant inside the sector and is not represented.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "pretherm/coupling.hpp"
#include "pretherm/errors.hpp"

namespace pretherm {

using cplx = std::complex<double>;

struct SingleExcitationHamiltonian {
  Eigen::MatrixXd h;  // h_ij = 2 J_ij, zero diagonal
  int size() const { return static_cast<int>(h.rows()); }
};

struct SpectralDecomposition {
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXd vectors;   // column m is eigenvector m
  int size() const { return static_cast<int>(energies.size()); }
  double width() const { return energies.size() ? energies(energies.size() - 1) - energies(0) : 0.0; }
};

struct QuenchState {
  Eigen::VectorXcd amplitudes;
  double time = 0.0;

  int size() const { return static_cast<int>(amplitudes.size()); }
  Eigen::VectorXd probabilities() const { return amplitudes.cwiseAbs2(); }
  double norm2() const { return amplitudes.squaredNorm(); }
};

inline SingleExcitationHamiltonian build_hamiltonian(const Eigen::MatrixXd& j) {
  if (j.rows() != j.cols()) throw ArgumentError("build_hamiltonian: coupling must be square");
  SingleExcitationHamiltonian out{2.0 * j};
  out.h.diagonal().setZero();
  return out;
}

inline SingleExcitationHamiltonian build_hamiltonian(const CouplingMatrix& c) { return build_hamiltonian(c.j); }

/// Full eigensystem, ascending energies; each eigenvector's largest-magnitude
/// component is made positive.
inline SpectralDecomposition decompose(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols() || h.rows() == 0) throw ArgumentError("decompose: matrix must be square and non-empty");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "symmetric eigensolver did not converge (N=" << h.rows() << ", info=" << static_cast<int>(es.info()) << ")";
    throw NumericalError(msg.str());
  }
  SpectralDecomposition s{es.eigenvalues(), es.eigenvectors()};
  for (Eigen::Index m = 0; m < s.vectors.cols(); ++m) {
    Eigen::Index imax = 0;
    s.vectors.col(m).cwiseAbs().maxCoeff(&imax);
    if (s.vectors(imax, m) < 0) s.vectors.col(m) *= -1.0;
  }
  return s;
}

inline SpectralDecomposition decompose(const SingleExcitationHamiltonian& h) { return decompose(h.h); }

/// The quench state: every spin down except `flipped_site` (0-based).
inline QuenchState quench_initial_state(int n, int flipped_site = 0) {
  if (flipped_site < 0 || flipped_site >= n) throw ArgumentError("quench_initial_state: site out of range");
  QuenchState s;
  s.amplitudes = Eigen::VectorXcd::Zero(n);
  s.amplitudes(flipped_site) = 1.0;
  return s;
}

/// Site-reversed copy i -> N-1-i.
inline QuenchState mirror(const QuenchState& s) {
  QuenchState out = s;
  out.amplitudes = s.amplitudes.reverse();
  return out;
}

/// Energy-basis coefficients c_m = <m|psi>.
inline Eigen::VectorXcd energy_coefficients(const SpectralDecomposition& spec, const QuenchState& psi) {
  return spec.vectors.transpose() * psi.amplitudes;
}

/// psi(t) = V exp(+i E t) V^T psi(0).
inline QuenchState evolve(const SpectralDecomposition& spec, const QuenchState& psi0, double t) {
  if (psi0.size() != spec.size()) throw ArgumentError("evolve: state dimension mismatch");
  if (t == 0.0) return psi0;
  Eigen::VectorXcd c = energy_coefficients(spec, psi0);
  for (Eigen::Index m = 0; m < c.size(); ++m) c(m) *= std::polar(1.0, spec.energies(m) * t);
  QuenchState out;
  out.amplitudes = spec.vectors * c;
  out.time = psi0.time + t;
  return out;
}

inline double energy_expectation(const SingleExcitationHamiltonian& h, const QuenchState& s) {
  return (s.amplitudes.adjoint() * h.h * s.amplitudes)(0, 0).real();
}

inline Eigen::VectorXd sigma_z_profile(const QuenchState& s) {
  return (2.0 * s.probabilities().array() - 1.0).matrix();
}

/// <sz_i sz_j> = 1 - 2(p_i + p_j), exact in the single-excitation sector.
inline double zz_correlation(const QuenchState& s, int i, int j) {
  if (i == j) throw ArgumentError("zz_correlation: sites must differ");
  if (i < 0 || j < 0 || i >= s.size() || j >= s.size()) throw ArgumentError("zz_correlation: site out of range");
  return 1.0 - 2.0 * (std::norm(s.amplitudes(i)) + std::norm(s.amplitudes(j)));
}

/// Position weights f_i = (2i - N - 1)/(N - 1) for 1-based i: -1 at the left edge, +1 at the right.
inline Eigen::VectorXd c_weights(int n) {
  if (n < 2) throw ArgumentError("c_weights: n must be >= 2");
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f(i) = (2.0 * (i + 1) - n - 1) / (n - 1);
  return f;
}

inline double c_expectation(const QuenchState& s) { return c_weights(s.size()).dot(s.probabilities()); }

inline double c_from_occupations(const Eigen::VectorXd& p) { return c_weights(static_cast<int>(p.size())).dot(p); }

// ---------------------------------------------------------------------------
// Energy-basis bilinear forms
//
//   <A> = sum_{mn} rho_mn(0) A_nm K(E_m - E_n)
//
// with rho_mn(0) = c_m conj(c_n). K = exp(i dE t) gives the instantaneous
// value, sinc(dE t) the running time average, and indicator kernels give the
// (partial) diagonal ensembles.
// ---------------------------------------------------------------------------

inline double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

template <class Kernel>
Eigen::MatrixXcd kernel_density(const SpectralDecomposition& spec, const Eigen::VectorXcd& c, Kernel&& kernel) {
  const Eigen::Index n = c.size();
  Eigen::MatrixXcd rho(n, n);
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k)
      rho(m, k) = c(m) * std::conj(c(k)) * cplx(kernel(spec.energies(m) - spec.energies(k)));
  return rho;
}

/// General operator in the site basis.
template <class Kernel>
cplx bilinear_expectation(const SpectralDecomposition& spec, const QuenchState& psi0, const Eigen::MatrixXcd& a_site,
                          Kernel&& kernel) {
  const Eigen::MatrixXcd rho = kernel_density(spec, energy_coefficients(spec, psi0), kernel);
  const Eigen::MatrixXcd v = spec.vectors.cast<cplx>();
  const Eigen::MatrixXcd a_energy = v.transpose() * a_site * v;
  return (rho.array() * a_energy.transpose().array()).sum();
}

/// Site occupations p_i under a kernel; site-diagonal specialization of bilinear_expectation.
template <class Kernel>
Eigen::VectorXd kernel_occupations(const SpectralDecomposition& spec, const QuenchState& psi0, Kernel&& kernel) {
  if (psi0.size() != spec.size()) throw ArgumentError("state dimension mismatch");
  const Eigen::MatrixXcd rho = kernel_density(spec, energy_coefficients(spec, psi0), kernel);
  const Eigen::MatrixXcd vr = spec.vectors.cast<cplx>() * rho;
  Eigen::VectorXd p(spec.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = (vr.row(i).transpose().array() * spec.vectors.row(i).transpose().array()).sum().real();
  return p;
}

/// Running time average of the occupations, (1/t) int_0^t p_i(tau) dtau, in closed form.
inline Eigen::VectorXd time_averaged_occupations(const SpectralDecomposition& spec, const QuenchState& psi0, double t) {
  if (!(t > 0.0)) throw ArgumentError("time average requires t > 0");
  return kernel_occupations(spec, psi0, [t](double de) { return sinc(de * t); });
}

/// Time average of the site-diagonal observable sum_i w_i n_i.
inline double time_average(const SpectralDecomposition& spec, const QuenchState& psi0, const Eigen::VectorXd& w,
                           double t) {
  if (w.size() != spec.size()) throw ArgumentError("time_average: weight dimension mismatch");
  return w.dot(time_averaged_occupations(spec, psi0, t));
}

inline double c_bar(const SpectralDecomposition& spec, const QuenchState& psi0, double t) {
  return time_average(spec, psi0, c_weights(spec.size()), t);
}

inline Eigen::VectorXd sigma_z_bar(const SpectralDecomposition& spec, const QuenchState& psi0, double t) {
  return (2.0 * time_averaged_occupations(spec, psi0, t).array() - 1.0).matrix();
}

/// Time-averaged <sz_i sz_j>; linear in the occupations, so it follows from the averaged p.
inline double zz_bar(const Eigen::VectorXd& p_bar, int i, int j) {
  if (i == j) throw ArgumentError("zz_bar: sites must differ");
  return 1.0 - 2.0 * (p_bar(i) + p_bar(j));
}

// ---------------------------------------------------------------------------
// Time grids
// ---------------------------------------------------------------------------

inline std::vector<double> linear_time_grid(double t_max, int points) {
  if (points < 2 || !(t_max > 0)) throw ArgumentError("linear_time_grid: need t_max > 0 and >= 2 points");
  std::vector<double> g(points);
  for (int k = 0; k < points; ++k) g[k] = t_max * k / (points - 1);
  return g;
}

/// Logarithmic grid from t_min to t_max with the given density per decade.
inline std::vector<double> log_time_grid(double t_min, double t_max, int points_per_decade = 200) {
  if (!(t_min > 0) || !(t_max > t_min) || points_per_decade < 1) throw ArgumentError("log_time_grid: bad range");
  const double decades = std::log10(t_max / t_min);
  const int n = static_cast<int>(std::ceil(decades * points_per_decade)) + 1;
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = t_min * std::pow(10.0, decades * k / (n - 1));
  g.back() = t_max;
  return g;
}

}  // namespace pretherm
