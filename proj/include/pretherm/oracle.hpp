#pragma once

// Independent verification engines: an adaptive Dormand-Prince 5(4)
// integrator for the Schrodinger equation, and the full 2^N transverse-field
// Ising model whose rotating-wave limit is the XY chain.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <vector>

#include "pretherm/coupling.hpp"
#include "pretherm/dynamics.hpp"
#include "pretherm/errors.hpp"

namespace pretherm {

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  double last_step = 0.0;
};

/// Adaptive Dormand-Prince 5(4) for autonomous dy/dt = rhs(y) on complex vectors with
/// mixed absolute/relative error control. `step` is carried between calls so
/// a sequence of integrations over a time grid does not restart cold.
template <class Rhs>
Eigen::VectorXcd dormand_prince(Rhs&& rhs, Eigen::VectorXcd y, double t_span, double tol, double& step,
                                IntegratorStats* stats = nullptr) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (t_span == 0.0) return y;
  if (t_span < 0.0) throw ArgumentError("dormand_prince: negative time span");
  double t = 0.0;
  double h = step > 0 ? std::min(step, t_span) : std::min(t_span, 1e-3);
  Eigen::VectorXcd k1 = rhs(y);
  const double h_min = 1e-14 * std::max(1.0, t_span);
  while (t < t_span) {
    bool last = false;
    if (t + h >= t_span) {
      h = t_span - t;
      last = true;
    }
    const Eigen::VectorXcd k2 = rhs(y + h * (a21 * k1));
    const Eigen::VectorXcd k3 = rhs(y + h * (a31 * k1 + a32 * k2));
    const Eigen::VectorXcd k4 = rhs(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Eigen::VectorXcd k5 = rhs(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Eigen::VectorXcd k6 = rhs(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Eigen::VectorXcd y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Eigen::VectorXcd k7 = rhs(y_new);
    const Eigen::VectorXcd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double en = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = tol + tol * std::max(std::abs(y(i)), std::abs(y_new(i)));
      en = std::max(en, std::abs(err(i)) / sc);
    }
    if (en <= 1.0) {
      t = last ? t_span : t + h;
      y = y_new;
      k1 = k7;
      if (stats) ++stats->accepted;
      if (!last) step = h;
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      if (stats) ++stats->rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      if (h < h_min) {
        std::ostringstream msg;
        msg << "integrator step size underflow at t=" << t << " (h=" << h << ")";
        throw StiffnessError(msg.str());
      }
    }
  }
  if (stats) stats->last_step = step;
  return y;
}

/// i d(psi)/dt = -h psi, the equation whose solution is psi(t) = exp(+i h t) psi(0).
inline QuenchState integrate_schrodinger(const SingleExcitationHamiltonian& h, const QuenchState& psi0, double t,
                                         double tol = 1e-12, IntegratorStats* stats = nullptr) {
  if (!(tol >= 1e-12 && tol <= 1e-6)) throw ArgumentError("integrate_schrodinger: tol must lie in [1e-12, 1e-6]");
  if (psi0.size() != h.size()) throw ArgumentError("integrate_schrodinger: dimension mismatch");
  const Eigen::MatrixXcd hc = h.h.cast<cplx>();
  const cplx i_unit(0.0, 1.0);
  double step = 0.0;
  QuenchState out;
  out.amplitudes = dormand_prince([&](const Eigen::VectorXcd& y) -> Eigen::VectorXcd { return i_unit * (hc * y); },
                                  psi0.amplitudes, t, tol, step, stats);
  out.time = psi0.time + t;
  return out;
}

// ---------------------------------------------------------------------------
// Full transverse-field Ising model
//
//     H = sum_{i<j} J_ij sx_i sx_j + B sum_i sz_i
//
// on 2^N amplitudes; bit i of a basis index is 1 when spin i is up.
// ---------------------------------------------------------------------------

struct FullIsingObservables {
  double time = 0.0;
  Eigen::VectorXd sigma_z;
  double c_value = 0.0;
  double excitation = 0.0;  // sum_i (sz_i + 1)/2
  double norm2 = 0.0;
};

class FullIsingModel {
 public:
  static constexpr int max_sites = 12;

  FullIsingModel(const Eigen::MatrixXd& coupling, double b_field) : n_(static_cast<int>(coupling.rows())), b_(b_field) {
    if (n_ > max_sites) {
      std::ostringstream msg;
      msg << "full Ising oracle limited to N <= " << max_sites << " (got " << n_ << ")";
      throw SizeError(msg.str());
    }
    if (n_ < 2) throw ArgumentError("full Ising oracle needs N >= 2");
    if (!(b_field >= 0)) throw ArgumentError("full Ising oracle needs b_field >= 0");
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (coupling(i, j) != 0.0) bonds_.push_back({i, j, coupling(i, j)});
    const std::size_t dim = std::size_t{1} << n_;
    diag_.resize(static_cast<Eigen::Index>(dim));
    // Constant shift so the single-excitation sector sits near zero energy.
    const double shift = b_ * (2 - n_);
    for (std::size_t s = 0; s < dim; ++s) {
      const int up = std::popcount(static_cast<std::uint32_t>(s));
      diag_(static_cast<Eigen::Index>(s)) = b_ * (2 * up - n_) - shift;
    }
  }

  int size() const { return n_; }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& psi) const {
    Eigen::VectorXcd out = diag_.cast<cplx>().cwiseProduct(psi);
    const Eigen::Index dim = psi.size();
    for (const auto& b : bonds_) {
      const Eigen::Index mask = (Eigen::Index{1} << b.i) | (Eigen::Index{1} << b.j);
      for (Eigen::Index s = 0; s < dim; ++s) out(s) += b.j_ij * psi(s ^ mask);
    }
    return out;
  }

  Eigen::VectorXcd product_state(const std::vector<bool>& up) const {
    if (static_cast<int>(up.size()) != n_) throw ArgumentError("product_state: configuration length mismatch");
    Eigen::Index idx = 0;
    for (int i = 0; i < n_; ++i)
      if (up[i]) idx |= Eigen::Index{1} << i;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << n_);
    psi(idx) = 1.0;
    return psi;
  }

  FullIsingObservables observe(const Eigen::VectorXcd& psi, double t) const {
    FullIsingObservables o;
    o.time = t;
    o.sigma_z = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index s = 0; s < psi.size(); ++s) {
      const double p = std::norm(psi(s));
      o.norm2 += p;
      for (int i = 0; i < n_; ++i) o.sigma_z(i) += ((s >> i) & 1) ? p : -p;
    }
    o.excitation = ((o.sigma_z.array() + 1.0) * 0.5).sum();
    o.c_value = c_weights(n_).dot(((o.sigma_z.array() + 1.0) * 0.5).matrix());
    return o;
  }

  /// Evolves under exp(+i H t) (same convention as the XY propagator) and
  /// records observables at every requested time (ascending, >= 0).
  std::vector<FullIsingObservables> evolve(const std::vector<bool>& initial_up, const std::vector<double>& times,
                                           double tol = 1e-10, IntegratorStats* stats = nullptr) const {
    Eigen::VectorXcd psi = product_state(initial_up);
    const cplx i_unit(0.0, 1.0);
    auto rhs = [&](const Eigen::VectorXcd& y) -> Eigen::VectorXcd { return i_unit * apply(y); };
    std::vector<FullIsingObservables> out;
    out.reserve(times.size());
    double t = 0.0, step = 0.0;
    for (double target : times) {
      if (target < t) throw ArgumentError("full Ising evolve: times must be ascending and >= 0");
      psi = dormand_prince(rhs, psi, target - t, tol, step, stats);
      t = target;
      out.push_back(observe(psi, t));
    }
    return out;
  }

 private:
  struct Bond {
    int i, j;
    double j_ij;
  };
  int n_;
  double b_;
  std::vector<Bond> bonds_;
  Eigen::VectorXd diag_;
};

/// Single-time convenience wrapper.
inline FullIsingObservables full_ising_evolve(const CouplingMatrix& coupling, double b_field,
                                              const std::vector<bool>& initial_up, double t, double tol = 1e-10) {
  return FullIsingModel(coupling.j, b_field).evolve(initial_up, {t}, tol).front();
}

/// Single-excitation block of the rotating-wave limit of the Ising model.
/// sx_i sx_j contributes a flip-flop amplitude J_ij, so in the h = 2 J'
/// convention of build_hamiltonian this is the chain with J' = J / 2.
inline SingleExcitationHamiltonian rotating_wave_limit(const Eigen::MatrixXd& ising_coupling) {
  return build_hamiltonian(Eigen::MatrixXd(0.5 * ising_coupling));
}

/// Quench configuration |up down down ... down>.
inline std::vector<bool> quench_configuration(int n) {
  std::vector<bool> up(n, false);
  up[0] = true;
  return up;
}

}  // namespace pretherm
