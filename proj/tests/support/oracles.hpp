#pragma once

// Reference implementations used only by the tests. Each is written
// independently of the library code it checks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

struct Eigenpairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns
};

/// Cyclic Jacobi rotations for a real symmetric matrix.
inline Eigenpairs jacobi(Eigen::MatrixXd a, double tol = 1e-15, int max_sweeps = 100) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * std::max(1.0, a.norm())) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  std::vector<int> idx(n);
  for (int k = 0; k < n; ++k) idx[k] = k;
  std::sort(idx.begin(), idx.end(), [&](int x, int y) { return a(x, x) < a(y, y); });
  Eigenpairs out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (int k = 0; k < n; ++k) {
    out.values(k) = a(idx[k], idx[k]);
    out.vectors.col(k) = v.col(idx[k]);
  }
  return out;
}

/// Eigenvalues by shifted QR iteration with deflation; QR by modified Gram-Schmidt.
inline Eigen::VectorXd qr_eigenvalues(Eigen::MatrixXd a, int max_iter = 10000) {
  int n = static_cast<int>(a.rows());
  std::vector<double> found;
  while (n > 1) {
    int it = 0;
    while (std::abs(a(n - 1, n - 2)) > 1e-15 * (std::abs(a(n - 1, n - 1)) + std::abs(a(n - 2, n - 2))) &&
           it++ < max_iter) {
      // Wilkinson shift from the trailing 2x2 block.
      const double d = 0.5 * (a(n - 2, n - 2) - a(n - 1, n - 1));
      const double b2 = a(n - 1, n - 2) * a(n - 1, n - 2);
      const double mu = a(n - 1, n - 1) - b2 / (d + (d >= 0 ? 1.0 : -1.0) * std::sqrt(d * d + b2));
      Eigen::MatrixXd m = a.topLeftCorner(n, n) - mu * Eigen::MatrixXd::Identity(n, n);
      Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n), r = Eigen::MatrixXd::Zero(n, n);
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd w = m.col(j);
        for (int i = 0; i < j; ++i) {
          r(i, j) = q.col(i).dot(w);
          w -= r(i, j) * q.col(i);
        }
        r(j, j) = w.norm();
        q.col(j) = r(j, j) > 0 ? Eigen::VectorXd(w / r(j, j)) : Eigen::VectorXd::Zero(n);
      }
      a.topLeftCorner(n, n) = r * q + mu * Eigen::MatrixXd::Identity(n, n);
    }
    found.push_back(a(n - 1, n - 1));
    --n;
  }
  found.push_back(a(0, 0));
  std::sort(found.begin(), found.end());
  return Eigen::Map<Eigen::VectorXd>(found.data(), static_cast<Eigen::Index>(found.size()));
}

/// Dimensionless trap + Coulomb energy.
inline double chain_energy(const std::vector<double>& u) {
  double e = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    e += 0.5 * u[i] * u[i];
    for (std::size_t j = 0; j < i; ++j) e += 1.0 / std::abs(u[i] - u[j]);
  }
  return e;
}

/// Gauss-Seidel relaxation: each sweep minimizes the chain energy along one
/// coordinate at a time with a safeguarded 1D Newton step.
inline std::vector<double> relax_chain(int n, int max_sweeps = 200000, double gtol = 1e-13) {
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = (i - 0.5 * (n - 1)) * 1.0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double gmax = 0.0;
    for (int i = 0; i < n; ++i) {
      double g = u[i], h = 1.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d = u[i] - u[j];
        g -= (d > 0 ? 1.0 : -1.0) / (d * d);
        h += 2.0 / std::abs(d * d * d);
      }
      gmax = std::max(gmax, std::abs(g));
      double step = g / h;
      const double lo = i > 0 ? u[i - 1] : -1e300, hi = i + 1 < n ? u[i + 1] : 1e300;
      while (u[i] - step <= lo || u[i] - step >= hi) step *= 0.5;
      u[i] -= step;
    }
    if (gmax < gtol) break;
  }
  return u;
}

/// Fixed-step classical Runge-Kutta for i dpsi/dt = -h psi.
inline Eigen::VectorXcd rk4_schrodinger(const Eigen::MatrixXd& h, Eigen::VectorXcd psi, double t, int steps) {
  const std::complex<double> iu(0.0, 1.0);
  const Eigen::MatrixXcd a = iu * h.cast<std::complex<double>>();
  const double dt = t / steps;
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXcd k1 = a * psi;
    const Eigen::VectorXcd k2 = a * (psi + 0.5 * dt * k1);
    const Eigen::VectorXcd k3 = a * (psi + 0.5 * dt * k2);
    const Eigen::VectorXcd k4 = a * (psi + dt * k3);
    psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return psi;
}

/// Composite trapezoid rule on [0, t] with `points` nodes, divided by t.
inline double trapezoid_average(const std::function<double(double)>& f, double t, int points) {
  double acc = 0.0;
  for (int k = 0; k < points; ++k) {
    const double w = (k == 0 || k == points - 1) ? 0.5 : 1.0;
    acc += w * f(t * k / (points - 1));
  }
  return acc / (points - 1);
}

/// <sz_i sz_j> of a single-excitation state embedded in the 2^N basis,
/// by explicit enumeration of basis states.
inline double full_space_zz(const Eigen::VectorXcd& amplitudes, int i, int j) {
  const int n = static_cast<int>(amplitudes.size());
  double acc = 0.0;
  for (long s = 0; s < (1L << n); ++s) {
    if (__builtin_popcountl(s) != 1) continue;
    int site = 0;
    while (!((s >> site) & 1)) ++site;
    const double p = std::norm(amplitudes(site));
    const double zi = ((s >> i) & 1) ? 1.0 : -1.0;
    const double zj = ((s >> j) & 1) ? 1.0 : -1.0;
    acc += p * zi * zj;
  }
  return acc;
}

}  // namespace oracle
