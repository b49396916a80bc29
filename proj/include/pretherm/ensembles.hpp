#pragma once

// Diagonal and partial-diagonal ensemble predictions, and the structure of
// eigenenergy differences that separates prethermal from thermal time scales.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "pretherm/dynamics.hpp"
#include "pretherm/errors.hpp"

namespace pretherm {

enum class EnsembleKind { diagonal, partial_diagonal };

struct EnsemblePrediction {
  EnsembleKind kind = EnsembleKind::diagonal;
  Eigen::VectorXd occupations;  // predicted p_i
  Eigen::VectorXd sigma_z;      // 2 p_i - 1
  double c_value = 0.0;
  std::vector<std::pair<int, int>> retained_pairs;  // (m, n), m < n, off-diagonal rho_mn kept
};

/// Default degeneracy tolerance: 1e-12 of the spectral width.
inline double default_degeneracy_tol(const SpectralDecomposition& spec) {
  return 1e-12 * std::max(spec.width(), std::numeric_limits<double>::min());
}

namespace detail {

template <class Keep>
EnsemblePrediction ensemble_from_mask(EnsembleKind kind, const SpectralDecomposition& spec, const QuenchState& psi0,
                                      Keep&& keep) {
  EnsemblePrediction out;
  out.kind = kind;
  const int n = spec.size();
  for (int m = 0; m < n; ++m)
    for (int k = m + 1; k < n; ++k)
      if (keep(std::abs(spec.energies(m) - spec.energies(k)))) out.retained_pairs.emplace_back(m, k);
  out.occupations = kernel_occupations(spec, psi0, [&](double de) { return keep(std::abs(de)) ? 1.0 : 0.0; });
  out.sigma_z = (2.0 * out.occupations.array() - 1.0).matrix();
  out.c_value = c_from_occupations(out.occupations);
  return out;
}

}  // namespace detail

/// Infinite-time average. Off-diagonal terms between levels closer than
/// `degeneracy_tol` are kept; pass a negative value for the default.
inline EnsemblePrediction diagonal_ensemble(const SpectralDecomposition& spec, const QuenchState& psi0,
                                            double degeneracy_tol = -1.0) {
  const double tol = degeneracy_tol < 0 ? default_degeneracy_tol(spec) : degeneracy_tol;
  return detail::ensemble_from_mask(EnsembleKind::diagonal, spec, psi0, [tol](double gap) { return gap <= tol; });
}

/// Keeps rho_mn(0), frozen at t = 0, for every pair with |E_m - E_n| < kappa / t0.
inline EnsemblePrediction partial_diagonal_ensemble(const SpectralDecomposition& spec, const QuenchState& psi0,
                                                    double t0, double kappa = 0.1) {
  if (!(t0 > 0)) throw ArgumentError("partial_diagonal_ensemble: t0 must be > 0");
  if (!(kappa > 0 && kappa <= 1.0)) throw ArgumentError("partial_diagonal_ensemble: kappa must lie in (0, 1]");
  const double cut = kappa / t0;
  return detail::ensemble_from_mask(EnsembleKind::partial_diagonal, spec, psi0,
                                    [cut](double gap) { return gap < cut; });
}

struct GapStructure {
  int n = 0;
  std::vector<double> all_gaps;   // |E_m - E_n| for m < n, row-major order
  std::vector<double> pair_gaps;  // E_2k - E_2k-1, k = 1..floor(N/2)
  double mean_spacing = 0.0;
  double min_spacing = 0.0;       // smallest nearest-neighbour gap above the degeneracy floor
  double degeneracy_floor = 0.0;  // gaps at or below this are exact degeneracies
};

inline GapStructure gap_structure(const Eigen::VectorXd& energies_in, double degeneracy_tol = -1.0) {
  const int n = static_cast<int>(energies_in.size());
  if (n < 2) throw ArgumentError("gap_structure: need N >= 2");
  std::vector<double> e(energies_in.data(), energies_in.data() + n);
  std::sort(e.begin(), e.end());
  GapStructure g;
  g.n = n;
  const double width = e.back() - e.front();
  g.degeneracy_floor = degeneracy_tol < 0 ? 1e-12 * width : degeneracy_tol;
  g.all_gaps.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int m = 0; m < n; ++m)
    for (int k = m + 1; k < n; ++k) g.all_gaps.push_back(std::abs(e[k] - e[m]));
  for (int k = 1; 2 * k <= n; ++k) g.pair_gaps.push_back(e[2 * k - 1] - e[2 * k - 2]);
  g.mean_spacing = width / (n - 1);
  g.min_spacing = 0.0;
  for (int k = 1; k < n; ++k) {
    const double s = e[k] - e[k - 1];
    if (s > g.degeneracy_floor && (g.min_spacing == 0.0 || s < g.min_spacing)) g.min_spacing = s;
  }
  return g;
}

inline GapStructure gap_structure(const SpectralDecomposition& spec) { return gap_structure(spec.energies); }

struct BranchReport {
  bool detected = false;
  std::vector<double> branch_gaps;  // gaps below the window, ascending
  double window_low = 0.0;          // top of the branch
  double window_high = 0.0;         // window_low * 10^separation_decades
  int stragglers = 0;               // gaps inside the window
  int gaps_considered = 0;          // nonzero gaps examined
};

/// Searches the sorted log10 gaps (exact degeneracies excluded) for a window
/// of `separation_decades` that sits directly above at least floor(N/4) gaps
/// and holds at most floor(straggler_fraction * below) gaps of its own.
/// Among qualifying splits the one with the fewest stragglers wins, ties going
/// to the larger branch.
inline BranchReport branch_detector(const GapStructure& gaps, double separation_decades = 2.0,
                                    double straggler_fraction = 0.05) {
  if (!(separation_decades > 0)) throw ArgumentError("branch_detector: separation_decades must be > 0");
  if (!(straggler_fraction >= 0)) throw ArgumentError("branch_detector: straggler_fraction must be >= 0");
  std::vector<double> raw;
  raw.reserve(gaps.all_gaps.size());
  for (double g : gaps.all_gaps)
    if (g > gaps.degeneracy_floor) raw.push_back(g);
  std::sort(raw.begin(), raw.end());
  std::vector<double> lg(raw.size());
  std::transform(raw.begin(), raw.end(), lg.begin(), [](double g) { return std::log10(g); });

  BranchReport rep;
  rep.gaps_considered = static_cast<int>(lg.size());
  const std::size_t min_below = static_cast<std::size_t>(std::max(gaps.n / 4, 1));
  const std::size_t m = lg.size();
  int best_s = std::numeric_limits<int>::max();
  std::size_t best_k = 0;
  for (std::size_t k = min_below; k < m; ++k) {
    const double top = lg[k - 1];
    const auto end = std::lower_bound(lg.begin() + static_cast<std::ptrdiff_t>(k), lg.end(), top + separation_decades);
    const std::size_t inside = static_cast<std::size_t>(end - (lg.begin() + static_cast<std::ptrdiff_t>(k)));
    if (inside + k >= m) continue;  // nothing above the window
    const int allowed = static_cast<int>(std::floor(straggler_fraction * static_cast<double>(k)));
    const int s = static_cast<int>(inside);
    if (s <= allowed && s <= best_s) {
      best_s = s;
      best_k = k;
    }
  }
  if (best_k > 0) {
    rep.detected = true;
    rep.stragglers = best_s;
    rep.window_low = raw[best_k - 1];
    rep.window_high = rep.window_low * std::pow(10.0, separation_decades);
    rep.branch_gaps.assign(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(best_k));
  }
  return rep;
}

struct Timescales {
  double prethermal_time = 0.0;  // 1 / mean spacing
  double thermal_time = 0.0;     // 1 / min spacing (infinite when every spacing is degenerate)
};

inline Timescales timescale_estimates(const GapStructure& gaps) {
  Timescales t;
  t.prethermal_time = gaps.mean_spacing > 0 ? 1.0 / gaps.mean_spacing : std::numeric_limits<double>::infinity();
  t.thermal_time = gaps.min_spacing > 0 ? 1.0 / gaps.min_spacing : std::numeric_limits<double>::infinity();
  return t;
}

}  // namespace pretherm
