#include <gtest/gtest.h>

#include <cmath>

#include "pretherm/experiments.hpp"
#include "pretherm/oracle.hpp"
#include "pretherm/validation.hpp"

using namespace pretherm;

namespace {

const TrapConfig kFig2a{16, 5.0, 0.1, 5.2, 40.0, 20.0};
const TrapConfig kFig2b{16, 5.0, 0.6, 5.02, 3.9, 20.0};

Pipeline small(TrapConfig c, int n) {
  c.n_ions = n;
  return run_pipeline(c);
}

}  // namespace

TEST(Integrator, MatchesSpectralEvolution) {
  const Pipeline p = run_pipeline(kFig2b);
  for (double t : {0.5, 10.0}) {
    const QuenchState a = integrate_schrodinger(p.hamiltonian, p.psi0, t, 1e-12);
    const QuenchState b = evolve(p.spectrum, p.psi0, t);
    EXPECT_LE((a.amplitudes - b.amplitudes).cwiseAbs().maxCoeff(), 1e-8) << "t=" << t;
    EXPECT_LE(std::abs(a.norm2() - 1.0), 1e-9);
  }
}

TEST(Integrator, ZeroSpanIsIdentity) {
  const Pipeline p = small(kFig2b, 6);
  IntegratorStats st;
  const QuenchState a = integrate_schrodinger(p.hamiltonian, p.psi0, 0.0, 1e-10, &st);
  EXPECT_EQ(a.amplitudes, p.psi0.amplitudes);
  EXPECT_EQ(st.accepted, 0);
}

TEST(Integrator, SemigroupProperty) {
  const Pipeline p = small(kFig2b, 8);
  const QuenchState whole = integrate_schrodinger(p.hamiltonian, p.psi0, 3.0);
  const QuenchState half = integrate_schrodinger(p.hamiltonian, integrate_schrodinger(p.hamiltonian, p.psi0, 1.2), 1.8);
  EXPECT_LE((whole.amplitudes - half.amplitudes).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_DOUBLE_EQ(half.time, 3.0);
}

TEST(Integrator, ToleranceAndDimensionErrors) {
  const Pipeline p = small(kFig2b, 4);
  EXPECT_THROW(integrate_schrodinger(p.hamiltonian, p.psi0, 1.0, 1e-13), ArgumentError);
  EXPECT_THROW(integrate_schrodinger(p.hamiltonian, p.psi0, 1.0, 1e-5), ArgumentError);
  EXPECT_THROW(integrate_schrodinger(p.hamiltonian, quench_initial_state(5), 1.0), ArgumentError);
}

TEST(Integrator, StiffSystemRaisesStiffnessError) {
  double step = 0.0;
  auto rhs = [](const Eigen::VectorXcd& y) -> Eigen::VectorXcd { return -1e20 * y; };
  EXPECT_THROW(dormand_prince(rhs, Eigen::VectorXcd::Ones(2), 1.0, 1e-12, step), StiffnessError);
  EXPECT_THROW(dormand_prince(rhs, Eigen::VectorXcd::Ones(2), -1.0, 1e-12, step), ArgumentError);
}

TEST(FullIsing, TwoSpinFlipFlop) {
  Eigen::MatrixXd j(2, 2);
  j << 0, 0.7, 0.7, 0;
  for (double b : {0.0, 3.0}) {
    const FullIsingModel m(j, b);
    const auto obs = m.evolve({true, false}, {0.4, 1.3, 2.9});
    for (const auto& o : obs) {
      EXPECT_NEAR(o.sigma_z(0), std::cos(2 * 0.7 * o.time), 1e-8) << "B=" << b;
      EXPECT_NEAR(o.sigma_z(1), -std::cos(2 * 0.7 * o.time), 1e-8) << "B=" << b;
      EXPECT_NEAR(o.norm2, 1.0, 1e-9);
    }
  }
}

TEST(FullIsing, ApplyMatchesDenseMatrix) {
  const Pipeline p = small(kFig2b, 4);
  const FullIsingModel m(p.coupling.j, 2.5);
  Eigen::MatrixXd sx(2, 2), sz(2, 2), id = Eigen::MatrixXd::Identity(2, 2);
  sx << 0, 1, 1, 0;
  sz << -1, 0, 0, 1;  // basis order (down, up), matching bit value 0/1
  auto kron_site = [&](const Eigen::MatrixXd& op, int site) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
    for (int k = 3; k >= 0; --k) {
      const Eigen::MatrixXd f = k == site ? op : id;
      Eigen::MatrixXd next(out.rows() * 2, out.cols() * 2);
      for (int a = 0; a < out.rows(); ++a)
        for (int b = 0; b < out.cols(); ++b) next.block(2 * a, 2 * b, 2, 2) = out(a, b) * f;
      out = next;
    }
    return out;
  };
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(16, 16);
  for (int i = 0; i < 4; ++i) {
    h += 2.5 * kron_site(sz, i);
    for (int k = i + 1; k < 4; ++k) h += p.coupling.j(i, k) * kron_site(sx, i) * kron_site(sx, k);
  }
  h -= 2.5 * (2 - 4) * Eigen::MatrixXd::Identity(16, 16);
  Eigen::VectorXcd v(16);
  for (int s = 0; s < 16; ++s) v(s) = cplx(std::sin(1.0 + s), std::cos(0.3 * s));
  EXPECT_LE((m.apply(v) - h.cast<cplx>() * v).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(FullIsing, ErrorPaths) {
  EXPECT_THROW(FullIsingModel(Eigen::MatrixXd::Zero(13, 13), 1.0), SizeError);
  EXPECT_THROW(FullIsingModel(Eigen::MatrixXd::Zero(4, 4), -1.0), ArgumentError);
  const FullIsingModel m(Eigen::MatrixXd::Zero(3, 3), 1.0);
  EXPECT_THROW(m.product_state({true, false}), ArgumentError);
  EXPECT_THROW(m.evolve({true, false, false}, {1.0, 0.5}), ArgumentError);
}

TEST(FullIsing, LargeFieldReducesToXyChain) {
  const Pipeline p = small(kFig2a, 8);
  const double dev = ising_xy_deviation(p.coupling.j, 50.0, linear_time_grid(kT0, 21));
  RecordProperty("deviation", std::to_string(dev));
  EXPECT_LE(dev, 0.05);
}

TEST(FullIsing, WeakFieldBreaksTheXyLimit) {
  const Pipeline p = small(kFig2a, 8);
  EXPECT_GT(ising_xy_deviation(p.coupling.j, 2.0, linear_time_grid(kT0, 21)), 0.05);
}

TEST(FullIsing, ExcitationNumberApproximatelyConservedAtLargeField) {
  const Pipeline p = small(kFig2a, 8);
  const double b = 50.0 * p.coupling.j.cwiseAbs().maxCoeff();
  const auto obs = FullIsingModel(p.coupling.j, b).evolve(quench_configuration(8), linear_time_grid(5.0, 11));
  for (const auto& o : obs) {
    EXPECT_NEAR(o.excitation, 1.0, 0.01) << "t=" << o.time;
    EXPECT_NEAR(o.norm2, 1.0, 1e-8);
  }
  const auto weak = FullIsingModel(p.coupling.j, 0.0).evolve(quench_configuration(8), {5.0});
  EXPECT_GT(std::abs(weak.front().excitation - 1.0), 0.01);
}

TEST(FullIsing, SingleTimeWrapper) {
  const Pipeline p = small(kFig2a, 6);
  const double b = 50.0 * p.coupling.j.cwiseAbs().maxCoeff();
  const auto a = full_ising_evolve(p.coupling, b, quench_configuration(6), 2.0);
  const auto c = FullIsingModel(p.coupling.j, b).evolve(quench_configuration(6), {2.0}).front();
  EXPECT_LE((a.sigma_z - c.sigma_z).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(quench_configuration(3), (std::vector<bool>{true, false, false}));
}
