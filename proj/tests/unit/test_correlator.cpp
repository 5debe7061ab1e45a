#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qdiff/catalog.hpp"
#include "qdiff/correlator.hpp"
#include "qdiff/numeric.hpp"
#include "qdiff/states.hpp"
#include "support/dense_oracle.hpp"

using namespace qdiff;
using correlator::AssemblyFault;
using correlator::MatrixElementTable;
using correlator::PhaseAverageSpec;
using fock::Complex;
using fock::LadderOp;
using fock::Mode;
using states::StateKind;
using states::StateSpec;

namespace {

double max_entry_diff(const MatrixElementTable& a, const MatrixElementTable& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.entries[i] - b.entries[i]));
  return d;
}

// Field operator E+(u) = (e^{-iu} a_k + e^{iu} a_k') / sqrt(2) as a dense matrix.
Eigen::MatrixXcd field(int n_max, double u) {
  return (std::polar(1.0, -u) * dense::ladder_matrix(n_max, LadderOp::annihilate(Mode::K)) +
          std::polar(1.0, u) * dense::ladder_matrix(n_max, LadderOp::annihilate(Mode::KPrime))) /
         std::sqrt(2.0);
}

double dense_p1(const fock::TwoModeState& s, double u1, double u2) {
  const auto psi = dense::to_vector(s);
  const int n = s.basis().n_max();
  const Eigen::VectorXcd v1 = field(n, u1) * psi;
  const Eigen::VectorXcd v2 = field(n, u2) * psi;
  return v1.dot(v2).real();
}

double dense_p2(const fock::TwoModeState& s, double u1, double u2) {
  const auto psi = dense::to_vector(s);
  const int n = s.basis().n_max();
  const Eigen::VectorXcd v = field(n, u2) * (field(n, u1) * psi);
  return v.squaredNorm();
}

std::vector<StateSpec> pure_states() {
  auto noon = StateSpec::substate(StateKind::Noon, 2);
  noon.phases = {0.9};
  auto coh = StateSpec::collective(StateKind::CollectiveCoherent, 0.8);
  coh.phases = {0.3, -0.5};
  return {StateSpec::substate(StateKind::CoherentSubstate, 3), StateSpec::substate(StateKind::NumberState, 4),
          noon, StateSpec::substate(StateKind::Noon, 1), coh};
}

std::vector<StateSpec> catalog_states() {
  std::vector<StateSpec> out;
  for (double n : {0.5, 1.0, 2.0, 4.0}) {
    out.push_back(StateSpec::collective(StateKind::CollectiveCoherent, n));
    out.push_back(StateSpec::collective(StateKind::PhaseDiffused, n));
  }
  for (int N : {2, 3, 4, 6}) {
    out.push_back(StateSpec::substate(StateKind::CoherentSubstate, N));
    out.push_back(StateSpec::substate(StateKind::PhaseDiffusedSubstate, N));
    out.push_back(StateSpec::substate(StateKind::ChaoticSubstate, N));
    out.push_back(StateSpec::substate(StateKind::Noon, N));
    if (N % 2 == 0) out.push_back(StateSpec::substate(StateKind::NumberState, N));
  }
  out.push_back(StateSpec::collective(StateKind::Chaotic, 0.5));
  out.push_back(StateSpec::collective(StateKind::Chaotic, 1.0));
  return out;
}

}  // namespace

TEST(MatrixElements, EngineMatchesCatalog) {
  for (const auto& spec : catalog_states()) {
    for (int order : {1, 2}) {
      const auto engine = correlator::matrix_elements(spec, order);
      const auto exact = pattern::catalog_elements(spec, order);
      const double scale = std::max(1.0, std::abs(exact.entries[0]));
      EXPECT_LT(max_entry_diff(engine, exact), 1e-9 * scale)
          << states::describe(spec) << " order " << order << " via " << engine.averaging;
    }
  }
}

TEST(MatrixElements, SymmetriesHold) {
  for (const auto& spec : catalog_states()) {
    for (int order : {1, 2}) {
      EXPECT_NO_THROW(correlator::assert_symmetries(correlator::matrix_elements(spec, order)));
    }
  }
}

TEST(MatrixElements, SymmetryViolationDetected) {
  auto t = pattern::catalog_elements(StateSpec::substate(StateKind::NumberState, 2), 2);
  t.entries[fock::second_index(Mode::K, Mode::KPrime, Mode::K, Mode::KPrime)] += 0.5;
  EXPECT_THROW(correlator::assert_symmetries(t), std::logic_error);
}

TEST(MatrixElements, QuadratureExactAtBound) {
  const auto spec = StateSpec::substate(StateKind::PhaseDiffusedSubstate, 4);
  const auto basis = states::auto_basis(spec);
  const int k = correlator::minimum_quadrature_nodes(spec, basis);
  EXPECT_EQ(k, 10);
  const auto exact = pattern::catalog_elements(spec, 2);
  for (int nodes : {k, k + 1, 3 * k}) {
    const auto t = correlator::matrix_elements(spec, basis, 2, PhaseAverageSpec::quadrature(nodes));
    EXPECT_LT(max_entry_diff(t, exact), 1e-13) << nodes;
  }
  EXPECT_THROW(correlator::matrix_elements(spec, basis, 2, PhaseAverageSpec::quadrature(k - 1)),
               std::invalid_argument);
}

TEST(MatrixElements, AveragingValidation) {
  const auto dif = StateSpec::collective(StateKind::PhaseDiffused, 1.0);
  const auto cha = StateSpec::collective(StateKind::Chaotic, 1.0);
  const auto coh = StateSpec::collective(StateKind::CollectiveCoherent, 1.0);
  EXPECT_THROW(correlator::matrix_elements(dif, 1, PhaseAverageSpec::none()), std::invalid_argument);
  EXPECT_THROW(correlator::matrix_elements(cha, 1, PhaseAverageSpec::none()), std::invalid_argument);
  EXPECT_THROW(correlator::matrix_elements(cha, 1, PhaseAverageSpec::quadrature(100)), std::invalid_argument);
  EXPECT_THROW(correlator::matrix_elements(coh, 1, PhaseAverageSpec::monte_carlo(100, 1)), std::invalid_argument);
  EXPECT_THROW(correlator::matrix_elements(dif, 1, PhaseAverageSpec::pairing()), std::invalid_argument);
  EXPECT_THROW(correlator::matrix_elements(coh, 3), std::invalid_argument);
}

TEST(MatrixElements, MonteCarloWithinStatisticalError) {
  const auto spec = StateSpec::collective(StateKind::Chaotic, 1.0, 1e-13);
  const auto exact = pattern::catalog_elements(spec, 2);
  const auto t = correlator::matrix_elements(spec, 2, PhaseAverageSpec::monte_carlo(4000, 17));
  EXPECT_FALSE(t.exact());
  EXPECT_EQ(t.evaluations, 4000);
  int outside = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Complex se = t.stderr_of(i);
    const Complex d = t.entries[i] - exact.entries[i];
    // Phase-independent entries have no sampling error, only truncation.
    if (std::fabs(d.real()) > 4.0 * se.real() + 1e-9) ++outside;
    if (std::fabs(d.imag()) > 4.0 * se.imag() + 1e-9) ++outside;
  }
  EXPECT_EQ(outside, 0);
}

TEST(MatrixElements, MonteCarloErrorShrinks) {
  const auto spec = StateSpec::substate(StateKind::ChaoticSubstate, 4);
  const auto exact = pattern::catalog_elements(spec, 2);
  const std::size_t e = fock::second_index(Mode::K, Mode::KPrime, Mode::K, Mode::KPrime);
  double previous = 1e300;
  for (int samples : {1000, 10000, 100000}) {
    const auto t = correlator::matrix_elements(spec, 2, PhaseAverageSpec::monte_carlo(samples, 5));
    const double se = t.stderr_of(e).real();
    EXPECT_LT(se, previous);
    EXPECT_LT(std::fabs((t.entries[e] - exact.entries[e]).real()), 4.0 * se + 1e-12);
    previous = se;
  }
}

TEST(MatrixElements, MonteCarloIsDeterministic) {
  const auto spec = StateSpec::substate(StateKind::ChaoticSubstate, 3);
  const auto a = correlator::matrix_elements(spec, 2, PhaseAverageSpec::monte_carlo(500, 99));
  const auto b = correlator::matrix_elements(spec, 2, PhaseAverageSpec::monte_carlo(500, 99));
  const auto c = correlator::matrix_elements(spec, 2, PhaseAverageSpec::monte_carlo(500, 100));
  EXPECT_EQ(a.entries, b.entries);
  EXPECT_NE(a.entries, c.entries);
}

TEST(Detection, PointSourceMatchesDenseFieldOperators) {
  const double us[] = {-2.1, -0.4, 0.0, 0.7, 1.9};
  for (const auto& spec : pure_states()) {
    const auto s = states::build_state(spec);
    const auto t1 = correlator::matrix_elements(spec, 1);
    const auto t2 = correlator::matrix_elements(spec, 2);
    for (double u1 : us)
      for (double u2 : us) {
        EXPECT_NEAR(correlator::p1(t1, u1, u2), dense_p1(s, u1, u2), 1e-12) << states::describe(spec);
        EXPECT_NEAR(correlator::p2(t2, u1, u2), dense_p2(s, u1, u2), 1e-12) << states::describe(spec);
      }
  }
}

TEST(Detection, Examples) {
  const auto coh2 = correlator::matrix_elements(StateSpec::substate(StateKind::CoherentSubstate, 2), 1);
  EXPECT_NEAR(correlator::p1(coh2, 0.0, 0.0), 2.0, 1e-15);
  EXPECT_NEAR(correlator::p1(coh2, kPi / 2, kPi / 2), 0.0, 1e-15);
  const auto num2 = correlator::matrix_elements(StateSpec::substate(StateKind::NumberState, 2), 2);
  EXPECT_NEAR(correlator::p2(num2, 0.0, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(correlator::p2(num2, 0.0, kPi / 2), 0.0, 1e-15);
  const auto noon = correlator::matrix_elements(StateSpec::substate(StateKind::Noon, 2), 2);
  EXPECT_NEAR(correlator::p2(noon, 0.0, 0.0), 1.0, 1e-15);
}

TEST(Detection, SwapFaultChangesResult) {
  // Coherent light is blind to this fault: all its entries share one value.
  const auto t = correlator::matrix_elements(StateSpec::collective(StateKind::PhaseDiffused, 1.0), 2);
  double worst = 0.0;
  for (double u1 : {0.3, 1.1})
    for (double u2 : {-0.8, 2.0}) {
      worst = std::max(worst, std::fabs(correlator::p2(t, u1, u2) - correlator::p2(t, u1, u2, AssemblyFault::SwapBC)));
    }
  EXPECT_GT(worst, 1e-3);
}

TEST(Detection, GroupsSumToProbability) {
  const auto t = correlator::matrix_elements(StateSpec::substate(StateKind::CoherentSubstate, 4), 2);
  const auto g = correlator::second_order_groups(t, 0.4, -1.3);
  EXPECT_NEAR(0.25 * (g.a + g.b + g.c + g.d).real(), correlator::p2(t, 0.4, -1.3), 1e-13);
  EXPECT_THROW(correlator::p1(t, 0.0, 0.0), std::invalid_argument);
}

TEST(Identity, HoldsForCoherentFamily) {
  for (double n : {0.5, 1.0, 2.0}) {
    const auto r = correlator::interference_identity_check(StateSpec::collective(StateKind::CollectiveCoherent, n));
    EXPECT_TRUE(r.holds(1e-9)) << n << " residual " << r.residual << " squared " << r.squared_residual;
  }
  for (int N : {2, 3, 4}) {
    const auto r = correlator::interference_identity_check(StateSpec::substate(StateKind::CoherentSubstate, N));
    EXPECT_TRUE(r.holds(1e-9)) << N;
  }
}

TEST(Identity, FailsForChaoticLight) {
  const auto r = correlator::interference_identity_check(StateSpec::collective(StateKind::Chaotic, 1.0));
  EXPECT_LT(r.max_interference, 1e-12);
  EXPECT_GT(r.max_bound, 0.1);
  EXPECT_FALSE(r.holds(1e-9));
}
