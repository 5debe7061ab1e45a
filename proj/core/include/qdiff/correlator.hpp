#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qdiff/fock.hpp"
#include "qdiff/states.hpp"

namespace qdiff::correlator {

using fock::Complex;
using fock::Mode;

inline constexpr int kDefaultMonteCarloSamples = 20000;
inline constexpr double kImagTolerance = 1e-10;

// Order 1: entries[first_index(X, Y)] = <a_X^dag a_Y>.
// Order 2: entries[second_index(X, Y, Z, W)] = <a_X^dag a_Y^dag a_Z a_W>.
// Monte Carlo tables carry the covariance of the estimated means over the
// real/imaginary parts (Re e0, Im e0, Re e1, ...); exact tables leave it empty.
struct MatrixElementTable {
  int order = 1;
  std::vector<Complex> entries;
  std::vector<double> covariance;
  std::string averaging = "none";
  int evaluations = 1;

  std::size_t size() const noexcept { return entries.size(); }
  bool exact() const noexcept { return covariance.empty(); }
  Complex at(Mode x, Mode y) const;
  Complex at(Mode x, Mode y, Mode z, Mode w) const;
  // Standard error of the real and imaginary parts of entry i.
  Complex stderr_of(std::size_t i) const;
};

MatrixElementTable make_table(int order, std::span<const Complex> entries);

// Throws std::logic_error when a symmetry of the normally ordered moments is
// broken beyond `tol` times the largest entry.
void assert_symmetries(const MatrixElementTable& table, double tol = 1e-12);

struct PhaseAverageSpec {
  enum class Method { None, PeriodicQuadrature, MonteCarlo, Pairing };

  Method method = Method::None;
  int nodes = 0;
  int samples = 0;
  std::uint64_t seed = 0;

  static PhaseAverageSpec none() { return {}; }
  static PhaseAverageSpec quadrature(int nodes) { return {Method::PeriodicQuadrature, nodes, 0, 0}; }
  static PhaseAverageSpec monte_carlo(int samples, std::uint64_t seed) {
    return {Method::MonteCarlo, 0, samples, seed};
  }
  // Keeps only contributions whose Fock-term phases cancel identically.
  static PhaseAverageSpec pairing() { return {Method::Pairing, 0, 0, 0}; }

  std::string describe() const;
};

// Smallest node count for which periodic quadrature is exact.
int minimum_quadrature_nodes(const states::StateSpec& spec, const fock::FockBasis& basis);
PhaseAverageSpec default_average(const states::StateSpec& spec, const fock::FockBasis& basis);
PhaseAverageSpec default_average(const states::StateSpec& spec);

MatrixElementTable matrix_elements(const states::StateSpec& spec, const fock::FockBasis& basis, int order,
                                   const PhaseAverageSpec& avg);
MatrixElementTable matrix_elements(const states::StateSpec& spec, int order, const PhaseAverageSpec& avg);
// Uses default_average(spec) and the automatic basis.
MatrixElementTable matrix_elements(const states::StateSpec& spec, int order);

// Test hook: deliberately mis-assembles the B and C operator groups.
enum class AssemblyFault { None, SwapBC };

// Coefficients w such that P = Re sum_e w_e M_e (point source).
std::array<Complex, 4> p1_weights(double u1, double u2);

// Raw group coefficients (A, B, C, D) of the second-order operator; the
// detection probability is one quarter of their sum.
struct GroupWeights {
  std::array<Complex, 16> a{}, b{}, c{}, d{};
};
GroupWeights p2_group_weights(double u1, double u2, AssemblyFault fault = AssemblyFault::None);

Complex contract(const MatrixElementTable& table, std::span<const Complex> w);
// Standard error of Re contract(table, w); zero for exact tables.
double contract_stderr(const MatrixElementTable& table, std::span<const Complex> w);
// Returns the real part after checking the imaginary residue.
double checked_real(const MatrixElementTable& table, std::span<const Complex> w);

double p1(const MatrixElementTable& table, double u1, double u2);
double p2(const MatrixElementTable& table, double u1, double u2, AssemblyFault fault = AssemblyFault::None);

struct SecondOrderGroups {
  Complex a, b, c, d;
};
SecondOrderGroups second_order_groups(const MatrixElementTable& table, double u1, double u2);

struct IdentityReport {
  // max | |<C+D>| - 2 sqrt(<A><B>) | over grid points where <A> and <B> are
  // not within rounding of zero.
  double residual = 0.0;
  // max | |<C+D>|^2 - 4 <A><B> | / peak^2 over the whole grid.
  double squared_residual = 0.0;
  double max_interference = 0.0;  // max |<C+D>|
  double max_bound = 0.0;         // max 2 sqrt(<A><B>)
  int points = 0;

  bool holds(double tol) const noexcept { return residual < tol && squared_residual < tol; }
};

IdentityReport interference_identity_check(const states::StateSpec& spec, int grid_points = 61);
IdentityReport interference_identity_check(const MatrixElementTable& table, int grid_points = 61);

}  // namespace qdiff::correlator
