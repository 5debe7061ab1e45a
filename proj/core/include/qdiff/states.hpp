#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdiff/fock.hpp"

namespace qdiff::states {

enum class StateKind {
  CollectiveCoherent,
  CoherentSubstate,
  PhaseDiffused,
  PhaseDiffusedSubstate,
  Chaotic,
  ChaoticSubstate,
  Noon,
  NumberState,
};

enum class Distribution { Poisson, BoseEinstein };

inline constexpr double kDefaultEpsilon = 1e-12;

// Phase conventions:
//  CollectiveCoherent    {} | {phi} (both modes) | {phi_k, phi_k'}
//  PhaseDiffused         {} | {phi}; mode k' carries the phase
//  PhaseDiffusedSubstate {} | {phi}
//  Chaotic               {} | one phase per basis ket (flat index)
//  ChaoticSubstate       {} | N phases for |m, N-m>, m = 0..N-1; |N,0> is fixed to 0
//  Noon                  {} | {phi} on |0,N>
//  CoherentSubstate, NumberState take no phases.
struct StateSpec {
  StateKind kind = StateKind::CollectiveCoherent;
  double mean_n = 0.0;   // collective kinds: mean photons per mode
  int n_photons = 0;     // substate kinds: total photon number N
  std::vector<double> phases;
  double epsilon = kDefaultEpsilon;  // tail-mass target for collective kinds

  static StateSpec collective(StateKind kind, double mean_n, double epsilon = kDefaultEpsilon);
  static StateSpec substate(StateKind kind, int n_photons);
};

bool is_collective(StateKind kind) noexcept;
// Kinds whose Fock terms carry independent random phases.
bool has_random_term_phases(StateKind kind) noexcept;
// Kinds that are only meaningful after averaging a single relative phase.
bool is_phase_diffused(StateKind kind) noexcept;
Distribution distribution_of(StateKind kind);

std::string_view kind_name(StateKind kind) noexcept;
std::optional<StateKind> parse_kind(std::string_view name) noexcept;
std::string describe(const StateSpec& spec);

void validate(const StateSpec& spec);

// Per-mode cutoff needed so that the single-mode tail mass is below epsilon/4.
int required_cutoff(const StateSpec& spec);
fock::FockBasis auto_basis(const StateSpec& spec, int cutoff_budget = fock::kDefaultCutoffBudget);

// Highest total photon number with non-zero amplitude in `basis`.
int max_total_photons(const StateSpec& spec, const fock::FockBasis& basis);

fock::TwoModeState build_state(const StateSpec& spec, const fock::FockBasis& basis);
fock::TwoModeState build_state(const StateSpec& spec);

// Number of explicit phase parameters a kind accepts on the given basis.
std::size_t term_phase_count(const StateSpec& spec, const fock::FockBasis& basis);

// |c_N|^2 for the two-mode total photon number N.
double log_weight(Distribution dist, double mean_n, int n_total);
double weight(Distribution dist, double mean_n, int n_total);
// Probability that the total photon number exceeds n_total.
double tail_mass(Distribution dist, double mean_n, int n_total);
// Smallest N_max whose tail mass is below `tail`.
int total_cutoff(Distribution dist, double mean_n, double tail);

struct CoefficientDistribution {
  Distribution kind;
  double mean_n;
  std::vector<double> weights;  // index N = 0..N_max
  double tail;                  // mass beyond N_max
};

CoefficientDistribution coefficient_distribution(Distribution dist, double mean_n, int n_total_max);

struct SumRuleReport {
  Distribution kind;
  double mean_n;
  int terms;
  double norm;           // sum |c_N|^2, expected 1
  double first_order_sum;   // sum (N/2) |c_N|^2, expected mean_n
  double second_order_sum;  // sum N(N-1)/4 |c_N|^2 (Poisson) or N(N-1)/6 |c_N|^2, expected mean_n^2
  double norm_residual;
  double first_residual;
  double second_residual;

  bool passed(double tol) const noexcept;
};

SumRuleReport check_sum_rules(Distribution dist, double mean_n, double epsilon);

struct SubstateRow {
  Distribution kind;
  double mean_n;
  int n_total;
  double weight;
};

std::vector<SubstateRow> substate_table(Distribution dist, std::span<const double> mean_ns, int n_total_max);

std::string_view distribution_name(Distribution dist) noexcept;

}  // namespace qdiff::states
