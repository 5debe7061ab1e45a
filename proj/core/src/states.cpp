#include "qdiff/states.hpp"

#include <algorithm>
#include <array>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qdiff/numeric.hpp"

namespace qdiff::states {

using fock::Complex;
using fock::FockBasis;
using fock::TwoModeState;

StateSpec StateSpec::collective(StateKind kind, double mean_n, double epsilon) {
  StateSpec s;
  s.kind = kind;
  s.mean_n = mean_n;
  s.epsilon = epsilon;
  return s;
}

StateSpec StateSpec::substate(StateKind kind, int n_photons) {
  StateSpec s;
  s.kind = kind;
  s.n_photons = n_photons;
  return s;
}

bool is_collective(StateKind kind) noexcept {
  return kind == StateKind::CollectiveCoherent || kind == StateKind::PhaseDiffused ||
         kind == StateKind::Chaotic;
}

bool has_random_term_phases(StateKind kind) noexcept {
  return kind == StateKind::Chaotic || kind == StateKind::ChaoticSubstate;
}

bool is_phase_diffused(StateKind kind) noexcept {
  return kind == StateKind::PhaseDiffused || kind == StateKind::PhaseDiffusedSubstate;
}

Distribution distribution_of(StateKind kind) {
  switch (kind) {
    case StateKind::CollectiveCoherent:
    case StateKind::CoherentSubstate:
    case StateKind::PhaseDiffused:
    case StateKind::PhaseDiffusedSubstate:
      return Distribution::Poisson;
    case StateKind::Chaotic:
    case StateKind::ChaoticSubstate:
      return Distribution::BoseEinstein;
    default:
      throw std::invalid_argument("state kind has no substate coefficient distribution");
  }
}

std::string_view kind_name(StateKind kind) noexcept {
  switch (kind) {
    case StateKind::CollectiveCoherent: return "coherent";
    case StateKind::CoherentSubstate: return "cohN";
    case StateKind::PhaseDiffused: return "dif";
    case StateKind::PhaseDiffusedSubstate: return "difN";
    case StateKind::Chaotic: return "chaotic";
    case StateKind::ChaoticSubstate: return "chaN";
    case StateKind::Noon: return "noon";
    case StateKind::NumberState: return "num";
  }
  return "unknown";
}

std::optional<StateKind> parse_kind(std::string_view name) noexcept {
  struct Alias {
    std::string_view name;
    StateKind kind;
  };
  static constexpr std::array<Alias, 20> aliases{{
      {"coherent", StateKind::CollectiveCoherent},
      {"coh", StateKind::CollectiveCoherent},
      {"cohN", StateKind::CoherentSubstate},
      {"coh-sub", StateKind::CoherentSubstate},
      {"coherent-substate", StateKind::CoherentSubstate},
      {"dif", StateKind::PhaseDiffused},
      {"diffused", StateKind::PhaseDiffused},
      {"phase-diffused", StateKind::PhaseDiffused},
      {"difN", StateKind::PhaseDiffusedSubstate},
      {"dif-sub", StateKind::PhaseDiffusedSubstate},
      {"cha", StateKind::Chaotic},
      {"chaotic", StateKind::Chaotic},
      {"chaN", StateKind::ChaoticSubstate},
      {"cha-sub", StateKind::ChaoticSubstate},
      {"noon", StateKind::Noon},
      {"ent", StateKind::Noon},
      {"num", StateKind::NumberState},
      {"number", StateKind::NumberState},
      {"fock", StateKind::NumberState},
      {"twin", StateKind::NumberState},
  }};
  for (const auto& a : aliases) {
    if (a.name == name) return a.kind;
  }
  return std::nullopt;
}

std::string describe(const StateSpec& spec) {
  std::ostringstream os;
  os << kind_name(spec.kind);
  if (is_collective(spec.kind)) {
    os << "(mean_n=" << spec.mean_n << ")";
  } else {
    os << "(N=" << spec.n_photons << ")";
  }
  return os.str();
}

void validate(const StateSpec& spec) {
  if (is_collective(spec.kind)) {
    if (!(spec.mean_n >= 0.0) || !std::isfinite(spec.mean_n)) {
      throw std::invalid_argument("mean_n must be a finite non-negative number");
    }
    if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0)) {
      throw std::invalid_argument("epsilon must lie in (0, 1)");
    }
  } else {
    if (spec.n_photons < 0) throw std::invalid_argument("photon number N must be non-negative");
    if (spec.kind == StateKind::Noon && spec.n_photons < 1) {
      throw std::invalid_argument("NOON state requires N >= 1");
    }
    if (spec.kind == StateKind::NumberState &&
        (spec.n_photons < 2 || spec.n_photons % 2 != 0)) {
      throw std::invalid_argument("number state requires even N >= 2");
    }
  }
  const std::size_t np = spec.phases.size();
  switch (spec.kind) {
    case StateKind::CollectiveCoherent:
      if (np > 2) throw std::invalid_argument("coherent state takes at most two phases");
      break;
    case StateKind::PhaseDiffused:
    case StateKind::PhaseDiffusedSubstate:
    case StateKind::Noon:
      if (np > 1) throw std::invalid_argument(std::string(kind_name(spec.kind)) + " takes at most one phase");
      break;
    case StateKind::CoherentSubstate:
    case StateKind::NumberState:
      if (np != 0) throw std::invalid_argument(std::string(kind_name(spec.kind)) + " takes no phases");
      break;
    case StateKind::ChaoticSubstate:
      if (np != 0 && np != static_cast<std::size_t>(spec.n_photons)) {
        throw std::invalid_argument("chaotic substate takes either no phases or exactly N phases");
      }
      break;
    case StateKind::Chaotic:
      break;  // checked against the basis in build_state
  }
  for (double p : spec.phases) {
    if (!std::isfinite(p)) throw std::invalid_argument("phases must be finite");
  }
}

namespace {

// Single-mode tail mass beyond n for the per-mode photon statistics.
double single_mode_tail(StateKind kind, double mean_n, int n) {
  if (mean_n == 0.0) return 0.0;
  if (kind == StateKind::Chaotic) {
    const double r = mean_n / (1.0 + mean_n);
    return std::exp((n + 1.0) * std::log(r));
  }
  return boost::math::gamma_p(static_cast<double>(n) + 1.0, mean_n);
}

}  // namespace

int required_cutoff(const StateSpec& spec) {
  validate(spec);
  switch (spec.kind) {
    case StateKind::CoherentSubstate:
    case StateKind::PhaseDiffusedSubstate:
    case StateKind::ChaoticSubstate:
    case StateKind::Noon:
      return spec.n_photons;
    case StateKind::NumberState:
      return spec.n_photons / 2;
    default:
      break;
  }
  if (spec.mean_n == 0.0) return 0;
  const double target = spec.epsilon / 4.0;
  int n = static_cast<int>(std::floor(spec.mean_n));
  while (single_mode_tail(spec.kind, spec.mean_n, n) >= target) {
    ++n;
    if (n > 100000) throw std::runtime_error("required_cutoff: no convergence");
  }
  return n;
}

fock::FockBasis auto_basis(const StateSpec& spec, int cutoff_budget) {
  const int n = required_cutoff(spec);
  if (n > cutoff_budget) {
    throw std::invalid_argument("cutoff " + std::to_string(n) + " needed for " + describe(spec) +
                                " exceeds budget " + std::to_string(cutoff_budget) +
                                "; relax epsilon or raise the budget");
  }
  return fock::make_basis(n, cutoff_budget);
}

int max_total_photons(const StateSpec& spec, const FockBasis& basis) {
  if (is_collective(spec.kind)) return spec.mean_n == 0.0 ? 0 : 2 * basis.n_max();
  return spec.n_photons;
}

std::size_t term_phase_count(const StateSpec& spec, const FockBasis& basis) {
  switch (spec.kind) {
    case StateKind::Chaotic: return basis.dimension();
    case StateKind::ChaoticSubstate: return static_cast<std::size_t>(spec.n_photons);
    case StateKind::CollectiveCoherent: return 2;
    case StateKind::PhaseDiffused:
    case StateKind::PhaseDiffusedSubstate:
    case StateKind::Noon:
      return 1;
    default:
      return 0;
  }
}

namespace {

double phase_or_zero(const std::vector<double>& phases, std::size_t i) {
  return i < phases.size() ? phases[i] : 0.0;
}

// ln of the binomial substate magnitude 2^{-N/2} sqrt(C(N, m)).
double log_binomial_amp(int n_total, int m) {
  return 0.5 * (log_factorial(n_total) - log_factorial(m) - log_factorial(n_total - m)) -
         0.5 * n_total * std::log(2.0);
}

}  // namespace

fock::TwoModeState build_state(const StateSpec& spec, const FockBasis& basis) {
  validate(spec);
  const int need = required_cutoff(spec);
  if (basis.n_max() < need) {
    throw std::invalid_argument("basis cutoff " + std::to_string(basis.n_max()) + " is too small for " +
                                describe(spec) + " (needs " + std::to_string(need) + ")");
  }
  const int nmax = basis.n_max();
  std::vector<Complex> amps(basis.dimension());
  double loss = 0.0;

  switch (spec.kind) {
    case StateKind::CollectiveCoherent:
    case StateKind::PhaseDiffused: {
      double phi_k = 0.0, phi_kp = 0.0;
      if (spec.kind == StateKind::CollectiveCoherent) {
        phi_k = phase_or_zero(spec.phases, 0);
        phi_kp = spec.phases.size() == 2 ? spec.phases[1] : phi_k;
      } else {
        phi_kp = phase_or_zero(spec.phases, 0);
      }
      if (spec.mean_n == 0.0) {
        amps[basis.index(0, 0)] = 1.0;
        break;
      }
      const double ln_mean = std::log(spec.mean_n);
      for (int n = 0; n <= nmax; ++n) {
        for (int m = 0; m <= nmax; ++m) {
          const double ln_mag = -spec.mean_n + 0.5 * (n + m) * ln_mean -
                                0.5 * (log_factorial(n) + log_factorial(m));
          amps[basis.index(n, m)] = std::polar(std::exp(ln_mag), n * phi_k + m * phi_kp);
        }
      }
      const double t = single_mode_tail(spec.kind, spec.mean_n, nmax);
      loss = t * (2.0 - t);
      break;
    }
    case StateKind::Chaotic: {
      if (!spec.phases.empty() && spec.phases.size() != basis.dimension()) {
        throw std::invalid_argument("chaotic state takes either no phases or one per basis ket (" +
                                    std::to_string(basis.dimension()) + ")");
      }
      if (spec.mean_n == 0.0) {
        amps[basis.index(0, 0)] = 1.0;
        break;
      }
      const double ln_r = std::log(spec.mean_n / (1.0 + spec.mean_n));
      const double ln_norm = -std::log(1.0 + spec.mean_n);
      for (int n = 0; n <= nmax; ++n) {
        for (int m = 0; m <= nmax; ++m) {
          const std::size_t i = basis.index(n, m);
          const double ln_mag = ln_norm + 0.5 * (n + m) * ln_r;
          amps[i] = std::polar(std::exp(ln_mag), phase_or_zero(spec.phases, i));
        }
      }
      const double t = single_mode_tail(spec.kind, spec.mean_n, nmax);
      loss = t * (2.0 - t);
      break;
    }
    case StateKind::CoherentSubstate:
    case StateKind::PhaseDiffusedSubstate: {
      const int N = spec.n_photons;
      const double phi = phase_or_zero(spec.phases, 0);
      for (int m = 0; m <= N; ++m) {
        const double mag = std::exp(log_binomial_amp(N, m));
        const double arg = spec.kind == StateKind::PhaseDiffusedSubstate ? (N - m) * phi : 0.0;
        amps[basis.index(m, N - m)] = std::polar(mag, arg);
      }
      break;
    }
    case StateKind::ChaoticSubstate: {
      const int N = spec.n_photons;
      const double mag = 1.0 / std::sqrt(N + 1.0);
      for (int m = 0; m <= N; ++m) {
        const double arg = m < N ? phase_or_zero(spec.phases, static_cast<std::size_t>(m)) : 0.0;
        amps[basis.index(m, N - m)] = std::polar(mag, arg);
      }
      break;
    }
    case StateKind::Noon: {
      const int N = spec.n_photons;
      const double h = 1.0 / std::sqrt(2.0);
      amps[basis.index(N, 0)] += h;
      amps[basis.index(0, N)] += std::polar(h, phase_or_zero(spec.phases, 0));
      break;
    }
    case StateKind::NumberState: {
      const int h = spec.n_photons / 2;
      amps[basis.index(h, h)] = 1.0;
      break;
    }
  }
  return TwoModeState(basis, std::move(amps), loss);
}

fock::TwoModeState build_state(const StateSpec& spec) { return build_state(spec, auto_basis(spec)); }

double log_weight(Distribution dist, double mean_n, int n_total) {
  if (mean_n < 0.0) throw std::invalid_argument("mean_n must be non-negative");
  if (n_total < 0) return -std::numeric_limits<double>::infinity();
  if (mean_n == 0.0) return n_total == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (dist == Distribution::Poisson) {
    const double lambda = 2.0 * mean_n;
    return n_total * std::log(lambda) - lambda - log_factorial(n_total);
  }
  return std::log(n_total + 1.0) + n_total * std::log(mean_n) - (n_total + 2.0) * std::log1p(mean_n);
}

double weight(Distribution dist, double mean_n, int n_total) {
  return std::exp(log_weight(dist, mean_n, n_total));
}

double tail_mass(Distribution dist, double mean_n, int n_total) {
  if (mean_n < 0.0) throw std::invalid_argument("mean_n must be non-negative");
  if (n_total < 0) return 1.0;
  if (mean_n == 0.0) return 0.0;
  if (dist == Distribution::Poisson) {
    return boost::math::gamma_p(static_cast<double>(n_total) + 1.0, 2.0 * mean_n);
  }
  const double r = mean_n / (1.0 + mean_n);
  const double k = n_total;
  return std::exp((k + 1.0) * std::log(r)) * ((k + 2.0) - (k + 1.0) * r);
}

int total_cutoff(Distribution dist, double mean_n, double tail) {
  if (!(tail > 0.0)) throw std::invalid_argument("tail target must be positive");
  int n = 0;
  while (tail_mass(dist, mean_n, n) >= tail) {
    ++n;
    if (n > 1000000) throw std::runtime_error("total_cutoff: no convergence");
  }
  return n;
}

CoefficientDistribution coefficient_distribution(Distribution dist, double mean_n, int n_total_max) {
  if (mean_n < 0.0) throw std::invalid_argument("mean_n must be non-negative");
  if (n_total_max < 0) throw std::invalid_argument("n_total_max must be non-negative");
  CoefficientDistribution out{dist, mean_n, {}, tail_mass(dist, mean_n, n_total_max)};
  out.weights.reserve(static_cast<std::size_t>(n_total_max) + 1);
  for (int N = 0; N <= n_total_max; ++N) out.weights.push_back(weight(dist, mean_n, N));
  return out;
}

bool SumRuleReport::passed(double tol) const noexcept {
  return std::fabs(norm_residual) < tol && std::fabs(first_residual) < tol &&
         std::fabs(second_residual) < tol;
}

SumRuleReport check_sum_rules(Distribution dist, double mean_n, double epsilon) {
  if (mean_n < 0.0) throw std::invalid_argument("mean_n must be non-negative");
  // Carry the series well past the epsilon tail: second moments weight the
  // tail by N^2.
  const double target = std::min(epsilon, 1e-12) * 1e-6;
  const int n_end = total_cutoff(dist, mean_n, target) + 8;
  NeumaierSum s0, s1, s2;
  for (int N = 0; N <= n_end; ++N) {
    const double w = weight(dist, mean_n, N);
    s0.add(w);
    s1.add(0.5 * N * w);
    s2.add(N * (N - 1.0) * w);
  }
  const double divisor = dist == Distribution::Poisson ? 4.0 : 6.0;
  SumRuleReport r{};
  r.kind = dist;
  r.mean_n = mean_n;
  r.terms = n_end + 1;
  r.norm = s0.value();
  r.first_order_sum = s1.value();
  r.second_order_sum = s2.value() / divisor;
  r.norm_residual = r.norm - 1.0;
  r.first_residual = r.first_order_sum - mean_n;
  r.second_residual = r.second_order_sum - mean_n * mean_n;
  return r;
}

std::vector<SubstateRow> substate_table(Distribution dist, std::span<const double> mean_ns, int n_total_max) {
  std::vector<SubstateRow> rows;
  for (double mean_n : mean_ns) {
    const auto d = coefficient_distribution(dist, mean_n, n_total_max);
    for (int N = 0; N <= n_total_max; ++N) {
      const double w = d.weights[static_cast<std::size_t>(N)];
      if (mean_n == 0.0 && N > 0) break;
      rows.push_back({dist, mean_n, N, w});
    }
  }
  return rows;
}

std::string_view distribution_name(Distribution dist) noexcept {
  return dist == Distribution::Poisson ? "poisson" : "bose";
}

}  // namespace qdiff::states
