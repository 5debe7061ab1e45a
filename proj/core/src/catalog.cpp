#include "qdiff/catalog.hpp"

#include <cmath>
#include <stdexcept>

#include "qdiff/numeric.hpp"

namespace qdiff::pattern {

using correlator::MatrixElementTable;
using fock::Complex;
using fock::Mode;
using states::StateKind;
using states::StateSpec;

std::string_view envelope_name(EnvelopeModel model) noexcept {
  switch (model) {
    case EnvelopeModel::Factored: return "factored";
    case EnvelopeModel::Difference: return "difference";
    case EnvelopeModel::None: return "none";
  }
  return "unknown";
}

namespace {

bool coherent_family(StateKind k) {
  return k == StateKind::CollectiveCoherent || k == StateKind::CoherentSubstate;
}

bool has_relative_phase(const StateSpec& s) {
  return s.kind == StateKind::CollectiveCoherent && s.phases.size() == 2 && s.phases[0] != s.phases[1];
}

void require_catalog(const StateSpec& spec, int order) {
  if (!in_catalog(spec, order)) {
    throw std::invalid_argument(states::describe(spec) + " has no closed-form pattern at order " +
                                std::to_string(order) + "; use the engine route");
  }
}

}  // namespace

bool in_catalog(const StateSpec& spec, int order) {
  if (order != 1 && order != 2) return false;
  if (has_relative_phase(spec)) return false;
  if (spec.kind == StateKind::Noon && spec.n_photons < 2) return false;
  return true;
}

EnvelopeModel envelope_model(const StateSpec& spec, int order) {
  if (!in_catalog(spec, order)) return EnvelopeModel::None;
  return coherent_family(spec.kind) ? EnvelopeModel::Factored : EnvelopeModel::Difference;
}

MatrixElementTable catalog_elements(const StateSpec& spec, int order) {
  states::validate(spec);
  if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
  const double n = spec.mean_n;
  const double N = spec.n_photons;

  // Entry value as a function of the number of k-mode creators (c) and
  // k-mode annihilators (d).
  auto value = [&](int c, int d) -> Complex {
    if (order == 1) {
      switch (spec.kind) {
        case StateKind::CollectiveCoherent: {
          const double phi_k = spec.phases.empty() ? 0.0 : spec.phases[0];
          const double phi_kp = spec.phases.size() == 2 ? spec.phases[1] : phi_k;
          return std::polar(n, (d - c) * (phi_k - phi_kp));
        }
        case StateKind::CoherentSubstate: return N / 2.0;
        case StateKind::PhaseDiffused:
        case StateKind::Chaotic: return c == d ? n : 0.0;
        case StateKind::Noon:
          if (c == d) return N / 2.0;
          if (spec.n_photons == 1) {
            const double phi = spec.phases.empty() ? 0.0 : spec.phases[0];
            return std::polar(0.5, c == 1 ? phi : -phi);
          }
          return 0.0;
        default: return c == d ? N / 2.0 : 0.0;
      }
    }
    switch (spec.kind) {
      case StateKind::CollectiveCoherent: {
        const double phi_k = spec.phases.empty() ? 0.0 : spec.phases[0];
        const double phi_kp = spec.phases.size() == 2 ? spec.phases[1] : phi_k;
        return std::polar(n * n, (d - c) * (phi_k - phi_kp));
      }
      case StateKind::CoherentSubstate: return N * (N - 1.0) / 4.0;
      case StateKind::PhaseDiffused: return c == d ? n * n : 0.0;
      case StateKind::PhaseDiffusedSubstate: return c == d ? N * (N - 1.0) / 4.0 : 0.0;
      case StateKind::Chaotic:
        if (c != d) return 0.0;
        return c == 1 ? n * n : 2.0 * n * n;
      case StateKind::ChaoticSubstate:
        if (c != d) return 0.0;
        return c == 1 ? N * (N - 1.0) / 6.0 : N * (N - 1.0) / 3.0;
      case StateKind::Noon: {
        if (c == d) return c == 1 ? 0.0 : N * (N - 1.0) / 2.0;
        if (spec.n_photons == 2 && c != 1 && d != 1) {
          const double phi = spec.phases.empty() ? 0.0 : spec.phases[0];
          return std::polar(1.0, c == 2 ? phi : -phi);
        }
        return 0.0;
      }
      case StateKind::NumberState:
        if (c != d) return 0.0;
        return c == 1 ? N * N / 4.0 : N * (N - 2.0) / 4.0;
    }
    return 0.0;
  };

  auto k_count = [](Mode a, Mode b) { return (a == Mode::K ? 1 : 0) + (b == Mode::K ? 1 : 0); };
  constexpr Mode modes[2] = {Mode::K, Mode::KPrime};
  MatrixElementTable t;
  t.order = order;
  t.averaging = "closed-form";
  if (order == 1) {
    t.entries.resize(4);
    for (Mode x : modes)
      for (Mode y : modes) t.entries[fock::first_index(x, y)] = value(x == Mode::K, y == Mode::K);
  } else {
    t.entries.resize(16);
    for (Mode x : modes)
      for (Mode y : modes)
        for (Mode z : modes)
          for (Mode w : modes) t.entries[fock::second_index(x, y, z, w)] = value(k_count(x, y), k_count(z, w));
  }
  return t;
}

double scale_factor(const StateSpec& spec, int order) {
  require_catalog(spec, order);
  const double n = spec.mean_n;
  const double N = spec.n_photons;
  if (order == 1) {
    switch (spec.kind) {
      case StateKind::CollectiveCoherent: return 2.0 * n;
      case StateKind::CoherentSubstate: return N;
      case StateKind::PhaseDiffused:
      case StateKind::Chaotic: return n;
      default: return N / 2.0;
    }
  }
  switch (spec.kind) {
    case StateKind::CollectiveCoherent: return 4.0 * n * n;
    case StateKind::CoherentSubstate: return N * (N - 1.0);
    case StateKind::PhaseDiffused:
    case StateKind::Chaotic: return n * n;
    case StateKind::PhaseDiffusedSubstate: return N * (N - 1.0) / 4.0;
    case StateKind::ChaoticSubstate: return N * (N - 1.0) / 6.0;
    case StateKind::Noon: return spec.n_photons == 2 ? 1.0 : N * (N - 1.0) / 4.0;
    case StateKind::NumberState: return spec.n_photons == 2 ? 1.0 : N / 8.0;
  }
  return 0.0;
}

ShapeTerms catalog_shape(const StateSpec& spec, int order, Reduced d1, Reduced d2) {
  states::validate(spec);
  require_catalog(spec, order);
  const bool coherent = coherent_family(spec.kind);
  if (order == 1) {
    if (coherent) return {0.0, std::cos(d1.u) * std::cos(d2.u) * sinc(d1.v) * sinc(d2.v)};
    return {0.0, std::cos(d1.u - d2.u) * sinc(d1.v - d2.v)};
  }
  if (coherent) {
    const double f = std::cos(d1.u) * std::cos(d2.u) * sinc(d1.v) * sinc(d2.v);
    return {0.0, f * f};
  }
  const double c = std::cos(d1.u - d2.u) * sinc(d1.v - d2.v);
  const double diff_fringe = c * c;
  switch (spec.kind) {
    case StateKind::PhaseDiffused:
    case StateKind::PhaseDiffusedSubstate: return {0.5, diff_fringe};
    case StateKind::Chaotic:
    case StateKind::ChaoticSubstate: return {1.0, diff_fringe};
    case StateKind::Noon: {
      if (spec.n_photons > 2) return {1.0, 0.0};
      const double phi = spec.phases.empty() ? 0.0 : spec.phases[0];
      const double s = std::cos(d1.u + d2.u + 0.5 * phi) * sinc(d1.v + d2.v);
      return {0.0, s * s};
    }
    case StateKind::NumberState: {
      if (spec.n_photons == 2) return {0.0, diff_fringe};
      const double N = spec.n_photons;
      return {N - 2.0, 2.0 * N * diff_fringe};
    }
    default: break;
  }
  throw std::logic_error("catalog_shape: unhandled state kind");
}

double catalog_value(const StateSpec& spec, int order, Reduced d1, Reduced d2) {
  return scale_factor(spec, order) * catalog_shape(spec, order, d1, d2).shape();
}

}  // namespace qdiff::pattern
