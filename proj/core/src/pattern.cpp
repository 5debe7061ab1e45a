#include "qdiff/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "qdiff/numeric.hpp"

namespace qdiff::pattern {

using correlator::MatrixElementTable;
using fock::Complex;
using fock::Mode;
using states::StateKind;
using states::StateSpec;

namespace {

PatternSeries start_series(const StateSpec& spec, int order, const DetectionScheme& scheme,
                           std::span<const double> grid, const SlitGeometry& geom) {
  states::validate(spec);
  validate(geom);
  if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
  if (grid.empty()) throw std::invalid_argument("grid must not be empty");
  PatternSeries s;
  s.order = order;
  s.state = spec;
  s.scheme = scheme;
  s.geometry = geom;
  s.rho.assign(grid.begin(), grid.end());
  s.u.reserve(grid.size());
  s.v.reserve(grid.size());
  for (double r : grid) {
    const auto d = reduce_coords(geom, r);
    s.u.push_back(d.u);
    s.v.push_back(d.v);
  }
  s.values.resize(grid.size());
  s.shape.resize(grid.size());
  s.defined.assign(grid.size(), true);
  s.signed_shape = order == 1 && scheme.kind != DetectionScheme::Kind::SamePoint;
  return s;
}

bool paired_emission(const StateSpec& spec) { return spec.kind == StateKind::Noon && spec.n_photons == 2; }

}  // namespace

PatternSeries catalog_pattern(const StateSpec& spec, int order, const DetectionScheme& scheme,
                              std::span<const double> grid, const SlitGeometry& geom) {
  PatternSeries s = start_series(spec, order, scheme, grid, geom);
  s.route = "catalog";
  s.averaging = "closed-form";
  s.scale_factor = scale_factor(spec, order);
  s.envelope = envelope_model(spec, order);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [r1, r2] = scheme.detectors(grid[i]);
    const auto t = catalog_shape(spec, order, reduce_coords(geom, r1), reduce_coords(geom, r2));
    s.shape[i] = t.shape();
    s.values[i] = s.scale_factor * s.shape[i];
  }
  return s;
}

PatternSeries catalog_p1(const StateSpec& spec, const DetectionScheme& scheme, std::span<const double> grid,
                         const SlitGeometry& geom) {
  return catalog_pattern(spec, 1, scheme, grid, geom);
}

PatternSeries catalog_p2(const StateSpec& spec, const DetectionScheme& scheme, std::span<const double> grid,
                         const SlitGeometry& geom) {
  return catalog_pattern(spec, 2, scheme, grid, geom);
}

std::vector<Complex> engine_weights(const StateSpec& spec, int order, Reduced d1, Reduced d2,
                                    const EngineOptions& opts) {
  const EnvelopeModel model = envelope_model(spec, order);
  if (order == 1) {
    const auto w0 = correlator::p1_weights(d1.u, d2.u);
    std::vector<Complex> w(w0.begin(), w0.end());
    if (model == EnvelopeModel::Factored) {
      const double f = sinc(d1.v) * sinc(d2.v);
      for (auto& x : w) x *= f;
    } else if (model == EnvelopeModel::Difference) {
      const double same = sinc(d1.v - d2.v);
      const double cross = sinc(d1.v + d2.v);
      w[fock::first_index(Mode::K, Mode::K)] *= same;
      w[fock::first_index(Mode::KPrime, Mode::KPrime)] *= same;
      w[fock::first_index(Mode::K, Mode::KPrime)] *= cross;
      w[fock::first_index(Mode::KPrime, Mode::K)] *= cross;
    }
    return w;
  }
  if (order != 2) throw std::invalid_argument("order must be 1 or 2");
  const auto g = correlator::p2_group_weights(d1.u, d2.u, opts.fault);
  double ea = 1.0, eb = 1.0, ecd = 1.0;
  if (model == EnvelopeModel::Factored) {
    const double f = sinc(d1.v) * sinc(d2.v);
    ea = eb = ecd = f * f;
  } else if (model == EnvelopeModel::Difference) {
    const double s = sinc(d1.v - d2.v);
    ea = s * s;
    if (paired_emission(spec)) {
      const double t = sinc(d1.v + d2.v);
      eb = t * t;
    }
  }
  std::vector<Complex> w(16);
  for (std::size_t e = 0; e < 16; ++e) w[e] = 0.25 * (ea * g.a[e] + eb * g.b[e] + ecd * (g.c[e] + g.d[e]));
  return w;
}

PatternSeries engine_pattern(const MatrixElementTable& table, const StateSpec& spec, const DetectionScheme& scheme,
                             std::span<const double> grid, const SlitGeometry& geom, const EngineOptions& opts) {
  PatternSeries s = start_series(spec, table.order, scheme, grid, geom);
  s.route = "engine";
  s.averaging = table.averaging;
  s.envelope = envelope_model(spec, table.order);
  s.scale_factor = in_catalog(spec, table.order) ? scale_factor(spec, table.order) : 1.0;
  if (!table.exact()) s.stderr_estimate.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [r1, r2] = scheme.detectors(grid[i]);
    const auto w = engine_weights(spec, table.order, reduce_coords(geom, r1), reduce_coords(geom, r2), opts);
    s.values[i] = correlator::checked_real(table, w);
    s.shape[i] = s.scale_factor != 0.0 ? s.values[i] / s.scale_factor : 0.0;
    if (!table.exact()) s.stderr_estimate[i] = correlator::contract_stderr(table, w);
  }
  return s;
}

PatternSeries engine_pattern(const StateSpec& spec, int order, const DetectionScheme& scheme,
                             std::span<const double> grid, const SlitGeometry& geom,
                             const correlator::PhaseAverageSpec& avg, const EngineOptions& opts) {
  const auto table = correlator::matrix_elements(spec, order, avg);
  return engine_pattern(table, spec, scheme, grid, geom, opts);
}

PatternSeries engine_pattern(const StateSpec& spec, int order, const DetectionScheme& scheme,
                             std::span<const double> grid, const SlitGeometry& geom) {
  return engine_pattern(correlator::matrix_elements(spec, order), spec, scheme, grid, geom);
}

PatternSeries coherence(const StateSpec& spec, int order, std::span<const double> grid, const SlitGeometry& geom,
                        Route route, const DetectionScheme& scheme) {
  PatternSeries s = start_series(spec, order, scheme, grid, geom);
  s.quantity = order == 1 ? "g1" : "g2";
  s.route = route == Route::Catalog ? "catalog" : "engine";
  s.scale_factor = 1.0;
  s.envelope = envelope_model(spec, order);
  s.signed_shape = order == 1;

  std::function<double(int, double, double)> prob;
  MatrixElementTable t1, t2;
  if (route == Route::Catalog) {
    s.averaging = "closed-form";
    prob = [&](int o, double r1, double r2) {
      return catalog_value(spec, o, reduce_coords(geom, r1), reduce_coords(geom, r2));
    };
  } else {
    t1 = correlator::matrix_elements(spec, 1);
    if (order == 2) t2 = correlator::matrix_elements(spec, 2);
    s.averaging = t1.averaging;
    prob = [&](int o, double r1, double r2) {
      const auto w = engine_weights(spec, o, reduce_coords(geom, r1), reduce_coords(geom, r2));
      return correlator::checked_real(o == 1 ? t1 : t2, w);
    };
  }

  std::vector<double> num(grid.size()), den(grid.size());
  double den_max = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [r1, r2] = scheme.detectors(grid[i]);
    num[i] = prob(order, r1, r2);
    const double i1 = prob(1, r1, r1);
    const double i2 = prob(1, r2, r2);
    const double prod = std::max(i1 * i2, 0.0);
    den[i] = order == 1 ? std::sqrt(prod) : prod;
    den_max = std::max(den_max, den[i]);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (den_max <= 0.0 || den[i] < kUndefinedThreshold * den_max) {
      s.defined[i] = false;
      s.values[i] = s.shape[i] = std::numeric_limits<double>::quiet_NaN();
    } else {
      s.values[i] = s.shape[i] = num[i] / den[i];
    }
  }
  return s;
}

PatternSeries g1(const StateSpec& spec, std::span<const double> grid, const SlitGeometry& geom, Route route) {
  return coherence(spec, 1, grid, geom, route);
}

PatternSeries g2(const StateSpec& spec, std::span<const double> grid, const SlitGeometry& geom, Route route) {
  return coherence(spec, 2, grid, geom, route);
}

double envelope_tail(int order, double v_edge) {
  if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
  if (!(v_edge > 0.0)) return std::numeric_limits<double>::infinity();
  // Mean of cos^{2O} over a fringe period times the sinc^{2O} envelope tail.
  const double c = order == 1 ? 0.25 : 9.0 / 64.0;
  const int p = 2 * order - 1;
  return (4.0 / kPi) * c * std::pow(v_edge, -p) / p;
}

double effective_width(const PatternSeries& series, const SlitGeometry& geom, double tail_tol) {
  validate(geom);
  if (series.size() < 2) throw std::invalid_argument("effective_width needs at least two points");
  for (bool d : series.defined) {
    if (!d) throw std::domain_error("effective_width: series has undefined points");
  }
  if (series.envelope == EnvelopeModel::Factored) {
    const double v_edge = std::min(std::fabs(series.v.front()), std::fabs(series.v.back()));
    const double tail = envelope_tail(series.order, v_edge);
    if (tail > tail_tol) {
      throw std::domain_error("effective_width: envelope tail " + std::to_string(tail) +
                              " beyond the grid exceeds tolerance " + std::to_string(tail_tol));
    }
  }
  const double factor = geom.wavenumber * geom.slit_width / (kPi * geom.screen_distance);
  return factor * trapezoid(series.rho, series.shape);
}

double effective_width_streaming(int order, const SlitGeometry& geom, double tail_tol, double rel_tol) {
  validate(geom);
  if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
  if (!(tail_tol > 0.0)) throw std::invalid_argument("tail tolerance must be positive");
  const int p = 2 * order - 1;
  const double c = order == 1 ? 0.25 : 9.0 / 64.0;
  const double v_edge = std::pow((4.0 / kPi) * c / (p * tail_tol), 1.0 / p);
  const double rho_edge = v_edge * 2.0 * geom.screen_distance / (geom.wavenumber * geom.slit_width);

  auto shape = [&](double rho) {
    const auto d = reduce_coords(geom, rho);
    const double f = std::cos(d.u) * sinc(d.v);
    return order == 1 ? f * f : (f * f) * (f * f);
  };

  // Start at half a radian per panel in u, comfortably inside the band limit.
  const double u_edge = reduce_coords(geom, rho_edge).u;
  auto panels = static_cast<std::uint64_t>(std::ceil(2.0 * u_edge / 0.5));
  panels = std::max<std::uint64_t>(panels, 64);
  double h = 2.0 * rho_edge / static_cast<double>(panels);
  NeumaierSum first;
  for (std::uint64_t i = 0; i <= panels; ++i) {
    const double w = (i == 0 || i == panels) ? 0.5 : 1.0;
    first.add(w * shape(-rho_edge + h * static_cast<double>(i)));
  }
  double sum = first.value();  // trapezoid sum without the factor h
  double estimate = h * sum;
  constexpr std::uint64_t kMaxPanels = std::uint64_t{1} << 28;
  while (panels < kMaxPanels) {
    NeumaierSum mid;
    for (std::uint64_t i = 0; i < panels; ++i) mid.add(shape(-rho_edge + h * (static_cast<double>(i) + 0.5)));
    sum += mid.value();
    panels *= 2;
    h *= 0.5;
    const double next = h * sum;
    const bool done = std::fabs(next - estimate) <= rel_tol * std::fabs(next);
    estimate = next;
    if (done) {
      const double factor = geom.wavenumber * geom.slit_width / (kPi * geom.screen_distance);
      return factor * estimate;
    }
  }
  throw std::runtime_error("effective_width_streaming: no convergence");
}

N2Decomposition decompose_n2(const StateSpec& spec) {
  states::validate(spec);
  const bool substate = !states::is_collective(spec.kind);
  if (!substate || spec.n_photons != 2) {
    throw std::invalid_argument("decompose_n2 needs a two-photon substate, got " + states::describe(spec));
  }
  const auto psi = states::build_state(spec);
  const Complex c11 = psi.amplitude(1, 1), c20 = psi.amplitude(2, 0), c02 = psi.amplitude(0, 2);
  auto arg = [](Complex c) { return std::abs(c) > 0.0 ? std::arg(c) : 0.0; };
  return {std::abs(c11), std::abs(c20), std::abs(c02), arg(c11), arg(c20), arg(c02)};
}

}  // namespace qdiff::pattern
