#pragma once

#include <span>
#include <string>
#include <vector>

#include "qdiff/catalog.hpp"
#include "qdiff/correlator.hpp"
#include "qdiff/geometry.hpp"
#include "qdiff/states.hpp"

namespace qdiff::pattern {

// One scanned curve. values = scale_factor * shape pointwise; for ratio
// quantities (g1, g2) scale_factor is 1. Points with defined[i] == false
// carry NaN.
struct PatternSeries {
  std::string quantity = "probability";  // probability | g1 | g2
  std::string route = "catalog";         // catalog | engine | ensemble
  int order = 1;
  states::StateSpec state;
  DetectionScheme scheme;
  SlitGeometry geometry;
  std::vector<double> rho;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> values;
  std::vector<double> shape;
  std::vector<bool> defined;
  std::vector<double> stderr_estimate;  // empty for exact routes
  double scale_factor = 1.0;
  EnvelopeModel envelope = EnvelopeModel::None;
  // First-order curves off the rho1 = rho2 diagonal are field correlations
  // and may be negative.
  bool signed_shape = false;
  std::string averaging = "none";

  std::size_t size() const noexcept { return rho.size(); }
};

PatternSeries catalog_p1(const states::StateSpec& spec, const DetectionScheme& scheme,
                         std::span<const double> grid, const SlitGeometry& geom);
PatternSeries catalog_p2(const states::StateSpec& spec, const DetectionScheme& scheme,
                         std::span<const double> grid, const SlitGeometry& geom);
PatternSeries catalog_pattern(const states::StateSpec& spec, int order, const DetectionScheme& scheme,
                              std::span<const double> grid, const SlitGeometry& geom);

struct EngineOptions {
  correlator::AssemblyFault fault = correlator::AssemblyFault::None;
};

// Coefficients w with P(rho1, rho2) = Re sum_e w_e M_e, slit envelope included.
std::vector<fock::Complex> engine_weights(const states::StateSpec& spec, int order, Reduced d1, Reduced d2,
                                          const EngineOptions& opts = {});

PatternSeries engine_pattern(const states::StateSpec& spec, int order, const DetectionScheme& scheme,
                             std::span<const double> grid, const SlitGeometry& geom,
                             const correlator::PhaseAverageSpec& avg, const EngineOptions& opts = {});
PatternSeries engine_pattern(const states::StateSpec& spec, int order, const DetectionScheme& scheme,
                             std::span<const double> grid, const SlitGeometry& geom);
// Reuses a precomputed table.
PatternSeries engine_pattern(const correlator::MatrixElementTable& table, const states::StateSpec& spec,
                             const DetectionScheme& scheme, std::span<const double> grid,
                             const SlitGeometry& geom, const EngineOptions& opts = {});

enum class Route { Catalog, Engine };

// Degree of coherence of order `order` along the scheme (Opposite by default).
// Points whose denominator falls below 1e-12 of its maximum are undefined.
PatternSeries coherence(const states::StateSpec& spec, int order, std::span<const double> grid,
                        const SlitGeometry& geom, Route route = Route::Catalog,
                        const DetectionScheme& scheme = DetectionScheme::opposite());
PatternSeries g1(const states::StateSpec& spec, std::span<const double> grid, const SlitGeometry& geom,
                 Route route = Route::Catalog);
PatternSeries g2(const states::StateSpec& spec, std::span<const double> grid, const SlitGeometry& geom,
                 Route route = Route::Catalog);

inline constexpr double kUndefinedThreshold = 1e-12;

// (k a / (pi z0)) * integral of the shape over rho, trapezoid rule on the
// series grid. Throws std::domain_error when the envelope tail beyond the
// grid exceeds tail_tol or the grid is too coarse to resolve the shape.
double effective_width(const PatternSeries& series, const SlitGeometry& geom, double tail_tol = 1e-6);

// Same quantity for the coherent-family same-point shape, integrated by
// panel doubling without storing samples.
double effective_width_streaming(int order, const SlitGeometry& geom, double tail_tol = 1e-6,
                                 double rel_tol = 1e-10);

// Mean-envelope estimate of the width contribution beyond |v| > v_edge.
double envelope_tail(int order, double v_edge);

struct N2Decomposition {
  double a11 = 0.0, a20 = 0.0, a02 = 0.0;
  double phi11 = 0.0, phi20 = 0.0, phi02 = 0.0;

  // Flat second-order background predicted from the paired-emission terms.
  double predicted_background() const noexcept { return 0.5 * (a20 * a20 + a02 * a02); }
  // Peak of the single-pair fringe term.
  double predicted_fringe() const noexcept { return a11 * a11; }
};

N2Decomposition decompose_n2(const states::StateSpec& spec);

}  // namespace qdiff::pattern
