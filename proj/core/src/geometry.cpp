#include "qdiff/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qdiff/numeric.hpp"

namespace qdiff::pattern {

SlitGeometry default_geometry(double ratio) {
  if (!(ratio > 0.0)) throw std::invalid_argument("slit ratio l/a must be positive");
  return {2.0 * kPi / kDefaultWavelength, kDefaultSeparation, kDefaultSeparation / ratio, kDefaultScreenDistance};
}

void validate(const SlitGeometry& g) {
  auto bad = [](const char* what) { throw std::invalid_argument(what); };
  if (!(g.wavenumber > 0.0) || !std::isfinite(g.wavenumber)) bad("wavenumber must be positive");
  if (!(g.slit_width > 0.0) || !std::isfinite(g.slit_width)) bad("slit width must be positive");
  if (!(g.screen_distance > 0.0) || !std::isfinite(g.screen_distance)) bad("screen distance must be positive");
  if (!std::isfinite(g.slit_separation) || g.slit_separation < 2.0 * g.slit_width) {
    bad("slit separation must be at least twice the slit width");
  }
}

std::vector<std::string> warnings(const SlitGeometry& g) {
  std::vector<std::string> out;
  if (g.screen_distance < 100.0 * g.slit_separation) {
    std::ostringstream os;
    os << "screen distance " << g.screen_distance << " m is below 100 slit separations; far-field reduction is approximate";
    out.push_back(os.str());
  }
  return out;
}

Reduced reduce_coords(const SlitGeometry& g, double rho) {
  const double q = g.wavenumber * rho / (2.0 * g.screen_distance);
  return {q * g.slit_separation, q * g.slit_width};
}

double rho_for_u(const SlitGeometry& g, double u) {
  return 2.0 * g.screen_distance * u / (g.wavenumber * g.slit_separation);
}

std::vector<double> grid_over_u(const SlitGeometry& g, double u_lo, double u_hi, int points) {
  return linspace(rho_for_u(g, u_lo), rho_for_u(g, u_hi), points);
}

std::vector<double> default_grid(const SlitGeometry& g, int points) {
  return grid_over_u(g, -2.0 * kPi, 2.0 * kPi, points);
}

std::pair<double, double> DetectionScheme::detectors(double rho) const noexcept {
  switch (kind) {
    case Kind::SamePoint: return {rho, rho};
    case Kind::Opposite: return {rho, -rho};
    case Kind::General: return {rho, rho2};
  }
  return {rho, rho};
}

std::string_view scheme_name(DetectionScheme::Kind kind) noexcept {
  switch (kind) {
    case DetectionScheme::Kind::SamePoint: return "same";
    case DetectionScheme::Kind::Opposite: return "opposite";
    case DetectionScheme::Kind::General: return "general";
  }
  return "unknown";
}

}  // namespace qdiff::pattern
