#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qdiff::pattern {

// Double-slit geometry in SI units: wavenumber k [1/m], slit separation l,
// slit width a and screen distance z0 [m].
struct SlitGeometry {
  double wavenumber = 0.0;
  double slit_separation = 0.0;
  double slit_width = 0.0;
  double screen_distance = 0.0;

  double ratio() const noexcept { return slit_separation / slit_width; }
};

inline constexpr double kDefaultWavelength = 500e-9;
inline constexpr double kDefaultSeparation = 100e-6;
inline constexpr double kDefaultScreenDistance = 1.0;

// 500 nm light, l = 100 um, z0 = 1 m, a = l / ratio.
SlitGeometry default_geometry(double ratio = 4.0);

// Throws std::invalid_argument for non-physical geometries.
void validate(const SlitGeometry& geom);
// Non-fatal diagnostics (far-field condition).
std::vector<std::string> warnings(const SlitGeometry& geom);

struct Reduced {
  double u = 0.0;  // k l rho / (2 z0)
  double v = 0.0;  // k a rho / (2 z0)
};

Reduced reduce_coords(const SlitGeometry& geom, double rho);
double rho_for_u(const SlitGeometry& geom, double u);

// Screen positions spanning u in [u_lo, u_hi].
std::vector<double> grid_over_u(const SlitGeometry& geom, double u_lo, double u_hi, int points);
// 1001 points over u in [-2 pi, 2 pi].
std::vector<double> default_grid(const SlitGeometry& geom, int points = 1001);

struct DetectionScheme {
  enum class Kind { SamePoint, Opposite, General };

  Kind kind = Kind::SamePoint;
  double rho2 = 0.0;  // fixed second detector for General

  static DetectionScheme same_point() { return {Kind::SamePoint, 0.0}; }
  static DetectionScheme opposite() { return {Kind::Opposite, 0.0}; }
  static DetectionScheme general(double rho2) { return {Kind::General, rho2}; }

  // Detector positions (rho1, rho2) for scan variable rho.
  std::pair<double, double> detectors(double rho) const noexcept;
};

std::string_view scheme_name(DetectionScheme::Kind kind) noexcept;

}  // namespace qdiff::pattern
