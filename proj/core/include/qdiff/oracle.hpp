#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "qdiff/geometry.hpp"
#include "qdiff/pattern.hpp"

namespace qdiff::oracle {

// Classical field models for the two slits.
//  FixedPhase:          every sub-source emits with the same phase
//  RandomRelativePhase: one uniform phase per slit per sample
//  CircularGaussian:    an independent complex normal amplitude per
//                       sub-source per sample (thermal light)
enum class FieldModel { FixedPhase, RandomRelativePhase, CircularGaussian };

std::string_view model_name(FieldModel model) noexcept;

struct EnsembleSpec {
  FieldModel model = FieldModel::FixedPhase;
  int samples = 1;
  std::uint64_t seed = 0;
  int sub_sources_per_slit = 1;
};

// Fields are scaled so each slit carries unit mean intensity, which puts
// the results in the units of a state with one photon per mode on average.

// Re <E*(rho1) E(rho2)>.
pattern::PatternSeries ensemble_p1(const EnsembleSpec& spec, const pattern::DetectionScheme& scheme,
                                   std::span<const double> grid, const pattern::SlitGeometry& geom);
// <I(rho1) I(rho2)>.
pattern::PatternSeries ensemble_p2(const EnsembleSpec& spec, const pattern::DetectionScheme& scheme,
                                   std::span<const double> grid, const pattern::SlitGeometry& geom);
// <I(rho1) I(rho2)> / (<I(rho1)> <I(rho2)>) from the same samples.
pattern::PatternSeries ensemble_g2(const EnsembleSpec& spec, const pattern::DetectionScheme& scheme,
                                   std::span<const double> grid, const pattern::SlitGeometry& geom);

}  // namespace qdiff::oracle
