#pragma once

#include <string_view>

#include "qdiff/correlator.hpp"
#include "qdiff/geometry.hpp"
#include "qdiff/states.hpp"

namespace qdiff::pattern {

// How slit integration enters each state's pattern.
//  Factored:   sinc(v1) sinc(v2) per order (coherent family)
//  Difference: sinc(v1 - v2) on the same-mode fringe, sinc(v1 + v2) on the
//              paired-emission fringe of the N = 2 NOON state
//  None:       point source (states outside the closed-form catalog)
enum class EnvelopeModel { Factored, Difference, None };

std::string_view envelope_name(EnvelopeModel model) noexcept;
EnvelopeModel envelope_model(const states::StateSpec& spec, int order);

// True when a closed-form pattern exists for (spec, order).
bool in_catalog(const states::StateSpec& spec, int order);

// Closed-form matrix elements after the state's natural phase average.
correlator::MatrixElementTable catalog_elements(const states::StateSpec& spec, int order);

// The printed prefactor P_O.
double scale_factor(const states::StateSpec& spec, int order);

// Shape bracket split into its constant background and position-dependent
// fringe term: G = background + fringe.
struct ShapeTerms {
  double background = 0.0;
  double fringe = 0.0;

  double shape() const noexcept { return background + fringe; }
};

ShapeTerms catalog_shape(const states::StateSpec& spec, int order, Reduced d1, Reduced d2);
double catalog_value(const states::StateSpec& spec, int order, Reduced d1, Reduced d2);

}  // namespace qdiff::pattern
