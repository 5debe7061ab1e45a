#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qdiff/pattern.hpp"

namespace qdiff::mc {

// A coincidence-detection experiment drawn from a tabulated pattern. The
// law is piecewise constant on each grid cell with the trapezoid cell mass.
struct DetectionRun {
  std::vector<double> grid;  // scan positions, strictly increasing
  std::vector<double> law;   // non-negative pattern values on grid
  std::uint64_t n_events = 0;
  std::uint64_t seed = 0;
  int bins = 0;
  std::vector<double> bin_edges;        // bins + 1, spanning the grid
  std::vector<std::uint64_t> histogram;  // filled by simulate
  std::vector<double> expected;          // filled by simulate
  std::string rng;                       // generator name, filled by simulate
};

DetectionRun make_run(const pattern::PatternSeries& series, std::uint64_t n_events, std::uint64_t seed, int bins);
DetectionRun make_run(std::span<const double> grid, std::span<const double> law, std::uint64_t n_events,
                      std::uint64_t seed, int bins);

DetectionRun simulate(DetectionRun run);

// Expected counts per bin of `edges` under the law tabulated on `grid`.
std::vector<double> expected_counts(std::span<const double> grid, std::span<const double> law,
                                    std::span<const double> edges, std::uint64_t n_events);

struct GofResult {
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int groups = 0;  // bins after merging sparse neighbours
};

// Pearson chi-square of histogram against expected; adjacent bins are merged
// until every group expects at least `min_expected` events.
GofResult gof(const DetectionRun& run, double min_expected = 5.0);

}  // namespace qdiff::mc
