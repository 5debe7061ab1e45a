#include "qdiff/mc.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <stdexcept>

#include "qdiff/numeric.hpp"
#include "qdiff/rng.hpp"

namespace qdiff::mc {

namespace {

constexpr std::uint64_t kEventBatch = 1U << 16;
constexpr std::uint64_t kEventStream = 0x4D43;

// Cumulative trapezoid mass at each grid node, normalised to end at 1.
struct Law {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> cdf;

  Law(std::span<const double> grid, std::span<const double> law) : x(grid.begin(), grid.end()), y(law.begin(), law.end()) {
    if (x.size() != y.size()) throw std::invalid_argument("grid and law sizes differ");
    if (x.size() < 2) throw std::invalid_argument("law needs at least two grid points");
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (!(x[i] > x[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
    }
    for (double v : y) {
      if (!std::isfinite(v)) throw std::invalid_argument("pattern has undefined values");
      if (v < 0.0) throw std::invalid_argument("pattern has negative values; signed shapes cannot be sampled");
    }
    cdf.assign(x.size(), 0.0);
    NeumaierSum acc;
    for (std::size_t i = 1; i < x.size(); ++i) {
      acc.add(0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]));
      cdf[i] = acc.value();
    }
    const double total = cdf.back();
    if (!(total > 0.0)) throw std::invalid_argument("pattern has zero total probability");
    for (auto& c : cdf) c /= total;
    cdf.back() = 1.0;
  }

  // Fraction of mass below position p.
  double at(double p) const {
    if (p <= x.front()) return 0.0;
    if (p >= x.back()) return 1.0;
    const auto it = std::upper_bound(x.begin(), x.end(), p);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double frac = (p - x[i]) / (x[i + 1] - x[i]);
    return cdf[i] + frac * (cdf[i + 1] - cdf[i]);
  }

  double sample(double r) const {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    std::size_t i = static_cast<std::size_t>(it - cdf.begin());
    i = std::clamp<std::size_t>(i, 1, cdf.size() - 1) - 1;
    // Skip zero-mass cells that share a cumulative value.
    while (cdf[i + 1] == cdf[i] && i + 2 < cdf.size()) ++i;
    const double span = cdf[i + 1] - cdf[i];
    const double frac = span > 0.0 ? (r - cdf[i]) / span : 0.0;
    return x[i] + std::clamp(frac, 0.0, 1.0) * (x[i + 1] - x[i]);
  }
};

std::size_t bin_of(const std::vector<double>& edges, double p) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), p);
  const std::size_t idx = static_cast<std::size_t>(it - edges.begin());
  const std::size_t nb = edges.size() - 1;
  if (idx == 0) return 0;
  return std::min(idx - 1, nb - 1);
}

}  // namespace

DetectionRun make_run(std::span<const double> grid, std::span<const double> law, std::uint64_t n_events,
                      std::uint64_t seed, int bins) {
  if (bins < 1) throw std::invalid_argument("need at least one bin");
  if (grid.size() < 2) throw std::invalid_argument("law needs at least two grid points");
  DetectionRun run;
  run.grid.assign(grid.begin(), grid.end());
  run.law.assign(law.begin(), law.end());
  run.n_events = n_events;
  run.seed = seed;
  run.bins = bins;
  run.bin_edges = linspace(grid.front(), grid.back(), bins + 1);
  return run;
}

DetectionRun make_run(const pattern::PatternSeries& series, std::uint64_t n_events, std::uint64_t seed, int bins) {
  return make_run(series.rho, series.values, n_events, seed, bins);
}

std::vector<double> expected_counts(std::span<const double> grid, std::span<const double> law,
                                    std::span<const double> edges, std::uint64_t n_events) {
  const Law L(grid, law);
  std::vector<double> out(edges.size() - 1);
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const double lo = b == 0 ? 0.0 : L.at(edges[b]);
    const double hi = b + 2 == edges.size() ? 1.0 : L.at(edges[b + 1]);
    out[b] = static_cast<double>(n_events) * (hi - lo);
  }
  return out;
}

DetectionRun simulate(DetectionRun run) {
  if (run.n_events < 1) throw std::invalid_argument("n_events must be at least 1");
  if (run.bins < 1 || run.bin_edges.size() != static_cast<std::size_t>(run.bins) + 1) {
    throw std::invalid_argument("run has inconsistent bin edges");
  }
  const Law L(run.grid, run.law);
  run.histogram.assign(static_cast<std::size_t>(run.bins), 0);
  for (std::uint64_t batch = 0; batch * kEventBatch < run.n_events; ++batch) {
    auto eng = batch_engine(run.seed, kEventStream, batch);
    const std::uint64_t end = std::min(run.n_events, (batch + 1) * kEventBatch);
    for (std::uint64_t e = batch * kEventBatch; e < end; ++e) {
      ++run.histogram[bin_of(run.bin_edges, L.sample(uniform01(eng)))];
    }
  }
  run.expected = expected_counts(run.grid, run.law, run.bin_edges, run.n_events);
  run.rng = std::string(kRngName) + "/seed_seq(seed,stream,batch)";
  return run;
}

GofResult gof(const DetectionRun& run, double min_expected) {
  if (run.histogram.size() != run.expected.size() || run.histogram.empty()) {
    throw std::invalid_argument("gof: run has not been simulated");
  }
  // Greedy left-to-right merging; a short remainder joins the last group.
  std::vector<double> obs, exp;
  double o = 0.0, e = 0.0;
  for (std::size_t b = 0; b < run.expected.size(); ++b) {
    o += static_cast<double>(run.histogram[b]);
    e += run.expected[b];
    if (e >= min_expected) {
      obs.push_back(o);
      exp.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp.empty()) {
      obs.push_back(o);
      exp.push_back(e);
    } else {
      obs.back() += o;
      exp.back() += e;
    }
  }
  if (exp.size() < 2 || exp.front() < min_expected) {
    throw std::invalid_argument("gof: histogram cannot be merged into two or more groups with expected >= " +
                                std::to_string(min_expected));
  }
  GofResult r;
  r.groups = static_cast<int>(exp.size());
  r.dof = r.groups - 1;
  NeumaierSum chi;
  for (std::size_t i = 0; i < exp.size(); ++i) {
    const double d = obs[i] - exp[i];
    chi.add(d * d / exp[i]);
  }
  r.chi_square = chi.value();
  const boost::math::chi_squared dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.chi_square));
  return r;
}

}  // namespace qdiff::mc
