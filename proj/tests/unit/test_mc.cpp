#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "qdiff/mc.hpp"
#include "qdiff/numeric.hpp"
#include "qdiff/pattern.hpp"

using namespace qdiff;
using pattern::DetectionScheme;
using states::StateKind;
using states::StateSpec;

namespace {

const pattern::SlitGeometry kGeom = pattern::default_geometry(4.0);

std::uint64_t total(const mc::DetectionRun& r) {
  return std::accumulate(r.histogram.begin(), r.histogram.end(), std::uint64_t{0});
}

pattern::PatternSeries chaotic_p2() {
  const auto g = pattern::grid_over_u(kGeom, -2 * kPi, 2 * kPi, 1001);
  return pattern::catalog_p2(StateSpec::collective(StateKind::Chaotic, 1.0), DetectionScheme::opposite(), g, kGeom);
}

}  // namespace

TEST(Simulate, FlatLaw) {
  const std::vector<double> x = linspace(0.0, 1.0, 11);
  const std::vector<double> y(x.size(), 1.0);
  const auto r = mc::simulate(mc::make_run(x, y, 1000000, 1, 10));
  EXPECT_EQ(total(r), 1000000U);
  EXPECT_EQ(r.rng.rfind("mt19937_64", 0), 0U);
  for (auto c : r.histogram) EXPECT_NEAR(static_cast<double>(c), 1e5, 4.0 * std::sqrt(1e5));
  for (double e : r.expected) EXPECT_NEAR(e, 1e5, 1e-6);
}

TEST(Simulate, SingleEvent) {
  const auto r = mc::simulate(mc::make_run(chaotic_p2(), 1, 3, 20));
  EXPECT_EQ(total(r), 1U);
}

TEST(Simulate, ExpectedIntegratesToEvents) {
  const auto r = mc::simulate(mc::make_run(chaotic_p2(), 12345, 3, 37));
  EXPECT_NEAR(std::accumulate(r.expected.begin(), r.expected.end(), 0.0), 12345.0, 1e-8);
  EXPECT_EQ(r.bin_edges.size(), 38U);
}

TEST(Simulate, DeterministicForSeed) {
  const auto s = chaotic_p2();
  const auto a = mc::simulate(mc::make_run(s, 200000, 9, 50));
  const auto b = mc::simulate(mc::make_run(s, 200000, 9, 50));
  const auto c = mc::simulate(mc::make_run(s, 200000, 10, 50));
  EXPECT_EQ(a.histogram, b.histogram);
  EXPECT_NE(a.histogram, c.histogram);
}

TEST(Simulate, Rejections) {
  const std::vector<double> x = linspace(0.0, 1.0, 5);
  EXPECT_THROW(mc::simulate(mc::make_run(x, std::vector<double>{1, 1, -0.1, 1, 1}, 10, 1, 4)), std::invalid_argument);
  EXPECT_THROW(mc::simulate(mc::make_run(x, std::vector<double>(5, 0.0), 10, 1, 4)), std::invalid_argument);
  EXPECT_THROW(mc::simulate(mc::make_run(x, std::vector<double>{1, NAN, 1, 1, 1}, 10, 1, 4)), std::invalid_argument);
  EXPECT_THROW(mc::simulate(mc::make_run(x, std::vector<double>(5, 1.0), 0, 1, 4)), std::invalid_argument);
}

TEST(Gof, SameLawPasses) {
  const auto r = mc::simulate(mc::make_run(chaotic_p2(), 1000000, 2024, 100));
  const auto g = mc::gof(r);
  EXPECT_GT(g.p_value, 0.001);
  EXPECT_EQ(g.dof, g.groups - 1);
}

TEST(Gof, CalibratedOverSeeds) {
  const auto s = chaotic_p2();
  int low = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    if (mc::gof(mc::simulate(mc::make_run(s, 20000, seed, 40))).p_value < 0.1) ++low;
  }
  EXPECT_GE(low, 2);
  EXPECT_LE(low, 30);
}

TEST(Gof, WrongLawRejected) {
  const auto g = pattern::grid_over_u(kGeom, -2 * kPi, 2 * kPi, 1001);
  const auto coherent =
      pattern::catalog_p2(StateSpec::collective(StateKind::CollectiveCoherent, 1.0), DetectionScheme::opposite(), g, kGeom);
  auto r = mc::simulate(mc::make_run(coherent, 1000000, 4, 100));
  const auto chaotic = chaotic_p2();
  r.expected = mc::expected_counts(chaotic.rho, chaotic.values, r.bin_edges, r.n_events);
  EXPECT_LT(mc::gof(r).p_value, 1e-6);
}

TEST(Gof, SingleGroupRejected) {
  const std::vector<double> x = linspace(0.0, 1.0, 5);
  const auto r = mc::simulate(mc::make_run(x, std::vector<double>(5, 1.0), 8, 1, 4));
  EXPECT_THROW(mc::gof(r), std::invalid_argument);
}

TEST(Convergence, DeviationShrinks) {
  const auto s = chaotic_p2();
  std::vector<double> dev;
  for (std::uint64_t n : {10000ULL, 100000ULL, 1000000ULL}) {
    const auto r = mc::simulate(mc::make_run(s, n, 6, 50));
    double worst = 0.0;
    for (std::size_t i = 0; i < r.histogram.size(); ++i) {
      worst = std::max(worst, std::fabs(static_cast<double>(r.histogram[i]) - r.expected[i]) / static_cast<double>(n));
    }
    dev.push_back(worst);
  }
  EXPECT_LT(dev[1], dev[0]);
  EXPECT_LT(dev[2], dev[1]);
  EXPECT_LT(dev[2], 5.0 * dev[0] / std::sqrt(100.0));
}
