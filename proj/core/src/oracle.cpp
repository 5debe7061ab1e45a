#include "qdiff/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qdiff/numeric.hpp"
#include "qdiff/rng.hpp"

namespace qdiff::oracle {

using Complex = std::complex<double>;
using pattern::DetectionScheme;
using pattern::PatternSeries;
using pattern::SlitGeometry;

std::string_view model_name(FieldModel model) noexcept {
  switch (model) {
    case FieldModel::FixedPhase: return "fixed-phase";
    case FieldModel::RandomRelativePhase: return "random-relative-phase";
    case FieldModel::CircularGaussian: return "circular-gaussian";
  }
  return "unknown";
}

namespace {

constexpr std::uint64_t kBatch = 1024;
constexpr std::uint64_t kEnsembleStream = 0x454E53;

// Welford accumulator for one scalar per grid point.
struct Running {
  std::vector<double> mean, m2;
  std::uint64_t n = 0;

  explicit Running(std::size_t size) : mean(size), m2(size) {}

  void add(std::span<const double> x) {
    ++n;
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - mean[i];
      mean[i] += d * inv;
      m2[i] += d * (x[i] - mean[i]);
    }
  }

  std::vector<double> stderr_of_mean() const {
    std::vector<double> out(mean.size());
    if (n < 2) return out;
    const double f = 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(std::max(m2[i], 0.0) * f);
    return out;
  }
};

struct Accumulated {
  Running corr;     // Re E*(rho1) E(rho2)
  Running joint;    // I(rho1) I(rho2)
  Running i1, i2;   // I(rho1), I(rho2)
  explicit Accumulated(std::size_t n) : corr(n), joint(n), i1(n), i2(n) {}
};

Accumulated run(const EnsembleSpec& spec, const DetectionScheme& scheme, std::span<const double> grid,
                const SlitGeometry& geom) {
  pattern::validate(geom);
  if (spec.samples < 1) throw std::invalid_argument("ensemble needs at least one sample");
  if (spec.sub_sources_per_slit < 1) throw std::invalid_argument("need at least one sub-source per slit");
  const int M = spec.sub_sources_per_slit;
  const std::size_t G = grid.size();
  const double q = geom.wavenumber / geom.screen_distance;

  // Sub-source positions: midpoints of M equal strips across each slit.
  std::vector<double> pos[2];
  const double centre[2] = {0.5 * geom.slit_separation, -0.5 * geom.slit_separation};
  for (int x = 0; x < 2; ++x)
    for (int j = 0; j < M; ++j) pos[x].push_back(centre[x] + geom.slit_width * ((j + 0.5) / M - 0.5));

  // Phase factors exp(-i q s rho) for detector d in {1, 2}, slit x, source j.
  std::vector<Complex> F[2][2];
  for (int d = 0; d < 2; ++d)
    for (int x = 0; x < 2; ++x) {
      F[d][x].resize(G * static_cast<std::size_t>(M));
      for (std::size_t g = 0; g < G; ++g) {
        const auto rr = scheme.detectors(grid[g]);
        const double rho = d == 0 ? rr.first : rr.second;
        for (int j = 0; j < M; ++j) {
          F[d][x][g * static_cast<std::size_t>(M) + static_cast<std::size_t>(j)] =
              std::polar(1.0, -q * pos[x][static_cast<std::size_t>(j)] * rho);
        }
      }
    }
  // Coherent slit sums S[d][x][g] = (1/M) sum_j F.
  std::vector<Complex> S[2][2];
  for (int d = 0; d < 2; ++d)
    for (int x = 0; x < 2; ++x) {
      S[d][x].resize(G);
      for (std::size_t g = 0; g < G; ++g) {
        Complex acc{};
        for (int j = 0; j < M; ++j) acc += F[d][x][g * static_cast<std::size_t>(M) + static_cast<std::size_t>(j)];
        S[d][x][g] = acc / static_cast<double>(M);
      }
    }

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Accumulated acc(G);
  std::vector<Complex> E[2] = {std::vector<Complex>(G), std::vector<Complex>(G)};
  std::vector<double> corr(G), joint(G), i1(G), i2(G);
  std::vector<Complex> z[2] = {std::vector<Complex>(static_cast<std::size_t>(M)),
                               std::vector<Complex>(static_cast<std::size_t>(M))};

  auto record = [&]() {
    for (std::size_t g = 0; g < G; ++g) {
      const double a = std::norm(E[0][g]);
      const double b = std::norm(E[1][g]);
      corr[g] = (std::conj(E[0][g]) * E[1][g]).real();
      joint[g] = a * b;
      i1[g] = a;
      i2[g] = b;
    }
    acc.corr.add(corr);
    acc.joint.add(joint);
    acc.i1.add(i1);
    acc.i2.add(i2);
  };

  const auto total = static_cast<std::uint64_t>(spec.model == FieldModel::FixedPhase ? 1 : spec.samples);
  for (std::uint64_t batch = 0; batch * kBatch < total; ++batch) {
    auto eng = batch_engine(spec.seed, kEnsembleStream, batch);
    const std::uint64_t end = std::min(total, (batch + 1) * kBatch);
    for (std::uint64_t s = batch * kBatch; s < end; ++s) {
      switch (spec.model) {
        case FieldModel::FixedPhase:
          for (int d = 0; d < 2; ++d)
            for (std::size_t g = 0; g < G; ++g) E[d][g] = inv_sqrt2 * (S[d][0][g] + S[d][1][g]);
          break;
        case FieldModel::RandomRelativePhase: {
          const Complex pa = std::polar(1.0, 2.0 * kPi * uniform01(eng));
          const Complex pb = std::polar(1.0, 2.0 * kPi * uniform01(eng));
          for (int d = 0; d < 2; ++d)
            for (std::size_t g = 0; g < G; ++g) E[d][g] = inv_sqrt2 * (pa * S[d][0][g] + pb * S[d][1][g]);
          break;
        }
        case FieldModel::CircularGaussian: {
          // Unit mean intensity per sub-source before the 1/sqrt(M) scaling.
          const double scale = std::sqrt(0.5 / M);
          for (int x = 0; x < 2; ++x)
            for (int j = 0; j < M; ++j) {
              const auto p = normal_pair(eng);
              z[x][static_cast<std::size_t>(j)] = {scale * p.first, scale * p.second};
            }
          for (int d = 0; d < 2; ++d)
            for (std::size_t g = 0; g < G; ++g) {
              Complex e{};
              for (int x = 0; x < 2; ++x) {
                const Complex* f = F[d][x].data() + g * static_cast<std::size_t>(M);
                for (int j = 0; j < M; ++j) e += z[x][static_cast<std::size_t>(j)] * f[j];
              }
              E[d][g] = inv_sqrt2 * e;
            }
          break;
        }
      }
      record();
    }
  }
  return acc;
}

PatternSeries shell(const EnsembleSpec& spec, int order, const DetectionScheme& scheme, std::span<const double> grid,
                    const SlitGeometry& geom) {
  PatternSeries s;
  s.route = "ensemble";
  s.order = order;
  s.scheme = scheme;
  s.geometry = geom;
  const auto kind = spec.model == FieldModel::FixedPhase            ? states::StateKind::CollectiveCoherent
                    : spec.model == FieldModel::RandomRelativePhase ? states::StateKind::PhaseDiffused
                                                                    : states::StateKind::Chaotic;
  s.state = states::StateSpec::collective(kind, 1.0);
  s.rho.assign(grid.begin(), grid.end());
  for (double r : grid) {
    const auto d = pattern::reduce_coords(geom, r);
    s.u.push_back(d.u);
    s.v.push_back(d.v);
  }
  s.defined.assign(grid.size(), true);
  s.averaging = std::string("ensemble:") + std::string(model_name(spec.model)) + ":" +
                std::to_string(spec.samples) + "@" + std::to_string(spec.seed) + ":M=" +
                std::to_string(spec.sub_sources_per_slit);
  s.signed_shape = order == 1 && scheme.kind != DetectionScheme::Kind::SamePoint;
  return s;
}

}  // namespace

PatternSeries ensemble_p1(const EnsembleSpec& spec, const DetectionScheme& scheme, std::span<const double> grid,
                          const SlitGeometry& geom) {
  const auto acc = run(spec, scheme, grid, geom);
  PatternSeries s = shell(spec, 1, scheme, grid, geom);
  s.values = acc.corr.mean;
  s.shape = s.values;
  s.stderr_estimate = acc.corr.stderr_of_mean();
  return s;
}

PatternSeries ensemble_p2(const EnsembleSpec& spec, const DetectionScheme& scheme, std::span<const double> grid,
                          const SlitGeometry& geom) {
  const auto acc = run(spec, scheme, grid, geom);
  PatternSeries s = shell(spec, 2, scheme, grid, geom);
  s.values = acc.joint.mean;
  s.shape = s.values;
  s.stderr_estimate = acc.joint.stderr_of_mean();
  return s;
}

PatternSeries ensemble_g2(const EnsembleSpec& spec, const DetectionScheme& scheme, std::span<const double> grid,
                          const SlitGeometry& geom) {
  const auto acc = run(spec, scheme, grid, geom);
  PatternSeries s = shell(spec, 2, scheme, grid, geom);
  s.quantity = "g2";
  const std::size_t G = grid.size();
  std::vector<double> den(G);
  double den_max = 0.0;
  for (std::size_t g = 0; g < G; ++g) {
    den[g] = acc.i1.mean[g] * acc.i2.mean[g];
    den_max = std::max(den_max, den[g]);
  }
  s.values.resize(G);
  for (std::size_t g = 0; g < G; ++g) {
    if (den_max <= 0.0 || den[g] < pattern::kUndefinedThreshold * den_max) {
      s.defined[g] = false;
      s.values[g] = std::numeric_limits<double>::quiet_NaN();
    } else {
      s.values[g] = acc.joint.mean[g] / den[g];
    }
  }
  s.shape = s.values;
  return s;
}

}  // namespace qdiff::oracle
