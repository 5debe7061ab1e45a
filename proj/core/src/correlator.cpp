#include "qdiff/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qdiff/numeric.hpp"
#include "qdiff/rng.hpp"

namespace qdiff::correlator {

using fock::first_index;
using fock::second_index;
using states::StateKind;
using states::StateSpec;

namespace {

constexpr Mode kModes[2] = {Mode::K, Mode::KPrime};

void check_order(int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
}

std::size_t entry_count(int order) { return order == 1 ? 4U : 16U; }

}  // namespace

Complex MatrixElementTable::at(Mode x, Mode y) const {
  if (order != 1) throw std::logic_error("first-order lookup on a second-order table");
  return entries.at(first_index(x, y));
}

Complex MatrixElementTable::at(Mode x, Mode y, Mode z, Mode w) const {
  if (order != 2) throw std::logic_error("second-order lookup on a first-order table");
  return entries.at(second_index(x, y, z, w));
}

Complex MatrixElementTable::stderr_of(std::size_t i) const {
  if (covariance.empty()) return {};
  const std::size_t dim = 2 * entries.size();
  const double vr = covariance[(2 * i) * dim + 2 * i];
  const double vi = covariance[(2 * i + 1) * dim + 2 * i + 1];
  return {std::sqrt(std::max(vr, 0.0)), std::sqrt(std::max(vi, 0.0))};
}

MatrixElementTable make_table(int order, std::span<const Complex> entries) {
  check_order(order);
  if (entries.size() != entry_count(order)) throw std::invalid_argument("make_table: wrong entry count");
  MatrixElementTable t;
  t.order = order;
  t.entries.assign(entries.begin(), entries.end());
  return t;
}

void assert_symmetries(const MatrixElementTable& table, double tol) {
  double scale = 1.0;
  for (const auto& e : table.entries) scale = std::max(scale, std::abs(e));
  const double lim = tol * scale;
  auto fail = [](const std::string& what) { throw std::logic_error("matrix-element symmetry broken: " + what); };
  auto sigma = [&](std::size_t i) { return 6.0 * std::abs(table.stderr_of(i)); };

  if (table.order == 1) {
    for (Mode x : kModes) {
      for (Mode y : kModes) {
        const auto i = first_index(x, y), j = first_index(y, x);
        if (std::abs(table.entries[i] - std::conj(table.entries[j])) > lim) fail("conjugation (order 1)");
      }
      if (std::fabs(table.entries[first_index(x, x)].imag()) > lim + sigma(first_index(x, x))) {
        fail("real diagonal (order 1)");
      }
    }
    return;
  }
  for (Mode x : kModes)
    for (Mode y : kModes)
      for (Mode z : kModes)
        for (Mode w : kModes) {
          const auto i = second_index(x, y, z, w);
          const Complex e = table.entries[i];
          if (std::abs(e - table.entries[second_index(y, x, z, w)]) > lim) fail("creator exchange");
          if (std::abs(e - table.entries[second_index(x, y, w, z)]) > lim) fail("annihilator exchange");
          if (std::abs(e - std::conj(table.entries[second_index(w, z, y, x)])) > lim) fail("conjugation");
          if (z == y && w == x && std::fabs(e.imag()) > lim + sigma(i)) fail("real diagonal");
        }
}

std::string PhaseAverageSpec::describe() const {
  std::ostringstream os;
  switch (method) {
    case Method::None: os << "none"; break;
    case Method::PeriodicQuadrature: os << "quad:" << nodes; break;
    case Method::MonteCarlo: os << "mc:" << samples << "@" << seed; break;
    case Method::Pairing: os << "pairing"; break;
  }
  return os.str();
}

int minimum_quadrature_nodes(const StateSpec& spec, const fock::FockBasis& basis) {
  return 2 * states::max_total_photons(spec, basis) + 2;
}

PhaseAverageSpec default_average(const StateSpec& spec, const fock::FockBasis& basis) {
  if (states::is_phase_diffused(spec.kind)) {
    return PhaseAverageSpec::quadrature(minimum_quadrature_nodes(spec, basis) + 1);
  }
  if (states::has_random_term_phases(spec.kind)) return PhaseAverageSpec::pairing();
  return PhaseAverageSpec::none();
}

PhaseAverageSpec default_average(const StateSpec& spec) { return default_average(spec, states::auto_basis(spec)); }

namespace {

using Method = PhaseAverageSpec::Method;

void check_average(const StateSpec& spec, const fock::FockBasis& basis, const PhaseAverageSpec& avg) {
  const bool diffused = states::is_phase_diffused(spec.kind);
  const bool random_terms = states::has_random_term_phases(spec.kind);
  const std::string name(states::kind_name(spec.kind));
  switch (avg.method) {
    case Method::None:
      if (diffused || random_terms) {
        throw std::invalid_argument(name + " state requires phase averaging");
      }
      break;
    case Method::PeriodicQuadrature: {
      if (!diffused) {
        throw std::invalid_argument("periodic quadrature applies to single-phase states only, not " + name);
      }
      const int need = minimum_quadrature_nodes(spec, basis);
      if (avg.nodes < need) {
        throw std::invalid_argument("quadrature with " + std::to_string(avg.nodes) +
                                    " nodes is below the exactness bound " + std::to_string(need));
      }
      break;
    }
    case Method::MonteCarlo:
      if (!diffused && !random_terms) {
        throw std::invalid_argument(name + " state has no phases to average");
      }
      if (avg.samples < 2) throw std::invalid_argument("Monte Carlo averaging needs at least 2 samples");
      break;
    case Method::Pairing:
      if (!random_terms) throw std::invalid_argument("pairing average applies to chaotic states only");
      break;
  }
}

std::vector<Complex> flatten(const fock::NormalMoments& m, int order) {
  if (order == 1) return {m.first.begin(), m.first.end()};
  return {m.second.begin(), m.second.end()};
}

// Running mean and co-moment matrix over interleaved real/imaginary parts.
class VectorMoments {
 public:
  explicit VectorMoments(std::size_t entries) : dim_(2 * entries), mean_(dim_), delta_(dim_), comoment_(dim_ * dim_) {}

  void add(const std::vector<Complex>& x) {
    ++count_;
    const double inv = 1.0 / static_cast<double>(count_);
    for (std::size_t i = 0; i < x.size(); ++i) {
      delta_[2 * i] = x[i].real() - mean_[2 * i];
      delta_[2 * i + 1] = x[i].imag() - mean_[2 * i + 1];
    }
    for (std::size_t i = 0; i < dim_; ++i) mean_[i] += delta_[i] * inv;
    // C += delta (x - mean_new)^T, and x - mean_new = delta (1 - 1/n).
    const double f = 1.0 - inv;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double di = delta_[i] * f;
      if (di == 0.0) continue;
      double* row = comoment_.data() + i * dim_;
      for (std::size_t j = 0; j < dim_; ++j) row[j] += di * delta_[j];
    }
  }

  std::vector<Complex> mean() const {
    std::vector<Complex> out(dim_ / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {mean_[2 * i], mean_[2 * i + 1]};
    return out;
  }

  // Covariance of the mean estimator.
  std::vector<double> covariance_of_mean() const {
    std::vector<double> out(comoment_);
    const double n = static_cast<double>(count_);
    for (auto& c : out) c /= (n - 1.0) * n;
    return out;
  }

 private:
  std::size_t dim_;
  std::uint64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> delta_;
  std::vector<double> comoment_;
};

constexpr std::uint64_t kMonteCarloBatch = 4096;
constexpr std::uint64_t kPhaseStream = 0x50484153;  // per-call stream tag

// Multiplies every amplitude by exp(i * k'-occupation * phi).
fock::TwoModeState rotate_kprime(const fock::TwoModeState& base, double phi) {
  const auto& b = base.basis();
  const int s = b.n_max() + 1;
  std::vector<Complex> powers(static_cast<std::size_t>(s));
  const Complex step = std::polar(1.0, phi);
  powers[0] = 1.0;
  for (int m = 1; m < s; ++m) {
    // Refresh from polar() periodically to keep the recurrence from drifting.
    powers[static_cast<std::size_t>(m)] = m % 16 == 0 ? std::polar(1.0, m * phi) : powers[static_cast<std::size_t>(m - 1)] * step;
  }
  std::vector<Complex> amps(base.amplitudes().begin(), base.amplitudes().end());
  for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= powers[static_cast<std::size_t>(b.occupation(i).second)];
  return fock::TwoModeState(b, std::move(amps), base.truncation_loss());
}

}  // namespace

MatrixElementTable matrix_elements(const StateSpec& spec, const fock::FockBasis& basis, int order,
                                   const PhaseAverageSpec& avg) {
  check_order(order);
  check_average(spec, basis, avg);
  MatrixElementTable table;
  table.order = order;
  table.averaging = avg.describe();

  switch (avg.method) {
    case Method::None: {
      table.entries = flatten(fock::normal_moments(states::build_state(spec, basis), order), order);
      break;
    }
    case Method::Pairing: {
      StateSpec plain = spec;
      plain.phases.clear();
      table.entries = flatten(fock::diagonal_moments(states::build_state(plain, basis)), order);
      break;
    }
    case Method::PeriodicQuadrature: {
      StateSpec plain = spec;
      plain.phases.clear();
      const auto base = states::build_state(plain, basis);
      std::vector<NeumaierSum> re(entry_count(order)), im(entry_count(order));
      for (int j = 0; j < avg.nodes; ++j) {
        const double phi = 2.0 * kPi * j / avg.nodes;
        const auto vals = flatten(fock::normal_moments(rotate_kprime(base, phi), order), order);
        for (std::size_t e = 0; e < vals.size(); ++e) {
          re[e].add(vals[e].real());
          im[e].add(vals[e].imag());
        }
      }
      table.entries.resize(entry_count(order));
      for (std::size_t e = 0; e < table.entries.size(); ++e) {
        table.entries[e] = {re[e].value() / avg.nodes, im[e].value() / avg.nodes};
      }
      table.evaluations = avg.nodes;
      break;
    }
    case Method::MonteCarlo: {
      StateSpec plain = spec;
      plain.phases.clear();
      const auto base = states::build_state(plain, basis);
      const auto amps0 = base.amplitudes();
      VectorMoments acc(entry_count(order));
      const bool per_term = states::has_random_term_phases(spec.kind);
      std::vector<std::size_t> support;
      for (std::size_t i = 0; i < amps0.size(); ++i) {
        if (amps0[i] != Complex{}) support.push_back(i);
      }
      const auto total = static_cast<std::uint64_t>(avg.samples);
      for (std::uint64_t batch = 0; batch * kMonteCarloBatch < total; ++batch) {
        auto eng = batch_engine(avg.seed, kPhaseStream, batch);
        const std::uint64_t end = std::min(total, (batch + 1) * kMonteCarloBatch);
        for (std::uint64_t s = batch * kMonteCarloBatch; s < end; ++s) {
          if (per_term) {
            std::vector<Complex> amps(amps0.begin(), amps0.end());
            for (std::size_t i : support) amps[i] *= std::polar(1.0, 2.0 * kPi * uniform01(eng));
            const fock::TwoModeState st(basis, std::move(amps), base.truncation_loss());
            acc.add(flatten(fock::normal_moments(st, order), order));
          } else {
            const double phi = 2.0 * kPi * uniform01(eng);
            acc.add(flatten(fock::normal_moments(rotate_kprime(base, phi), order), order));
          }
        }
      }
      table.entries = acc.mean();
      table.covariance = acc.covariance_of_mean();
      table.evaluations = avg.samples;
      break;
    }
  }
  assert_symmetries(table, 1e-12);
  return table;
}

MatrixElementTable matrix_elements(const StateSpec& spec, int order, const PhaseAverageSpec& avg) {
  return matrix_elements(spec, states::auto_basis(spec), order, avg);
}

MatrixElementTable matrix_elements(const StateSpec& spec, int order) {
  const auto basis = states::auto_basis(spec);
  return matrix_elements(spec, basis, order, default_average(spec, basis));
}

namespace {

// Per-mode phase at reduced coordinate u: mode k is emitted from slit A,
// mode k' from slit B.
double theta(Mode x, double u) { return x == Mode::K ? -u : u; }

struct Pair {
  Mode z, w;
};
constexpr Pair kPairs[4] = {{Mode::K, Mode::K}, {Mode::K, Mode::KPrime}, {Mode::KPrime, Mode::K}, {Mode::KPrime, Mode::KPrime}};

// Phase of the annihilator pair a_Z a_W: Z is detected at x2, W at x1.
double pair_phase(const Pair& p, double u1, double u2) { return theta(p.z, u2) + theta(p.w, u1); }

}  // namespace

std::array<Complex, 4> p1_weights(double u1, double u2) {
  std::array<Complex, 4> w{};
  for (Mode x : kModes)
    for (Mode y : kModes) w[first_index(x, y)] = std::polar(0.5, theta(y, u2) - theta(x, u1));
  return w;
}

GroupWeights p2_group_weights(double u1, double u2, AssemblyFault fault) {
  // Group membership over (i, j) indices into kPairs.
  static constexpr int kGroupOf[4][4] = {
      {1, 2, 3, 1},  // i = 0: (0,0)B (0,1)C (0,2)D (0,3)B
      {2, 0, 0, 3},  // i = 1: (1,0)C (1,1)A (1,2)A (1,3)D
      {3, 0, 0, 2},  // i = 2: (2,0)D (2,1)A (2,2)A (2,3)C
      {1, 3, 2, 1},  // i = 3: (3,0)B (3,1)D (3,2)C (3,3)B
  };
  // Index pairs of the B and C groups in matching order, used by the fault hook.
  static constexpr int kB[4][2] = {{0, 0}, {0, 3}, {3, 0}, {3, 3}};
  static constexpr int kC[4][2] = {{0, 1}, {1, 0}, {2, 3}, {3, 2}};

  double phase[4];
  for (int i = 0; i < 4; ++i) phase[i] = pair_phase(kPairs[i], u1, u2);

  GroupWeights g;
  std::array<Complex, 16>* groups[4] = {&g.a, &g.b, &g.c, &g.d};
  auto entry = [](int i, int j) {
    // Creators are the adjoint of pair i: (a_Z a_W)^dag = a_W^dag a_Z^dag.
    return second_index(kPairs[i].w, kPairs[i].z, kPairs[j].z, kPairs[j].w);
  };
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      (*groups[kGroupOf[i][j]])[entry(i, j)] += std::polar(1.0, phase[j] - phase[i]);
    }
  if (fault == AssemblyFault::SwapBC) {
    for (int t = 0; t < 4; ++t) {
      const auto eb = entry(kB[t][0], kB[t][1]);
      const auto ec = entry(kC[t][0], kC[t][1]);
      const Complex wb = std::polar(1.0, phase[kC[t][1]] - phase[kC[t][0]]);
      const Complex wc = std::polar(1.0, phase[kB[t][1]] - phase[kB[t][0]]);
      g.b[eb] = wb;
      g.c[ec] = wc;
    }
  }
  return g;
}

Complex contract(const MatrixElementTable& table, std::span<const Complex> w) {
  if (w.size() != table.entries.size()) throw std::invalid_argument("contract: weight count mismatch");
  NeumaierSum re, im;
  for (std::size_t e = 0; e < w.size(); ++e) {
    const Complex p = w[e] * table.entries[e];
    re.add(p.real());
    im.add(p.imag());
  }
  return {re.value(), im.value()};
}

double contract_stderr(const MatrixElementTable& table, std::span<const Complex> w) {
  if (table.exact()) return 0.0;
  // Re(w M) = Re w Re M - Im w Im M, a linear form over interleaved parts.
  const std::size_t dim = 2 * w.size();
  std::vector<double> g(dim);
  for (std::size_t e = 0; e < w.size(); ++e) {
    g[2 * e] = w[e].real();
    g[2 * e + 1] = -w[e].imag();
  }
  double var = 0.0;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) var += g[i] * table.covariance[i * dim + j] * g[j];
  return std::sqrt(std::max(var, 0.0));
}

double checked_real(const MatrixElementTable& table, std::span<const Complex> w) {
  const Complex v = contract(table, w);
  double scale = 0.0;
  for (std::size_t e = 0; e < w.size(); ++e) scale += std::abs(w[e]) * std::abs(table.entries[e]);
  double sigma = 0.0;
  if (!table.exact()) {
    // Standard error of the imaginary part: Im(w M) = Re(-i w M).
    std::vector<Complex> wi(w.begin(), w.end());
    for (auto& x : wi) x *= Complex(0.0, -1.0);
    sigma = contract_stderr(table, wi);
  }
  if (std::fabs(v.imag()) > kImagTolerance * std::max(1.0, scale) + 6.0 * sigma) {
    std::ostringstream os;
    os << "detection probability has imaginary residue " << v.imag() << " (inconsistent table)";
    throw std::logic_error(os.str());
  }
  return v.real();
}

double p1(const MatrixElementTable& table, double u1, double u2) {
  if (table.order != 1) throw std::invalid_argument("p1 needs a first-order table");
  const auto w = p1_weights(u1, u2);
  return checked_real(table, w);
}

double p2(const MatrixElementTable& table, double u1, double u2, AssemblyFault fault) {
  if (table.order != 2) throw std::invalid_argument("p2 needs a second-order table");
  const auto g = p2_group_weights(u1, u2, fault);
  std::array<Complex, 16> w{};
  for (std::size_t e = 0; e < 16; ++e) w[e] = 0.25 * (g.a[e] + g.b[e] + g.c[e] + g.d[e]);
  return checked_real(table, w);
}

SecondOrderGroups second_order_groups(const MatrixElementTable& table, double u1, double u2) {
  if (table.order != 2) throw std::invalid_argument("second_order_groups needs a second-order table");
  const auto g = p2_group_weights(u1, u2);
  return {contract(table, g.a), contract(table, g.b), contract(table, g.c), contract(table, g.d)};
}

IdentityReport interference_identity_check(const MatrixElementTable& table, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("identity check needs at least two grid points");
  const auto grid = linspace(-kPi, kPi, grid_points);
  struct Point {
    double cd, a, b;
  };
  std::vector<Point> pts;
  pts.reserve(grid.size() * grid.size());
  double peak = 0.0;
  for (double u1 : grid)
    for (double u2 : grid) {
      const auto s = second_order_groups(table, u1, u2);
      pts.push_back({std::abs(s.c + s.d), s.a.real(), s.b.real()});
      peak = std::max({peak, std::fabs(s.a.real()), std::fabs(s.b.real())});
    }
  IdentityReport r;
  r.points = static_cast<int>(pts.size());
  if (peak == 0.0) return r;
  const double guard = 1e-6 * peak;
  for (const auto& p : pts) {
    const double bound = 2.0 * std::sqrt(std::max(p.a, 0.0) * std::max(p.b, 0.0));
    r.max_interference = std::max(r.max_interference, p.cd);
    r.max_bound = std::max(r.max_bound, bound);
    r.squared_residual = std::max(r.squared_residual, std::fabs(p.cd * p.cd - 4.0 * p.a * p.b) / (peak * peak));
    if (p.a > guard && p.b > guard) r.residual = std::max(r.residual, std::fabs(p.cd - bound));
  }
  return r;
}

IdentityReport interference_identity_check(const StateSpec& spec, int grid_points) {
  return interference_identity_check(matrix_elements(spec, 2), grid_points);
}

}  // namespace qdiff::correlator
