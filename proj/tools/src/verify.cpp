#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

#include "commands.hpp"
#include "output.hpp"
#include "qdiff/catalog.hpp"
#include "qdiff/mc.hpp"
#include "qdiff/numeric.hpp"
#include "qdiff/oracle.hpp"
#include "qdiff/pattern.hpp"
#include "qdiff_cli/cli.hpp"

namespace qdiff::cli {

using correlator::AssemblyFault;
using correlator::PhaseAverageSpec;
using nlohmann::json;
using pattern::DetectionScheme;
using states::Distribution;
using states::StateKind;
using states::StateSpec;

namespace {

struct CheckResult {
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  json detail = json::object();
};

struct Settings {
  AssemblyFault fault = AssemblyFault::None;
  std::uint64_t seed = 1;
};

const pattern::SlitGeometry kGeom = pattern::default_geometry(4.0);
constexpr double kEps = 1e-14;

StateSpec col(StateKind k, double n, double eps = kEps) { return StateSpec::collective(k, n, eps); }
StateSpec sub(StateKind k, int n) { return StateSpec::substate(k, n); }

std::vector<StateSpec> catalog_states() {
  std::vector<StateSpec> out;
  for (double n : {0.5, 1.0, 2.0, 4.0}) {
    out.push_back(col(StateKind::CollectiveCoherent, n));
    out.push_back(col(StateKind::PhaseDiffused, n));
  }
  out.push_back(col(StateKind::Chaotic, 0.5));
  out.push_back(col(StateKind::Chaotic, 1.0));
  for (int N : {2, 3, 4, 6}) {
    out.push_back(sub(StateKind::CoherentSubstate, N));
    out.push_back(sub(StateKind::PhaseDiffusedSubstate, N));
    out.push_back(sub(StateKind::ChaoticSubstate, N));
    out.push_back(sub(StateKind::Noon, N));
    if (N % 2 == 0) out.push_back(sub(StateKind::NumberState, N));
  }
  return out;
}

// z-scores at the 3 sigma level; passes when the excursion count stays
// within the 99.9% quantile of what chance alone produces.
struct SigmaTally {
  double floor = 0.0;
  int count = 0;
  int excursions = 0;
  double max_z = 0.0;

  void add(double deviation, double sigma) {
    ++count;
    const double excess = std::max(std::fabs(deviation) - floor, 0.0);
    const double z = excess == 0.0 ? 0.0 : (sigma > 0.0 ? excess / sigma : 1e300);
    max_z = std::max(max_z, z);
    if (z > 3.0) ++excursions;
  }
  int allowed() const {
    const double p = std::erfc(3.0 / std::sqrt(2.0));
    double cdf = 0.0;
    for (int k = 0; k <= count; ++k) {
      cdf += std::exp(std::lgamma(count + 1.0) - std::lgamma(k + 1.0) - std::lgamma(count - k + 1.0) +
                      k * std::log(p) + (count - k) * std::log1p(-p));
      if (cdf >= 0.999) return k;
    }
    return count;
  }
  bool ok() const { return excursions <= allowed() && max_z < 1e300; }
  json to_json() const {
    return {{"checked", count}, {"beyond_3_sigma", excursions}, {"allowed", allowed()}, {"max_abs_z", max_z}};
  }
};

CheckResult sum_rules(const Settings&) {
  CheckResult r{false, 0.0, 1e-10};
  for (auto dist : {Distribution::Poisson, Distribution::BoseEinstein}) {
    for (double n : {1.0, 2.0, 4.0, 9.0}) {
      const auto s = states::check_sum_rules(dist, n, states::kDefaultEpsilon);
      r.residual = std::max({r.residual, s.norm_residual, s.first_residual, s.second_residual});
    }
  }
  r.passed = r.residual < r.tolerance;
  return r;
}

CheckResult elements(const Settings&) {
  CheckResult r{false, 0.0, 1e-9};
  for (const auto& spec : catalog_states()) {
    for (int order : {1, 2}) {
      const auto e = correlator::matrix_elements(spec, order);
      const auto c = pattern::catalog_elements(spec, order);
      double scale = 1.0, d = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) {
        scale = std::max(scale, std::abs(c.entries[i]));
        d = std::max(d, std::abs(e.entries[i] - c.entries[i]));
      }
      r.residual = std::max(r.residual, d / scale);
    }
  }
  r.passed = r.residual < r.tolerance;
  r.detail = {{"states", catalog_states().size()}};
  return r;
}

CheckResult elements_mc(const Settings& s) {
  CheckResult r{false, 0.0, 3.0};
  SigmaTally tally{1e-9};
  std::uint64_t seed = s.seed;
  for (const auto& spec : {col(StateKind::Chaotic, 1.0, 1e-13), sub(StateKind::ChaoticSubstate, 2),
                           sub(StateKind::ChaoticSubstate, 4)}) {
    for (int order : {1, 2}) {
      const auto t = correlator::matrix_elements(spec, order,
                                                 PhaseAverageSpec::monte_carlo(correlator::kDefaultMonteCarloSamples, seed++));
      const auto c = pattern::catalog_elements(spec, order);
      for (std::size_t i = 0; i < t.size(); ++i) {
        const auto d = t.entries[i] - c.entries[i];
        const auto se = t.stderr_of(i);
        tally.add(d.real(), se.real());
        tally.add(d.imag(), se.imag());
      }
    }
  }
  r.residual = tally.max_z;
  r.passed = tally.ok();
  r.detail = tally.to_json();
  return r;
}

CheckResult identity(const Settings&) {
  CheckResult r{false, 0.0, 1e-9};
  for (double n : {0.5, 1.0, 2.0, 4.0}) {
    const auto rep = correlator::interference_identity_check(col(StateKind::CollectiveCoherent, n));
    r.residual = std::max({r.residual, rep.residual, rep.squared_residual});
  }
  for (int N : {2, 3, 4, 6}) {
    const auto rep = correlator::interference_identity_check(sub(StateKind::CoherentSubstate, N));
    r.residual = std::max({r.residual, rep.residual, rep.squared_residual});
  }
  const auto cha = correlator::interference_identity_check(col(StateKind::Chaotic, 1.0));
  const bool violated = cha.max_interference < 1e-12 && cha.max_bound > 0.1;
  r.passed = r.residual < r.tolerance && violated;
  r.detail = {{"chaotic_max_interference", cha.max_interference},
              {"chaotic_max_bound", cha.max_bound},
              {"chaotic_violates_identity", violated}};
  return r;
}

CheckResult shape_squaring(const Settings& s) {
  CheckResult r{false, 0.0, 1e-9};
  const auto grid = pattern::default_grid(kGeom);
  const pattern::EngineOptions opts{s.fault};
  for (const auto& spec : {col(StateKind::CollectiveCoherent, 1.0), col(StateKind::PhaseDiffused, 1.0),
                           col(StateKind::Chaotic, 1.0), sub(StateKind::CoherentSubstate, 3),
                           sub(StateKind::PhaseDiffusedSubstate, 4), sub(StateKind::ChaoticSubstate, 3),
                           sub(StateKind::Noon, 2), sub(StateKind::NumberState, 2), sub(StateKind::NumberState, 6)}) {
    const bool noon = spec.kind == StateKind::Noon;
    const auto second_scheme = noon ? DetectionScheme::same_point() : DetectionScheme::opposite();
    const auto t1 = correlator::matrix_elements(spec, 1);
    const auto t2 = correlator::matrix_elements(spec, 2);
    const auto first = pattern::engine_pattern(t1, spec, DetectionScheme::opposite(), grid, kGeom, opts);
    const auto second = pattern::engine_pattern(t2, spec, second_scheme, grid, kGeom, opts);
    const double scale = spec.kind == StateKind::NumberState && spec.n_photons > 2 ? 2.0 * spec.n_photons : 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto [r1, r2] = second_scheme.detectors(grid[i]);
      const double bg =
          pattern::catalog_shape(spec, 2, pattern::reduce_coords(kGeom, r1), pattern::reduce_coords(kGeom, r2)).background;
      r.residual = std::max(r.residual, std::fabs((second.shape[i] - bg) - scale * first.shape[i] * first.shape[i]));
    }
  }
  r.passed = r.residual < r.tolerance;
  return r;
}

CheckResult patterns(const Settings& s) {
  CheckResult r{false, 0.0, 1e-9};
  const auto grid = pattern::grid_over_u(kGeom, -2 * kPi, 2 * kPi, 201);
  const pattern::EngineOptions opts{s.fault};
  json worst_case;
  for (const auto& spec : catalog_states()) {
    for (int order : {1, 2}) {
      const auto table = correlator::matrix_elements(spec, order);
      for (const auto& scheme : {DetectionScheme::same_point(), DetectionScheme::opposite(),
                                 DetectionScheme::general(pattern::rho_for_u(kGeom, 0.8))}) {
        const auto e = pattern::engine_pattern(table, spec, scheme, grid, kGeom, opts);
        const auto c = pattern::catalog_pattern(spec, order, scheme, grid, kGeom);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          const double d = std::fabs(e.values[i] - c.values[i]) / std::max(1.0, c.scale_factor);
          if (d > r.residual) {
            r.residual = d;
            worst_case = {{"state", states::describe(spec)}, {"order", order},
                          {"scheme", pattern::scheme_name(scheme.kind)}};
          }
        }
      }
    }
  }
  r.passed = r.residual < r.tolerance;
  r.detail = {{"worst", worst_case}};
  return r;
}

CheckResult g2_values(const Settings&) {
  CheckResult r{false, 0.0, 1e-9};
  const auto grid = pattern::grid_over_u(kGeom, -2 * kPi, 2 * kPi, 201);
  const std::vector<double> zero{0.0};
  const std::vector<double> bg{pattern::rho_for_u(kGeom, 4 * kPi)};
  struct Case {
    StateSpec spec;
    const std::vector<double>* where;
    double want;
  };
  const std::vector<Case> cases = {
      {col(StateKind::CollectiveCoherent, 1.0), &grid, 1.0}, {sub(StateKind::CoherentSubstate, 2), &grid, 0.5},
      {sub(StateKind::CoherentSubstate, 4), &grid, 0.75},    {sub(StateKind::Noon, 2), &grid, 1.0},
      {col(StateKind::Chaotic, 1.0), &zero, 2.0},            {col(StateKind::Chaotic, 1.0), &bg, 1.0},
      {col(StateKind::PhaseDiffused, 1.0), &zero, 1.5},      {col(StateKind::PhaseDiffused, 1.0), &bg, 0.5},
      {sub(StateKind::NumberState, 2), &zero, 1.0}};
  double engine = 0.0;
  for (const auto& c : cases) {
    for (auto route : {pattern::Route::Catalog, pattern::Route::Engine}) {
      const auto s = pattern::g2(c.spec, *c.where, kGeom, route);
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.defined[i]) continue;
        const double d = std::fabs(s.values[i] - c.want);
        if (route == pattern::Route::Catalog) {
          r.residual = std::max(r.residual, d);
        } else {
          engine = std::max(engine, d);
        }
      }
    }
  }
  r.passed = r.residual < r.tolerance && engine < 1e-3;
  r.detail = {{"engine_route_deviation", engine}, {"engine_route_tolerance", 1e-3}};
  return r;
}

CheckResult reconstruction(const Settings&) {
  CheckResult r{false, 0.0, 1e-8};
  const auto grid = pattern::grid_over_u(kGeom, -2 * kPi, 2 * kPi, 101);
  struct Family {
    StateKind collective, substate;
    Distribution dist;
  };
  for (const auto& f : {Family{StateKind::CollectiveCoherent, StateKind::CoherentSubstate, Distribution::Poisson},
                        Family{StateKind::PhaseDiffused, StateKind::PhaseDiffusedSubstate, Distribution::Poisson},
                        Family{StateKind::Chaotic, StateKind::ChaoticSubstate, Distribution::BoseEinstein}}) {
    for (double n : {0.5, 1.0, 2.0}) {
      const int n_max = states::total_cutoff(f.dist, n, 1e-12);
      for (int order : {1, 2}) {
        const auto target =
            pattern::engine_pattern(col(f.collective, n), order, DetectionScheme::opposite(), grid, kGeom);
        std::vector<double> sum(grid.size());
        for (int N = order; N <= n_max; ++N) {
          const double w = states::weight(f.dist, n, N);
          const auto p = pattern::engine_pattern(sub(f.substate, N), order, DetectionScheme::opposite(), grid, kGeom);
          for (std::size_t i = 0; i < grid.size(); ++i) sum[i] += w * p.values[i];
        }
        double peak = 1.0;
        for (double v : target.values) peak = std::max(peak, std::fabs(v));
        for (std::size_t i = 0; i < grid.size(); ++i) {
          r.residual = std::max(r.residual, std::fabs(sum[i] - target.values[i]) / peak);
        }
      }
    }
  }
  r.passed = r.residual < r.tolerance;
  return r;
}

CheckResult widths(const Settings&) {
  CheckResult r{false, 0.0, 1e-4};
  const double w1 = pattern::effective_width_streaming(1, kGeom);
  const double w2 = pattern::effective_width_streaming(2, kGeom);
  r.residual = std::max(std::fabs(w1 - 1.0), std::fabs(w2 - 0.5));
  r.passed = r.residual < r.tolerance;
  r.detail = {{"order_1", w1}, {"order_2", w2}};
  return r;
}

CheckResult degeneracy(const Settings& s) {
  CheckResult r{false, 0.0, 1e-12};
  const auto grid = pattern::default_grid(kGeom);
  const pattern::EngineOptions opts{s.fault};
  const std::vector<StateSpec> specs = {col(StateKind::CollectiveCoherent, 1.0), col(StateKind::PhaseDiffused, 1.0),
                                        col(StateKind::Chaotic, 1.0), sub(StateKind::Noon, 2),
                                        sub(StateKind::NumberState, 2)};
  auto curve = [&](const StateSpec& spec, int order) {
    auto v = pattern::engine_pattern(correlator::matrix_elements(spec, order), spec, DetectionScheme::opposite(), grid,
                                     kGeom, opts)
                 .shape;
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::fabs(x));
    for (auto& x : v) x /= peak;
    return v;
  };
  auto dev = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
    return d;
  };
  std::vector<std::vector<double>> c1, c2;
  for (const auto& spec : specs) {
    c1.push_back(curve(spec, 1));
    c2.push_back(curve(spec, 2));
  }
  double within = 0.0, between = 1e300, distinct = 1e300;
  for (std::size_t i = 1; i < c1.size(); ++i) {
    between = std::min(between, dev(c1[0], c1[i]));
    for (std::size_t j = i + 1; j < c1.size(); ++j) within = std::max(within, dev(c1[i], c1[j]));
  }
  for (std::size_t i = 0; i < c2.size(); ++i)
    for (std::size_t j = i + 1; j < c2.size(); ++j) distinct = std::min(distinct, dev(c2[i], c2[j]));
  r.residual = within;
  r.passed = within < r.tolerance && between > 0.1 && distinct > 0.1;
  r.detail = {{"first_order_within_group", within},
              {"first_order_coherent_vs_others", between},
              {"second_order_min_pairwise", distinct},
              {"distinct_threshold", 0.1}};
  return r;
}

CheckResult ensemble(const Settings& s) {
  CheckResult r{false, 0.0, 1e-3};
  const auto coarse = pattern::grid_over_u(kGeom, -2 * kPi, 2 * kPi, 21);
  SigmaTally tally;
  const oracle::EnsembleSpec thermal{oracle::FieldModel::CircularGaussian, 20000, s.seed, 51};
  const auto t2 = oracle::ensemble_p2(thermal, DetectionScheme::opposite(), coarse, kGeom);
  const auto cha = pattern::catalog_p2(col(StateKind::Chaotic, 1.0), DetectionScheme::opposite(), coarse, kGeom);
  for (std::size_t i = 0; i < coarse.size(); ++i) tally.add(t2.values[i] - cha.values[i], t2.stderr_estimate[i]);
  // Random relative phase with point slits: the unit-envelope diffused values.
  const oracle::EnsembleSpec diffused{oracle::FieldModel::RandomRelativePhase, 20000, s.seed + 1, 1};
  const auto d1 = oracle::ensemble_p1(diffused, DetectionScheme::opposite(), coarse, kGeom);
  const auto d2 = oracle::ensemble_p2(diffused, DetectionScheme::same_point(), coarse, kGeom);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    tally.add(d1.values[i] - std::cos(2.0 * d1.u[i]), d1.stderr_estimate[i]);
    tally.add(d2.values[i] - 1.5, d2.stderr_estimate[i]);
  }

  const auto fine = pattern::default_grid(kGeom);
  const oracle::EnsembleSpec fixed{oracle::FieldModel::FixedPhase, 1, 0, 51};
  for (const auto& scheme : {DetectionScheme::same_point(), DetectionScheme::opposite()}) {
    const auto e1 = oracle::ensemble_p1(fixed, scheme, fine, kGeom);
    const auto e2 = oracle::ensemble_p2(fixed, scheme, fine, kGeom);
    const auto c1 = pattern::catalog_p1(col(StateKind::CollectiveCoherent, 1.0), scheme, fine, kGeom);
    const auto c2 = pattern::catalog_p2(col(StateKind::CollectiveCoherent, 1.0), scheme, fine, kGeom);
    for (std::size_t i = 0; i < fine.size(); ++i) {
      r.residual = std::max({r.residual, std::fabs(e1.values[i] - c1.values[i]), std::fabs(e2.values[i] - c2.values[i])});
    }
  }
  r.passed = r.residual < r.tolerance && tally.ok();
  r.detail = {{"stochastic", tally.to_json()},
              {"quantum_only", {"num2", "ent2"}},
              {"note", "number and NOON states have no classical field model"}};
  return r;
}

CheckResult hbt_bounds(const Settings&) {
  CheckResult r{false, 0.0, 1e-12};
  const auto grid = pattern::default_grid(kGeom);
  struct Bound {
    StateSpec spec;
    double lo, hi;
  };
  for (const auto& b : {Bound{col(StateKind::Chaotic, 1.0), 1.0, 2.0}, Bound{col(StateKind::PhaseDiffused, 1.0), 0.5, 1.5},
                        Bound{sub(StateKind::NumberState, 2), 0.0, 1.0}, Bound{sub(StateKind::Noon, 2), 1.0, 1.0}}) {
    const auto s = pattern::g2(b.spec, grid, kGeom);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s.defined[i]) continue;
      r.residual = std::max({r.residual, b.lo - s.values[i], s.values[i] - b.hi});
    }
  }
  r.passed = r.residual < r.tolerance;
  return r;
}

struct Check {
  const char* name;
  CheckResult (*run)(const Settings&);
};

constexpr Check kChecks[] = {
    {"sum-rules", sum_rules},
    {"elements", elements},
    {"elements-mc", elements_mc},
    {"identity", identity},
    {"shape-squaring", shape_squaring},
    {"patterns", patterns},
    {"g2-values", g2_values},
    {"reconstruction", reconstruction},
    {"widths", widths},
    {"degeneracy", degeneracy},
    {"ensemble", ensemble},
    {"hbt-bounds", hbt_bounds},
};

}  // namespace

int cmd_verify(const Context& ctx) {
  const auto& o = ctx.opts;
  Settings settings;
  settings.seed = o.seed;
  if (o.inject_bug == "swap-BC") {
    settings.fault = AssemblyFault::SwapBC;
  } else if (!o.inject_bug.empty()) {
    throw std::invalid_argument("unknown --inject-bug '" + o.inject_bug + "' (swap-BC)");
  }
  std::set<std::string> only;
  if (!o.only.empty()) {
    for (const auto& name : split(o.only, ',')) {
      const bool known = std::any_of(std::begin(kChecks), std::end(kChecks), [&](const Check& c) { return name == c.name; });
      if (!known) throw std::invalid_argument("unknown check '" + name + "'");
      only.insert(name);
    }
  }

  json checks = json::array();
  bool all = true;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& c : kChecks) {
    if (!only.empty() && !only.count(c.name)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    json entry{{"name", c.name}};
    try {
      const auto r = c.run(settings);
      entry["passed"] = r.passed;
      entry["residual"] = r.residual;
      entry["tolerance"] = r.tolerance;
      if (!r.detail.empty()) entry["detail"] = r.detail;
      all = all && r.passed;
    } catch (const std::exception& e) {
      entry["passed"] = false;
      entry["error"] = e.what();
      all = false;
    }
    entry["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    checks.push_back(entry);
  }
  json report{{"passed", all},
              {"checks", checks},
              {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  if (!o.inject_bug.empty()) report["injected_fault"] = o.inject_bug;
  if (!o.out.empty()) {
    write_file(o.out, report.dump(2) + "\n");
    json meta = run_metadata(ctx);
    meta["files"] = {o.out};
    write_file(sidecar_path(o.out), meta.dump(2) + "\n");
  }
  ctx.out << report.dump() << '\n';
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace qdiff::cli
