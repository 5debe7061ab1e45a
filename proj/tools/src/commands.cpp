#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "output.hpp"
#include "qdiff/catalog.hpp"
#include "qdiff/mc.hpp"
#include "qdiff/numeric.hpp"
#include "qdiff/pattern.hpp"
#include "qdiff/rng.hpp"
#include "qdiff_cli/cli.hpp"

#ifndef QDIFF_VERSION
#define QDIFF_VERSION "unknown"
#endif

namespace qdiff::cli {

using nlohmann::json;
using pattern::PatternSeries;
using states::Distribution;

nlohmann::json options_json(const RawOptions& o) {
  return {{"state", o.state},     {"mean_n", o.mean_n}, {"n", o.n},         {"phases", o.phases},
          {"epsilon", o.epsilon}, {"order", o.order},   {"scheme", o.scheme}, {"rho2", o.rho2},
          {"ratio", o.ratio},     {"geometry", o.geometry}, {"grid", o.grid}, {"grid_u", o.grid_u},
          {"avg", o.avg},         {"seed", o.seed},     {"route", o.route}, {"tol", o.tol},
          {"kind", o.kind},       {"n_max", o.n_max},   {"events", o.events}, {"bins", o.bins},
          {"only", o.only},       {"inject_bug", o.inject_bug}, {"method", o.method},
          {"tail_tol", o.tail_tol}};
}

json run_metadata(const Context& ctx) {
  return {{"program", "qdiff"},
          {"version", QDIFF_VERSION},
          {"subcommand", ctx.subcommand},
          {"argv", ctx.argv},
          {"config", options_json(ctx.opts)},
          {"seed", ctx.opts.seed},
          {"rng", kRngName},
          {"tolerance", ctx.opts.tol}};
}

nlohmann::json table_json(const correlator::MatrixElementTable& t) {
  using fock::Mode;
  auto name = [](Mode m, bool dagger) { return std::string(m == Mode::K ? "a_k" : "a_k'") + (dagger ? "^dag" : ""); };
  json entries = json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::vector<Mode> modes;
    for (int b = t.order == 1 ? 1 : 3; b >= 0; --b) modes.push_back(static_cast<Mode>((i >> b) & 1U));
    std::string ops;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      if (!ops.empty()) ops += ' ';
      ops += name(modes[k], k < modes.size() / 2);
    }
    json e{{"index", i}, {"operators", ops}, {"re", t.entries[i].real()}, {"im", t.entries[i].imag()}};
    if (!t.exact()) {
      const auto se = t.stderr_of(i);
      e["stderr_re"] = se.real();
      e["stderr_im"] = se.imag();
    }
    entries.push_back(e);
  }
  return {{"order", t.order}, {"averaging", t.averaging}, {"evaluations", t.evaluations}, {"entries", entries}};
}

namespace {

// Emits a CSV either to --out (with sidecar) or to stdout. Returns true when
// the report stream is free for the JSON summary.
bool emit_csv(const Context& ctx, const std::string& csv, json meta, const std::string* plot = nullptr) {
  if (ctx.opts.out.empty()) {
    ctx.out << csv;
    return false;
  }
  write_file(ctx.opts.out, csv);
  meta["files"] = {ctx.opts.out};
  if (plot) {
    write_file(ctx.opts.out + ".gp", *plot);
    meta["files"].push_back(ctx.opts.out + ".gp");
  }
  write_file(sidecar_path(ctx.opts.out), meta.dump(2) + "\n");
  return true;
}

void report(const Context& ctx, bool to_out, const json& j) { (to_out ? ctx.out : ctx.err) << j.dump() << '\n'; }

Distribution parse_distribution(const std::string& kind) {
  if (kind == "poisson") return Distribution::Poisson;
  if (kind == "bose" || kind == "bose-einstein") return Distribution::BoseEinstein;
  throw std::invalid_argument("unknown --kind '" + kind + "' (poisson, bose)");
}

pattern::Route parse_route(const std::string& r) {
  if (r == "catalog") return pattern::Route::Catalog;
  if (r == "engine") return pattern::Route::Engine;
  throw std::invalid_argument("unknown route '" + r + "' (catalog, engine)");
}

correlator::MatrixElementTable engine_table(const Context& ctx, const states::StateSpec& spec, int order) {
  const auto avg = parse_average(ctx.opts.avg, ctx.opts.seed);
  return avg ? correlator::matrix_elements(spec, order, *avg) : correlator::matrix_elements(spec, order);
}

void check_order(int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("--order must be 1 or 2");
}

}  // namespace

int cmd_states(const Context& ctx) {
  const auto& o = ctx.opts;
  const Distribution dist = parse_distribution(o.kind);
  const auto means = parse_list(o.mean_n.empty() ? "1,2,4,9" : o.mean_n, "--mean-n");
  std::ostringstream csv;
  CsvWriter w(csv, {"kind", "mean_n", "N", "weight"});
  json rules = json::array();
  bool all_pass = true;
  const double tail = std::min(o.epsilon, 1e-12);
  for (double mean : means) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("--mean-n values must be non-negative");
    const int n_max = o.n_max >= 0 ? o.n_max : states::total_cutoff(dist, mean, tail);
    const double one[] = {mean};
    for (const auto& row : states::substate_table(dist, one, n_max)) {
      w.cell(std::string(states::distribution_name(dist))).cell(row.mean_n).cell(row.n_total).cell(row.weight);
      w.end_row();
    }
    const auto r = states::check_sum_rules(dist, mean, o.epsilon);
    const bool pass = r.passed(o.tol);
    all_pass = all_pass && pass;
    rules.push_back({{"mean_n", mean},
                     {"n_max", n_max},
                     {"tail_beyond_n_max", states::tail_mass(dist, mean, n_max)},
                     {"norm", r.norm},
                     {"first_order_sum", r.first_order_sum},
                     {"second_order_sum", r.second_order_sum},
                     {"norm_residual", r.norm_residual},
                     {"first_residual", r.first_residual},
                     {"second_residual", r.second_residual},
                     {"passed", pass}});
  }
  json meta = run_metadata(ctx);
  meta["distribution"] = states::distribution_name(dist);
  meta["columns"] = {"kind", "mean_n", "N", "weight"};
  const bool to_out = emit_csv(ctx, csv.str(), meta);
  report(ctx, to_out, {{"sum_rules", rules}, {"tolerance", o.tol}, {"passed", all_pass}});
  return kExitOk;
}

int cmd_pattern(const Context& ctx) {
  const auto& o = ctx.opts;
  check_order(o.order);
  const auto spec = parse_state(o);
  const auto geom = parse_geometry(o);
  const auto scheme = parse_scheme(o);
  const auto grid = parse_grid(o, geom);
  if (o.route != "catalog" && o.route != "engine" && o.route != "both") {
    throw std::invalid_argument("unknown route '" + o.route + "' (catalog, engine, both)");
  }
  const bool want_catalog = o.route != "engine";
  const bool want_engine = o.route != "catalog";
  if (want_catalog && !pattern::in_catalog(spec, o.order)) {
    throw std::invalid_argument(states::describe(spec) + " has no closed form at order " + std::to_string(o.order) +
                                "; use --route engine");
  }
  if (!o.avg.empty() && !want_engine) throw std::invalid_argument("--avg applies to the engine route");

  PatternSeries catalog, engine;
  if (want_catalog) catalog = pattern::catalog_pattern(spec, o.order, scheme, grid.rho, geom);
  correlator::MatrixElementTable table;
  if (want_engine) {
    table = engine_table(ctx, spec, o.order);
    engine = pattern::engine_pattern(table, spec, scheme, grid.rho, geom);
  }
  const PatternSeries& main = want_engine ? engine : catalog;

  json summary{{"state", states::describe(spec)},
               {"order", o.order},
               {"scheme", pattern::scheme_name(scheme.kind)},
               {"route", o.route},
               {"points", main.size()},
               {"P_O", main.scale_factor},
               {"envelope_model", pattern::envelope_name(main.envelope)},
               {"grid", grid.description}};
  for (const auto& w : pattern::warnings(geom)) summary["warnings"].push_back(w);
  int code = kExitOk;
  if (o.route == "both") {
    double worst = 0.0, allowed_ratio = 0.0;
    for (std::size_t i = 0; i < main.size(); ++i) {
      const double d = std::fabs(engine.values[i] - catalog.values[i]);
      double allowed = o.tol * std::max(1.0, catalog.scale_factor);
      if (!engine.stderr_estimate.empty()) allowed += 4.0 * engine.stderr_estimate[i];
      worst = std::max(worst, d);
      allowed_ratio = std::max(allowed_ratio, d / allowed);
    }
    summary["max_deviation"] = worst;
    summary["route_agreement"] = allowed_ratio <= 1.0;
    if (allowed_ratio > 1.0) code = kExitCheckFailed;
  }

  std::ostringstream csv;
  write_series_csv(csv, main, o.route == "both" ? &catalog.values : nullptr);
  json meta = run_metadata(ctx);
  meta["series"] = series_metadata(main);
  std::string plot;
  if (o.plot) {
    plot = gnuplot_script(o.out.empty() ? "pattern.csv" : o.out, states::describe(spec) + " order " +
                                                                     std::to_string(o.order) + " " +
                                                                     std::string(pattern::scheme_name(scheme.kind)),
                          !main.stderr_estimate.empty());
  }
  if (!o.elements.empty()) {
    if (!want_engine) throw std::invalid_argument("--elements needs the engine route");
    json t = table_json(table);
    t["state"] = state_json(spec);
    write_file(o.elements, t.dump(2) + "\n");
    json tm = run_metadata(ctx);
    tm["files"] = {o.elements};
    write_file(sidecar_path(o.elements), tm.dump(2) + "\n");
  }
  if (o.plot && o.out.empty()) throw std::invalid_argument("--plot needs --out");
  const bool to_out = emit_csv(ctx, csv.str(), meta, o.plot ? &plot : nullptr);
  report(ctx, to_out, summary);
  return code;
}

int cmd_coherence(const Context& ctx) {
  const auto& o = ctx.opts;
  check_order(o.order);
  const auto spec = parse_state(o);
  const auto geom = parse_geometry(o);
  const auto scheme = parse_scheme(o);
  const auto grid = parse_grid(o, geom);
  const auto route = parse_route(o.route);
  if (route == pattern::Route::Catalog && !pattern::in_catalog(spec, o.order)) {
    throw std::invalid_argument(states::describe(spec) + " has no closed form; use --route engine");
  }
  const auto s = pattern::coherence(spec, o.order, grid.rho, geom, route, scheme);
  std::size_t undefined = 0;
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s.defined[i]) {
      ++undefined;
      continue;
    }
    lo = std::min(lo, s.values[i]);
    hi = std::max(hi, s.values[i]);
  }
  std::ostringstream csv;
  write_series_csv(csv, s);
  json meta = run_metadata(ctx);
  meta["series"] = series_metadata(s);
  meta["undefined_threshold"] = pattern::kUndefinedThreshold;
  if (o.plot && o.out.empty()) throw std::invalid_argument("--plot needs --out");
  const std::string plot = gnuplot_script(o.out, "g" + std::to_string(o.order) + " " + states::describe(spec), false);
  const bool to_out = emit_csv(ctx, csv.str(), meta, o.plot ? &plot : nullptr);
  json summary{{"quantity", s.quantity}, {"state", states::describe(spec)}, {"points", s.size()},
               {"undefined_points", undefined}};
  if (undefined < s.size()) {
    summary["min"] = lo;
    summary["max"] = hi;
  }
  report(ctx, to_out, summary);
  return kExitOk;
}

int cmd_simulate(const Context& ctx) {
  const auto& o = ctx.opts;
  check_order(o.order);
  const auto spec = parse_state(o);
  const auto geom = parse_geometry(o);
  const auto scheme = parse_scheme(o);
  const auto grid = parse_grid(o, geom);
  if (o.events < 1) throw std::invalid_argument("--events must be at least 1");
  if (o.bins < 1) throw std::invalid_argument("--bins must be at least 1");
  PatternSeries law;
  if (o.route == "catalog") {
    if (!pattern::in_catalog(spec, o.order)) throw std::invalid_argument("no closed form; use --route engine");
    law = pattern::catalog_pattern(spec, o.order, scheme, grid.rho, geom);
  } else if (o.route == "engine") {
    law = pattern::engine_pattern(engine_table(ctx, spec, o.order), spec, scheme, grid.rho, geom);
  } else {
    throw std::invalid_argument("unknown route '" + o.route + "' (catalog, engine)");
  }
  const auto run = mc::simulate(mc::make_run(law, o.events, o.seed, o.bins));
  json stats{{"events", o.events}, {"bins", o.bins}, {"seed", o.seed}, {"rng", run.rng}};
  try {
    const auto fit = mc::gof(run);
    stats["chi_square"] = fit.chi_square;
    stats["dof"] = fit.dof;
    stats["p_value"] = fit.p_value;
    stats["groups"] = fit.groups;
  } catch (const std::invalid_argument& e) {
    // Too few events for a test: statistics, not an error.
    stats["gof"] = std::string("not available: ") + e.what();
  }
  std::ostringstream csv;
  CsvWriter w(csv, {"bin_lo", "bin_hi", "count", "expected"});
  for (int b = 0; b < o.bins; ++b) {
    const auto i = static_cast<std::size_t>(b);
    w.cell(run.bin_edges[i]).cell(run.bin_edges[i + 1]).cell(run.histogram[i]).cell(run.expected[i]);
    w.end_row();
  }
  json meta = run_metadata(ctx);
  meta["law"] = series_metadata(law);
  meta["statistics"] = stats;
  const bool to_out = emit_csv(ctx, csv.str(), meta);
  report(ctx, to_out, stats);
  return kExitOk;
}

int cmd_widths(const Context& ctx) {
  const auto& o = ctx.opts;
  const auto geom = parse_geometry(o);
  if (o.method != "streaming" && o.method != "series") {
    throw std::invalid_argument("unknown --method '" + o.method + "' (streaming, series)");
  }
  std::ostringstream csv;
  CsvWriter w(csv, {"order", "width", "expected", "method"});
  json rows = json::array();
  bool pass = true;
  for (int order : {1, 2}) {
    double width = 0.0;
    if (o.method == "streaming") {
      width = pattern::effective_width_streaming(order, geom, o.tail_tol);
    } else {
      // Grid wide enough for the envelope tail, four points per radian of u.
      const int p = 2 * order - 1;
      const double c = order == 1 ? 0.25 : 9.0 / 64.0;
      const double v_edge = std::pow((4.0 / kPi) * c / (p * o.tail_tol), 1.0 / p) * 1.001;
      const double u_edge = v_edge * geom.ratio();
      const double points = std::ceil(2.0 * u_edge * 4.0) + 1.0;
      if (points > 2e7) {
        throw std::invalid_argument("series method needs " + format_number(points) +
                                    " points at this tail tolerance; use --method streaming or raise --tail-tol");
      }
      const auto grid = pattern::grid_over_u(geom, -u_edge, u_edge, static_cast<int>(points));
      const auto s = pattern::catalog_pattern(states::StateSpec::collective(states::StateKind::CollectiveCoherent, 1.0),
                                              order, pattern::DetectionScheme::same_point(), grid, geom);
      width = pattern::effective_width(s, geom, o.tail_tol);
    }
    const double expected = order == 1 ? 1.0 : 0.5;
    pass = pass && std::fabs(width - expected) < 1e-4;
    w.cell(order).cell(width).cell(expected).cell(o.method);
    w.end_row();
    rows.push_back({{"order", order}, {"width", width}, {"expected", expected}});
  }
  json meta = run_metadata(ctx);
  meta["geometry"] = geometry_json(geom);
  const bool to_out = emit_csv(ctx, csv.str(), meta);
  report(ctx, to_out, {{"widths", rows}, {"ratio", geom.ratio()}, {"within_1e-4", pass}});
  return kExitOk;
}

}  // namespace qdiff::cli
