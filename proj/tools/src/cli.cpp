#include "qdiff_cli/cli.hpp"

#include <CLI11.hpp>

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>

#include "commands.hpp"
#include "json.hpp"
#include "options.hpp"

namespace qdiff::cli {

namespace {

void report_error(std::ostream& err, const std::string& type, const std::string& message) {
  nlohmann::json j{{"error", {{"type", type}, {"message", message}}}};
  err << j.dump() << '\n';
}

void add_state_options(CLI::App* app, RawOptions& o) {
  app->add_option("--state", o.state, "state kind, e.g. coherent, dif, chaotic, noon2, num2, cohN")->capture_default_str();
  app->add_option("--mean-n", o.mean_n, "mean photon number of a collective state");
  app->add_option("--n", o.n, "photon number of a substate");
  app->add_option("--phases", o.phases, "phases theta,phi of a coherent state");
  app->add_option("--epsilon", o.epsilon, "truncation tolerance of the Fock cutoff")->capture_default_str();
}

void add_geometry_options(CLI::App* app, RawOptions& o) {
  app->add_option("--ratio", o.ratio, "slit separation over slit width")->capture_default_str();
  app->add_option("--geometry", o.geometry, "k,l,a,z0: wavenumber in 1/m, lengths in m");
  app->add_option("--scheme", o.scheme, "same, opposite or general")->capture_default_str();
  app->add_option("--rho2", o.rho2, "fixed second detector for the general scheme");
  app->add_option("--grid", o.grid, "lo,hi,count in metres");
  app->add_option("--grid-u", o.grid_u, "lo,hi,count in units of u");
}

void add_output_options(CLI::App* app, RawOptions& o) {
  app->add_option("--out", o.out, "output file; a .meta.json sidecar is written next to it");
  app->add_flag("--plot", o.plot, "also write a gnuplot script next to --out");
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const std::exception& e) {
    report_error(err, "config", e.what());
    return kExitUsage;
  }

  CLI::App app{"Two-mode double-slit interference engine", "qdiff"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", QDIFF_VERSION);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file of option defaults");

  std::map<std::string, RawOptions> opts;
  std::map<std::string, std::function<int(const Context&)>> handlers;

  auto* states_cmd = app.add_subcommand("states", "substate weights and sum rules");
  {
    auto& o = opts["states"];
    states_cmd->add_option("--kind", o.kind, "poisson or bose-einstein")->capture_default_str();
    states_cmd->add_option("--mean-n", o.mean_n, "comma-separated mean photon numbers")->required();
    states_cmd->add_option("--n-max", o.n_max, "largest photon number listed");
    states_cmd->add_option("--epsilon", o.epsilon, "tail mass left out of the table")->capture_default_str();
    add_output_options(states_cmd, o);
    handlers["states"] = cmd_states;
  }

  auto* pattern_cmd = app.add_subcommand("pattern", "detection probability along a scan");
  {
    auto& o = opts["pattern"];
    add_state_options(pattern_cmd, o);
    add_geometry_options(pattern_cmd, o);
    add_output_options(pattern_cmd, o);
    pattern_cmd->add_option("--order", o.order, "1 or 2")->capture_default_str();
    pattern_cmd->add_option("--route", o.route, "catalog, engine or both")->capture_default_str();
    pattern_cmd->add_option("--avg", o.avg, "none, quad:K, mc:M or pairing");
    pattern_cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
    pattern_cmd->add_option("--tol", o.tol, "agreement tolerance for --route both")->capture_default_str();
    pattern_cmd->add_option("--elements", o.elements, "write the matrix element table as JSON");
    handlers["pattern"] = cmd_pattern;
  }

  auto* coherence_cmd = app.add_subcommand("coherence", "normalised degree of coherence");
  {
    auto& o = opts["coherence"];
    o.order = 2;
    add_state_options(coherence_cmd, o);
    add_geometry_options(coherence_cmd, o);
    add_output_options(coherence_cmd, o);
    coherence_cmd->add_option("--order", o.order, "1 or 2")->capture_default_str();
    coherence_cmd->add_option("--route", o.route, "catalog or engine")->capture_default_str();
    coherence_cmd->add_option("--avg", o.avg, "none, quad:K, mc:M or pairing");
    coherence_cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
    handlers["coherence"] = cmd_coherence;
  }

  auto* simulate_cmd = app.add_subcommand("simulate", "sample detection events from a pattern");
  {
    auto& o = opts["simulate"];
    add_state_options(simulate_cmd, o);
    add_geometry_options(simulate_cmd, o);
    add_output_options(simulate_cmd, o);
    simulate_cmd->add_option("--order", o.order, "1 or 2")->capture_default_str();
    simulate_cmd->add_option("--route", o.route, "catalog or engine")->capture_default_str();
    simulate_cmd->add_option("--avg", o.avg, "none, quad:K, mc:M or pairing");
    simulate_cmd->add_option("--events", o.events, "number of detection events")->capture_default_str();
    simulate_cmd->add_option("--bins", o.bins, "histogram bins")->capture_default_str();
    simulate_cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
    handlers["simulate"] = cmd_simulate;
  }

  auto* widths_cmd = app.add_subcommand("widths", "effective widths of the envelopes");
  {
    auto& o = opts["widths"];
    widths_cmd->add_option("--ratio", o.ratio, "slit separation over slit width")->capture_default_str();
    widths_cmd->add_option("--geometry", o.geometry, "k,l,a,z0: wavenumber in 1/m, lengths in m");
    widths_cmd->add_option("--method", o.method, "streaming or series")->capture_default_str();
    widths_cmd->add_option("--tail-tol", o.tail_tol, "bound on the neglected tail")->capture_default_str();
    add_output_options(widths_cmd, o);
    handlers["widths"] = cmd_widths;
  }

  auto* verify_cmd = app.add_subcommand("verify", "run the self-consistency checks");
  {
    auto& o = opts["verify"];
    verify_cmd->add_option("--only", o.only, "comma-separated check names");
    verify_cmd->add_option("--inject-bug", o.inject_bug, "deliberately break the engine (swap-BC)");
    verify_cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
    verify_cmd->add_option("--out", o.out, "write the JSON report here as well");
    handlers["verify"] = cmd_verify;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << QDIFF_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kExitUsage;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  Context ctx{opts[name], args, name, out, err};
  try {
    return handlers[name](ctx);
  } catch (const std::invalid_argument& e) {
    report_error(err, "invalid_argument", e.what());
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    report_error(err, "out_of_range", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    report_error(err, "runtime", e.what());
    return kExitCheckFailed;
  }
}

}  // namespace qdiff::cli
