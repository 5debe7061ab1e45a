#include "options.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <stdexcept>

#include "qdiff/numeric.hpp"

namespace qdiff::cli {

using states::StateKind;
using states::StateSpec;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

namespace {

double to_double(const std::string& s, const char* what) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  while (first < last && std::isspace(static_cast<unsigned char>(*first))) ++first;
  const auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last || first == last) {
    throw std::invalid_argument(std::string("cannot parse ") + what + " value '" + s + "'");
  }
  return v;
}

StateKind substate_of(StateKind k) {
  switch (k) {
    case StateKind::CollectiveCoherent: return StateKind::CoherentSubstate;
    case StateKind::PhaseDiffused: return StateKind::PhaseDiffusedSubstate;
    case StateKind::Chaotic: return StateKind::ChaoticSubstate;
    default: return k;
  }
}

}  // namespace

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(to_double(part, what));
  return out;
}

StateSpec parse_state(const RawOptions& o) {
  std::string name = o.state;
  int suffix = -1;
  // A trailing photon count selects the substate: num2, ent2, coh4, cha3.
  const auto digits = name.find_last_not_of("0123456789");
  if (digits != std::string::npos && digits + 1 < name.size()) {
    suffix = std::stoi(name.substr(digits + 1));
    name.resize(digits + 1);
  }
  auto kind = states::parse_kind(name);
  if (!kind) throw std::invalid_argument("unknown state '" + o.state + "'");
  if (suffix >= 0) {
    kind = substate_of(*kind);
    if (o.n >= 0 && o.n != suffix) {
      throw std::invalid_argument("state '" + o.state + "' conflicts with --n " + std::to_string(o.n));
    }
  }
  StateSpec spec;
  if (states::is_collective(*kind)) {
    if (o.n >= 0) throw std::invalid_argument("--n applies to substates; use --mean-n for " + o.state);
    const double mean = o.mean_n.empty() ? 1.0 : to_double(o.mean_n, "--mean-n");
    spec = StateSpec::collective(*kind, mean, o.epsilon);
  } else {
    const int n = suffix >= 0 ? suffix : o.n;
    if (n < 0) throw std::invalid_argument("state '" + o.state + "' needs a photon number (--n)");
    if (!o.mean_n.empty()) throw std::invalid_argument("--mean-n applies to collective states only");
    spec = StateSpec::substate(*kind, n);
    spec.epsilon = o.epsilon;
  }
  if (!o.phases.empty()) spec.phases = parse_list(o.phases, "--phases");
  states::validate(spec);
  return spec;
}

pattern::SlitGeometry parse_geometry(const RawOptions& o) {
  pattern::SlitGeometry g;
  if (!o.geometry.empty()) {
    const auto v = parse_list(o.geometry, "--geometry");
    if (v.size() != 4) throw std::invalid_argument("--geometry needs k,l,a,z0");
    g = {v[0], v[1], v[2], v[3]};
  } else {
    if (!(o.ratio > 0.0)) throw std::invalid_argument("--ratio must be positive");
    g = pattern::default_geometry(o.ratio);
  }
  pattern::validate(g);
  return g;
}

pattern::DetectionScheme parse_scheme(const RawOptions& o) {
  if (o.scheme == "same") return pattern::DetectionScheme::same_point();
  if (o.scheme == "opposite") return pattern::DetectionScheme::opposite();
  if (o.scheme == "general") return pattern::DetectionScheme::general(o.rho2);
  throw std::invalid_argument("unknown scheme '" + o.scheme + "' (same, opposite, general)");
}

GridSpec parse_grid(const RawOptions& o, const pattern::SlitGeometry& geom) {
  if (!o.grid.empty() && !o.grid_u.empty()) throw std::invalid_argument("give either --grid or --grid-u");
  auto triple = [](const std::string& text, const char* what) {
    const auto v = parse_list(text, what);
    if (v.size() != 3) throw std::invalid_argument(std::string(what) + " needs lo,hi,points");
    const double points = v[2];
    if (points < 2 || points != std::floor(points) || points > 1e7) {
      throw std::invalid_argument(std::string(what) + " point count must be an integer in [2, 1e7]");
    }
    if (!(v[1] > v[0])) throw std::invalid_argument(std::string(what) + " needs hi > lo");
    return v;
  };
  GridSpec g;
  if (!o.grid.empty()) {
    const auto v = triple(o.grid, "--grid");
    g.rho = linspace(v[0], v[1], static_cast<int>(v[2]));
    g.description = "rho in [" + split(o.grid, ',')[0] + ", " + split(o.grid, ',')[1] + "] m";
  } else if (!o.grid_u.empty()) {
    const auto v = triple(o.grid_u, "--grid-u");
    g.rho = pattern::grid_over_u(geom, v[0], v[1], static_cast<int>(v[2]));
    g.description = "u in [" + split(o.grid_u, ',')[0] + ", " + split(o.grid_u, ',')[1] + "]";
  } else {
    g.rho = pattern::default_grid(geom);
    g.description = "u in [-2pi, 2pi]";
  }
  return g;
}

std::optional<correlator::PhaseAverageSpec> parse_average(const std::string& text, std::uint64_t seed) {
  using correlator::PhaseAverageSpec;
  if (text.empty()) return std::nullopt;
  if (text == "none") return PhaseAverageSpec::none();
  if (text == "pairing") return PhaseAverageSpec::pairing();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string method = text.substr(0, colon);
    const double count = to_double(text.substr(colon + 1), "--avg");
    if (count < 1 || count != std::floor(count) || count > 1e9) {
      throw std::invalid_argument("--avg count must be a positive integer");
    }
    if (method == "quad") return PhaseAverageSpec::quadrature(static_cast<int>(count));
    if (method == "mc") return PhaseAverageSpec::monte_carlo(static_cast<int>(count), seed);
  }
  throw std::invalid_argument("unknown averaging '" + text + "' (quad:K, mc:M, pairing, none)");
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (path.empty()) return out;

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config file must hold a JSON object");

  std::vector<std::string> flags;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) flags.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& x : value) {
        if (!joined.empty()) joined += ",";
        joined += x.is_string() ? x.get<std::string>() : x.dump();
      }
      flags.push_back(flag);
      flags.push_back(joined);
    } else if (value.is_string()) {
      flags.push_back(flag);
      flags.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      flags.push_back(flag);
      flags.push_back(value.dump());
    } else {
      throw std::invalid_argument("config key '" + key + "' has an unsupported value");
    }
  }
  // The subcommand stays first so its own flags are recognised.
  if (out.empty()) return flags;
  std::vector<std::string> merged{out.front()};
  merged.insert(merged.end(), flags.begin(), flags.end());
  merged.insert(merged.end(), out.begin() + 1, out.end());
  return merged;
}

nlohmann::json geometry_json(const pattern::SlitGeometry& geom) {
  return {{"wavenumber", geom.wavenumber},
          {"slit_separation", geom.slit_separation},
          {"slit_width", geom.slit_width},
          {"screen_distance", geom.screen_distance},
          {"ratio", geom.ratio()}};
}

nlohmann::json state_json(const states::StateSpec& spec) {
  nlohmann::json j{{"kind", states::kind_name(spec.kind)}, {"epsilon", spec.epsilon}, {"phases", spec.phases}};
  if (states::is_collective(spec.kind)) {
    j["mean_n"] = spec.mean_n;
  } else {
    j["n_photons"] = spec.n_photons;
  }
  return j;
}

}  // namespace qdiff::cli
