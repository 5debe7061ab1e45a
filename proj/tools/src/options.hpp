#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qdiff/correlator.hpp"
#include "qdiff/geometry.hpp"
#include "qdiff/states.hpp"

namespace qdiff::cli {

// Raw flag values shared by the subcommands. Strings are parsed and
// validated by resolve() before anything is computed.
struct RawOptions {
  std::string state = "coherent";
  std::string mean_n;  // list for `states`, scalar elsewhere
  int n = -1;
  std::string phases;
  double epsilon = states::kDefaultEpsilon;
  int order = 1;
  std::string scheme = "opposite";
  double rho2 = 0.0;
  double ratio = 4.0;
  std::string geometry;
  std::string grid;
  std::string grid_u;
  std::string avg;
  std::uint64_t seed = 1;
  std::string route = "catalog";
  std::string out;
  bool plot = false;
  double tol = 1e-9;
  std::string elements;

  // states
  std::string kind = "poisson";
  int n_max = -1;

  // simulate
  std::uint64_t events = 1000000;
  int bins = 100;

  // verify
  std::string only;
  std::string inject_bug;

  // widths
  std::string method = "streaming";
  double tail_tol = 1e-6;
};

struct GridSpec {
  std::vector<double> rho;
  std::string description;
};

states::StateSpec parse_state(const RawOptions& o);
pattern::SlitGeometry parse_geometry(const RawOptions& o);
pattern::DetectionScheme parse_scheme(const RawOptions& o);
GridSpec parse_grid(const RawOptions& o, const pattern::SlitGeometry& geom);
// Empty string means the state's default averaging.
std::optional<correlator::PhaseAverageSpec> parse_average(const std::string& text, std::uint64_t seed);
std::vector<double> parse_list(const std::string& text, const char* what);
std::vector<std::string> split(const std::string& text, char sep);

// Expands `--config file.json` into flags placed right after the subcommand
// so explicit flags, which come later, take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

nlohmann::json geometry_json(const pattern::SlitGeometry& geom);
nlohmann::json state_json(const states::StateSpec& spec);

}  // namespace qdiff::cli
