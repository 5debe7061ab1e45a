#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "options.hpp"

namespace qdiff::cli {

struct Context {
  const RawOptions& opts;
  const std::vector<std::string>& argv;  // after config expansion
  std::string subcommand;
  std::ostream& out;
  std::ostream& err;
};

int cmd_states(const Context& ctx);
int cmd_pattern(const Context& ctx);
int cmd_coherence(const Context& ctx);
int cmd_simulate(const Context& ctx);
int cmd_widths(const Context& ctx);
int cmd_verify(const Context& ctx);

// Common metadata block for sidecars and reports.
nlohmann::json run_metadata(const Context& ctx);
nlohmann::json options_json(const RawOptions& o);
nlohmann::json table_json(const correlator::MatrixElementTable& t);

}  // namespace qdiff::cli
