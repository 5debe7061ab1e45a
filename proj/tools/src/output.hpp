#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdiff/pattern.hpp"

namespace qdiff::cli {

// Shortest decimal that reads back to the same double; locale independent.
std::string format_number(double x);

// Comma-separated rows with a fixed header. Undefined values are written
// as the token `null`.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  CsvWriter& cell(double x);
  CsvWriter& cell(std::uint64_t x);
  CsvWriter& cell(int x);
  CsvWriter& cell(const std::string& s);
  CsvWriter& null();
  void end_row();

 private:
  void sep();
  std::ostream& os_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

void write_series_csv(std::ostream& os, const pattern::PatternSeries& s,
                      const std::vector<double>* catalog_values = nullptr);

nlohmann::json series_metadata(const pattern::PatternSeries& s);

// Writes `text` to `path`; throws std::runtime_error on failure.
void write_file(const std::string& path, const std::string& text);
std::string sidecar_path(const std::string& path);
// gnuplot script plotting `value` against u from the CSV at `csv_path`.
std::string gnuplot_script(const std::string& csv_path, const std::string& title, bool with_errors);

}  // namespace qdiff::cli
