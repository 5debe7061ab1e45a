#include "output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qdiff::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "null";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return {buf, end};
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os), columns_(header.size()) {
  for (const auto& h : header) cell(h);
  end_row();
}

void CsvWriter::sep() {
  if (filled_ == columns_) throw std::logic_error("csv row has too many cells");
  if (filled_++ > 0) os_ << ',';
}

CsvWriter& CsvWriter::cell(double x) {
  sep();
  os_ << format_number(x);
  return *this;
}

CsvWriter& CsvWriter::cell(std::uint64_t x) {
  sep();
  os_ << x;
  return *this;
}

CsvWriter& CsvWriter::cell(int x) {
  sep();
  os_ << x;
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  sep();
  os_ << s;
  return *this;
}

CsvWriter& CsvWriter::null() {
  sep();
  os_ << "null";
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw std::logic_error("csv row has too few cells");
  os_ << '\n';
  filled_ = 0;
}

void write_series_csv(std::ostream& os, const pattern::PatternSeries& s, const std::vector<double>* catalog_values) {
  std::vector<std::string> header{"rho", "u", "v", "value", "shape", "defined"};
  const bool errors = !s.stderr_estimate.empty();
  if (errors) header.push_back("stderr_estimate");
  if (catalog_values) header.push_back("catalog_value");
  CsvWriter w(os, header);
  for (std::size_t i = 0; i < s.size(); ++i) {
    w.cell(s.rho[i]).cell(s.u[i]).cell(s.v[i]);
    if (s.defined[i]) {
      w.cell(s.values[i]).cell(s.shape[i]).cell(1);
    } else {
      w.null().null().cell(0);
    }
    if (errors) w.cell(s.stderr_estimate[i]);
    if (catalog_values) w.cell((*catalog_values)[i]);
    w.end_row();
  }
}

nlohmann::json series_metadata(const pattern::PatternSeries& s) {
  nlohmann::json state{{"kind", states::kind_name(s.state.kind)}, {"phases", s.state.phases}};
  if (states::is_collective(s.state.kind)) {
    state["mean_n"] = s.state.mean_n;
    state["epsilon"] = s.state.epsilon;
  } else {
    state["n_photons"] = s.state.n_photons;
  }
  nlohmann::json scheme{{"kind", pattern::scheme_name(s.scheme.kind)}};
  if (s.scheme.kind == pattern::DetectionScheme::Kind::General) scheme["rho2"] = s.scheme.rho2;
  return {{"quantity", s.quantity},
          {"route", s.route},
          {"order", s.order},
          {"state", state},
          {"scheme", scheme},
          {"P_O", s.scale_factor},
          {"envelope_model", pattern::envelope_name(s.envelope)},
          {"signed_shape", s.signed_shape},
          {"averaging", s.averaging},
          {"shape_normalization", "catalog bracket; value = P_O * shape"},
          {"geometry",
           {{"wavenumber", s.geometry.wavenumber},
            {"slit_separation", s.geometry.slit_separation},
            {"slit_width", s.geometry.slit_width},
            {"screen_distance", s.geometry.screen_distance}}},
          {"points", s.size()}};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  f.close();
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

std::string sidecar_path(const std::string& path) { return path + ".meta.json"; }

std::string gnuplot_script(const std::string& csv_path, const std::string& title, bool with_errors) {
  std::ostringstream os;
  os << "# gnuplot -p " << csv_path << ".gp\n"
     << "set datafile separator ','\n"
     << "set datafile missing 'null'\n"
     << "set key autotitle columnhead\n"
     << "set title '" << title << "'\n"
     << "set xlabel 'u = k l rho / (2 z0)'\n"
     << "set ylabel 'value'\n"
     << "set grid\n";
  if (with_errors) {
    os << "plot '" << csv_path << "' using 2:4:7 with yerrorbars pt 7 ps 0.3 title 'value'\n";
  } else {
    os << "plot '" << csv_path << "' using 2:4 with lines lw 2 title 'value'\n";
  }
  return os.str();
}

}  // namespace qdiff::cli
