#include "qstab/cli/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qstab/cli/config.hpp"

namespace qstab::cli {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  if (s == "nan") return NAN;
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("malformed number in report: " + s);
  return x;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string to_csv_line(const ReportRow& r) {
  std::ostringstream s;
  s << r.id << ',' << r.side << ',' << format_double(r.p) << ',' << r.domain << ',' << format_double(r.gap) << ','
    << format_double(r.remainder) << ',' << format_double(r.exponent) << ',' << format_double(r.sigma) << ','
    << format_double(r.margin) << ',' << (r.passed ? "true" : "false") << ',' << format_double(r.ms);
  return s.str();
}

ReportRow parse_csv_line(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (f.size() != 11) throw ConfigError("report row has " + std::to_string(f.size()) + " fields: " + line);
  ReportRow r;
  r.id = std::stoi(f[0]);
  r.side = f[1];
  r.p = parse_double(f[2]);
  r.domain = f[3];
  r.gap = parse_double(f[4]);
  r.remainder = parse_double(f[5]);
  r.exponent = parse_double(f[6]);
  r.sigma = parse_double(f[7]);
  r.margin = parse_double(f[8]);
  if (f[9] != "true" && f[9] != "false") throw ConfigError("malformed passed field: " + f[9]);
  r.passed = f[9] == "true";
  r.ms = parse_double(f[10]);
  return r;
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
  std::ofstream out = open_out(path);
  out << kVerifyHeader << '\n';
  for (const auto& r : rows) out << to_csv_line(r) << '\n';
}

std::vector<ReportRow> read_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read report " + path);
  std::string line;
  if (!std::getline(in, line) || line != kVerifyHeader) throw ConfigError("unexpected report header in " + path);
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(parse_csv_line(line));
  }
  return rows;
}

void write_profile_csv(const std::string& path, const std::vector<std::string>& value_names,
                       const std::vector<const GridFunction*>& values) {
  if (values.empty() || value_names.size() != values.size()) throw std::invalid_argument("profile columns mismatch");
  const Grid& grid = *values[0]->grid();
  std::ofstream out = open_out(path);
  static const char* cartesian[] = {"x", "y", "z"};
  for (int a = 0; a < grid.axes(); ++a) out << (a ? "," : "") << (grid.radial() ? "rho" : cartesian[a]);
  for (const auto& n : value_names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int a = 0; a < grid.axes(); ++a) out << (a ? "," : "") << format_double(grid.coordinate(i, a));
    for (const auto* v : values) out << ',' << format_double((*v)[i]);
    out << '\n';
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace qstab::cli
