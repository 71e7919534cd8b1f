#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "qstab/grid.hpp"

namespace qstab::cli {

inline constexpr const char* kVerifyHeader = "id,side,p,domain,gap,remainder,exponent,sigma,margin,passed,ms";

struct ReportRow {
  int id = 0;
  std::string side;  // max, max_alt, min, or the inequality name
  double p = 0.0;    // exponent of the class (q for inequality rows)
  std::string domain;
  double gap = 0.0;
  double remainder = 0.0;
  double exponent = 0.0;
  double sigma = 0.0;
  double margin = 0.0;
  bool passed = false;
  double ms = 0.0;
};

// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

std::string to_csv_line(const ReportRow& r);
ReportRow parse_csv_line(const std::string& line);

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_csv(const std::string& path);

// Columns of grid coordinates followed by named value columns.
void write_profile_csv(const std::string& path, const std::vector<std::string>& value_names,
                       const std::vector<const GridFunction*>& values);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace qstab::cli
