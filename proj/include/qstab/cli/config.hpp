#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qstab/grid.hpp"
#include "qstab/optimal.hpp"
#include "qstab/schrodinger.hpp"

namespace qstab::cli {

// Invalid or unreadable configuration; the message names the offending path.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct DomainSpec {
  DomainKind kind = DomainKind::interval;
  std::vector<double> extents = {1.0};  // cartesian side lengths
  std::vector<int> resolution = {255};  // interior nodes per axis
  double truncation_radius = 20.0;
};

// Named source presets. On cartesian domains the profile is centered at the
// domain midpoint, on radial3d at the origin.
//   constant:   value
//   sine:       value * prod sin(pi x_i / L_i)      (cartesian only)
//   gaussian:   value * exp(-|x - c|^2 / width^2)
//   power_tail: C (1 + |x - c|^2)^{-alpha/2}
struct SourceSpec {
  std::string preset = "constant";
  double value = 1.0;
  double width = 0.25;
  double C = 1.0;
  double alpha = 3.0;
  double R = 1.0;
};

enum class Side { max, min, both };

struct ProblemSpec {
  std::vector<double> p = {2.0};
  Side side = Side::both;
  SourceSpec source;
  double potential = 0.0;  // constant potential used by `energy`
};

struct SolverSpec {
  SolverOptions linear{1e-10, 100000};
  OptimizerOptions optimizer;
};

struct SweepSpec {
  int samples = 100;
  std::uint64_t seed = 1;
  bool inequalities = true;
  int inequality_samples = 100;
};

struct DecaySpec {
  double q = 1.5;
  double a = 1.0;
  double alpha = 3.0;
  double R = 1.0;
  double C = 1.0;
  double truncation_radius = 40.0;
  int resolution = 4096;
  bool manufactured = true;
  double manufactured_truncation = 20.0;
  double recovery_tolerance = 1e-4;
};

struct OutputSpec {
  std::string dir = "qstab_out";
  bool timing = false;  // fill the ms column; off keeps reruns byte-identical
};

struct RunConfig {
  DomainSpec domain;
  ProblemSpec problem;
  SolverSpec solver;
  SweepSpec sweep;
  DecaySpec decay;
  OutputSpec output;
  int threads = 1;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);
// Canonical form: every field, defaults filled in, keys sorted.
nlohmann::json to_json(const RunConfig& c);
// FNV-1a of the canonical dump, as 16 hex digits.
std::string config_hash(const RunConfig& c);

std::string to_string(Side side);
GridPtr make_grid(const DomainSpec& d);
SourceTerm make_source(const GridPtr& grid, const SourceSpec& s);

}  // namespace qstab::cli
