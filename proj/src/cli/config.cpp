#include "qstab/cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

namespace qstab::cli {

using nlohmann::json;

namespace {

// Reads one JSON object, tracking its path and rejecting unknown keys.
class Reader {
public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(path_ + (key.empty() ? "" : "/" + key) + ": " + what);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) { return j_.at(key); }
  std::string child(const std::string& key) const { return path_ + "/" + key; }

  double number(const std::string& key, double def, const std::function<bool(double)>& ok,
                const std::string& range) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || !ok(x)) fail(key, "expected " + range + ", got " + v.dump());
    return x;
  }

  int integer(const std::string& key, int def, int lo, int hi) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi) fail(key, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(x);
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail(key, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    if (!j_.at(key).is_boolean()) fail(key, "expected true or false");
    return j_.at(key).get<bool>();
  }

  std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& options) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    const std::string s = v.get<std::string>();
    for (const auto& o : options) {
      if (o == s) return s;
    }
    std::string all;
    for (const auto& o : options) all += (all.empty() ? "" : ", ") + o;
    fail(key, "unknown value \"" + s + "\" (expected one of " + all + ")");
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def,
                              const std::function<bool(double)>& ok, const std::string& range) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    std::vector<double> out;
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(key + "/" + std::to_string(i), "expected a number");
        out.push_back(v[i].get<double>());
      }
    } else {
      fail(key, "expected a number or an array of numbers");
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!std::isfinite(out[i]) || !ok(out[i])) {
        fail(key + "/" + std::to_string(i), "expected " + range + ", got " + json(out[i]).dump());
      }
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown key");
    }
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

bool positive(double x) { return x > 0.0; }

DomainSpec parse_domain(Reader r) {
  DomainSpec d;
  const std::string kind = r.choice("kind", "interval", {"interval", "box2d", "box3d", "radial3d"});
  d.kind = domain_kind_from_string(kind);
  const int axes = Domain{d.kind, {}, 0.0}.axes();
  const bool radial = d.kind == DomainKind::radial3d;
  if (radial) {
    if (r.has("extents")) r.fail("extents", "radial3d takes truncation_radius instead");
    d.truncation_radius = r.number("truncation_radius", 20.0, positive, "a positive radius");
  } else {
    if (r.has("truncation_radius")) r.fail("truncation_radius", "only radial3d has a truncation radius");
    d.extents = r.numbers("extents", std::vector<double>(axes, 1.0), positive, "positive lengths");
    if (static_cast<int>(d.extents.size()) != axes) r.fail("extents", "expected " + std::to_string(axes) + " entries");
  }
  const int def = radial ? 400 : d.kind == DomainKind::interval ? 255 : d.kind == DomainKind::box2d ? 31 : 15;
  std::vector<double> res = r.numbers("resolution", std::vector<double>(axes, def),
                                      [](double x) { return x >= 2 && x <= 1 << 24 && x == std::floor(x); },
                                      "integers in [2, 2^24]");
  if (static_cast<int>(res.size()) == 1 && axes > 1) res.assign(axes, res[0]);
  if (static_cast<int>(res.size()) != axes) r.fail("resolution", "expected " + std::to_string(axes) + " entries");
  d.resolution.assign(res.begin(), res.end());
  r.finish();
  return d;
}

SourceSpec parse_source(Reader r) {
  SourceSpec s;
  s.preset = r.choice("preset", "constant", {"constant", "sine", "gaussian", "power_tail"});
  s.value = r.number("value", 1.0, [](double) { return true; }, "a number");
  s.width = r.number("width", 0.25, positive, "a positive width");
  s.C = r.number("C", 1.0, [](double x) { return x >= 0.0; }, "a nonnegative number");
  s.alpha = r.number("alpha", 3.0, positive, "a positive exponent");
  s.R = r.number("R", 1.0, positive, "a positive radius");
  r.finish();
  return s;
}

ProblemSpec parse_problem(Reader r) {
  ProblemSpec p;
  p.p = r.numbers("p", {2.0}, [](double x) { return x > 1.0; }, "p > 1 (finite)");
  const std::string side = r.choice("side", "both", {"max", "min", "both"});
  p.side = side == "max" ? Side::max : side == "min" ? Side::min : Side::both;
  if (r.has("source")) p.source = parse_source(Reader(r.at("source"), r.child("source")));
  p.potential = r.number("potential", 0.0, [](double) { return true; }, "a number");
  r.finish();
  return p;
}

SolverSpec parse_solver(Reader r) {
  SolverSpec s;
  s.linear.tol = r.number("linear_tol", 1e-10, [](double x) { return x > 0.0 && x < 1.0; }, "a tolerance in (0, 1)");
  s.linear.max_iterations = r.integer("linear_max_iterations", 100000, 1, 1 << 30);
  s.optimizer.tol = r.number("tol", 1e-8, [](double x) { return x > 0.0 && x < 1.0; }, "a tolerance in (0, 1)");
  s.optimizer.max_iterations = r.integer("max_iterations", 100000, 1, 1 << 30);
  s.optimizer.eps_schedule = r.numbers("eps_schedule", s.optimizer.eps_schedule, positive, "positive levels");
  for (std::size_t i = 1; i < s.optimizer.eps_schedule.size(); ++i) {
    if (!(s.optimizer.eps_schedule[i] < s.optimizer.eps_schedule[i - 1])) {
      r.fail("eps_schedule", "levels must decrease strictly");
    }
  }
  s.optimizer.linear = {std::min(s.linear.tol, 1e-12), s.linear.max_iterations};
  r.finish();
  return s;
}

SweepSpec parse_sweep(Reader r) {
  SweepSpec s;
  s.samples = r.integer("samples", 100, 0, 1 << 24);
  s.seed = r.unsigned64("seed", 1);
  s.inequalities = r.boolean("inequalities", true);
  s.inequality_samples = r.integer("inequality_samples", 100, 0, 1 << 24);
  r.finish();
  return s;
}

DecaySpec parse_decay(Reader r) {
  DecaySpec d;
  d.q = r.number("q", 1.5, [](double x) { return x > 1.0 && x < 2.0; }, "q in (1, 2)");
  d.a = r.number("a", 1.0, positive, "a > 0");
  // The radial grid fixes N = 3.
  d.alpha = r.number("alpha", 3.0, [](double x) { return x > 2.5; }, "alpha > (N+2)/2 = 2.5");
  d.R = r.number("R", 1.0, positive, "R > 0");
  d.C = r.number("C", 1.0, positive, "C > 0");
  d.truncation_radius = r.number("truncation_radius", 40.0, positive, "a positive radius");
  d.resolution = r.integer("resolution", 4096, 16, 1 << 24);
  d.manufactured = r.boolean("manufactured", true);
  d.manufactured_truncation = r.number("manufactured_truncation", 20.0, positive, "a positive radius");
  d.recovery_tolerance = r.number("recovery_tolerance", 1e-4, positive, "a positive tolerance");
  if (!(2.0 * d.R < 0.8 * d.truncation_radius)) {
    r.fail("truncation_radius", "fit window [2R, 0.8 truncation_radius] is empty");
  }
  r.finish();
  return d;
}

OutputSpec parse_output(Reader r) {
  OutputSpec o;
  if (r.has("dir")) {
    if (!r.at("dir").is_string() || r.at("dir").get<std::string>().empty()) r.fail("dir", "expected a directory path");
    o.dir = r.at("dir").get<std::string>();
  }
  o.timing = r.boolean("timing", false);
  r.finish();
  return o;
}

}  // namespace

std::string to_string(Side side) {
  switch (side) {
    case Side::max: return "max";
    case Side::min: return "min";
    case Side::both: return "both";
  }
  return "both";
}

RunConfig parse_config(const json& j) {
  Reader r(j, "");
  RunConfig c;
  if (r.has("domain")) c.domain = parse_domain(Reader(r.at("domain"), "/domain"));
  else c.domain = parse_domain(Reader(json::object(), "/domain"));
  if (r.has("problem")) c.problem = parse_problem(Reader(r.at("problem"), "/problem"));
  if (r.has("solver")) c.solver = parse_solver(Reader(r.at("solver"), "/solver"));
  if (r.has("sweep")) c.sweep = parse_sweep(Reader(r.at("sweep"), "/sweep"));
  if (r.has("decay")) c.decay = parse_decay(Reader(r.at("decay"), "/decay"));
  if (r.has("output")) c.output = parse_output(Reader(r.at("output"), "/output"));
  c.threads = r.integer("threads", 1, 1, 1024);
  r.finish();
  if (c.problem.source.preset == "sine" && c.domain.kind == DomainKind::radial3d) {
    throw ConfigError("/problem/source/preset: sine needs a cartesian domain");
  }
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json to_json(const RunConfig& c) {
  json j;
  j["domain"] = {{"kind", to_string(c.domain.kind)}, {"resolution", c.domain.resolution}};
  if (c.domain.kind == DomainKind::radial3d) j["domain"]["truncation_radius"] = c.domain.truncation_radius;
  else j["domain"]["extents"] = c.domain.extents;
  const SourceSpec& s = c.problem.source;
  j["problem"] = {{"p", c.problem.p},
                  {"side", to_string(c.problem.side)},
                  {"potential", c.problem.potential},
                  {"source",
                   {{"preset", s.preset}, {"value", s.value}, {"width", s.width}, {"C", s.C}, {"alpha", s.alpha},
                    {"R", s.R}}}};
  j["solver"] = {{"linear_tol", c.solver.linear.tol},
                 {"linear_max_iterations", c.solver.linear.max_iterations},
                 {"tol", c.solver.optimizer.tol},
                 {"max_iterations", c.solver.optimizer.max_iterations},
                 {"eps_schedule", c.solver.optimizer.eps_schedule}};
  j["sweep"] = {{"samples", c.sweep.samples},
                {"seed", c.sweep.seed},
                {"inequalities", c.sweep.inequalities},
                {"inequality_samples", c.sweep.inequality_samples}};
  j["decay"] = {{"q", c.decay.q},
                {"a", c.decay.a},
                {"alpha", c.decay.alpha},
                {"R", c.decay.R},
                {"C", c.decay.C},
                {"truncation_radius", c.decay.truncation_radius},
                {"resolution", c.decay.resolution},
                {"manufactured", c.decay.manufactured},
                {"manufactured_truncation", c.decay.manufactured_truncation},
                {"recovery_tolerance", c.decay.recovery_tolerance}};
  j["output"] = {{"dir", c.output.dir}, {"timing", c.output.timing}};
  return j;
}

std::string config_hash(const RunConfig& c) {
  // Output location and thread count do not change results.
  json j = to_json(c);
  j["output"].erase("dir");
  const std::string text = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GridPtr make_grid(const DomainSpec& d) {
  Domain dom;
  switch (d.kind) {
    case DomainKind::interval: dom = Domain::interval(d.extents.at(0)); break;
    case DomainKind::box2d: dom = Domain::box2d(d.extents.at(0), d.extents.at(1)); break;
    case DomainKind::box3d: dom = Domain::box3d(d.extents.at(0), d.extents.at(1), d.extents.at(2)); break;
    case DomainKind::radial3d: dom = Domain::radial3d(d.truncation_radius); break;
  }
  return Grid::make(dom, d.resolution);
}

SourceTerm make_source(const GridPtr& grid, const SourceSpec& s) {
  const Grid& g = *grid;
  const int axes = g.axes();
  std::vector<double> center(axes, 0.0), length(axes, 0.0);
  if (!g.radial()) {
    for (int a = 0; a < axes; ++a) {
      length[a] = g.domain().extents[a];
      center[a] = 0.5 * length[a];
    }
  }
  auto dist2 = [center](std::span<const double> x) {
    double r = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) r += (x[a] - center[a]) * (x[a] - center[a]);
    return r;
  };
  if (s.preset == "constant") return {GridFunction::constant(grid, s.value)};
  if (s.preset == "sine") {
    if (g.radial()) throw ConfigError("/problem/source/preset: sine needs a cartesian domain");
    return {GridFunction::sample(grid, [&](std::span<const double> x) {
      double v = s.value;
      for (std::size_t a = 0; a < x.size(); ++a) v *= std::sin(std::numbers::pi * x[a] / length[a]);
      return v;
    })};
  }
  if (s.preset == "gaussian") {
    return {GridFunction::sample(grid, [&](std::span<const double> x) { return s.value * std::exp(-dist2(x) / (s.width * s.width)); })};
  }
  return {GridFunction::sample(grid, [&](std::span<const double> x) { return s.C * std::pow(1.0 + dist2(x), -0.5 * s.alpha); })};
}

}  // namespace qstab::cli
