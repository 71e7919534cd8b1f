#include "qstab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qstab/errors.hpp"

namespace qstab {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::interval: return "interval";
    case DomainKind::box2d: return "box2d";
    case DomainKind::box3d: return "box3d";
    case DomainKind::radial3d: return "radial3d";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "interval") return DomainKind::interval;
  if (name == "box2d") return DomainKind::box2d;
  if (name == "box3d") return DomainKind::box3d;
  if (name == "radial3d") return DomainKind::radial3d;
  throw InvalidInput("unknown domain kind '" + name + "'");
}

Domain Domain::interval(double length) { return {DomainKind::interval, {length}, 0.0}; }
Domain Domain::box2d(double lx, double ly) { return {DomainKind::box2d, {lx, ly}, 0.0}; }
Domain Domain::box3d(double lx, double ly, double lz) {
  return {DomainKind::box3d, {lx, ly, lz}, 0.0};
}
Domain Domain::radial3d(double truncation_radius) {
  return {DomainKind::radial3d, {}, truncation_radius};
}

int Domain::axes() const {
  switch (kind) {
    case DomainKind::interval: return 1;
    case DomainKind::box2d: return 2;
    case DomainKind::box3d: return 3;
    case DomainKind::radial3d: return 1;
  }
  return 1;
}

int Domain::dimension() const { return kind == DomainKind::radial3d ? 3 : axes(); }

// ---------------------------------------------------------------------------

Grid::Grid(Domain domain, std::vector<int> points)
    : domain_(std::move(domain)), points_(std::move(points)) {
  const int na = domain_.axes();
  if (static_cast<int>(points_.size()) != na) {
    throw InvalidInput("grid needs " + std::to_string(na) + " point counts for " +
                       to_string(domain_.kind));
  }
  for (int n : points_) {
    if (n < 8) throw InvalidInput("grid needs at least 8 interior points per axis");
  }

  if (radial()) {
    const double R = domain_.truncation_radius;
    if (!(R > 0.0) || !std::isfinite(R)) throw InvalidInput("truncation_radius must be > 0");
    const int n = points_[0];
    const double h = R / n;
    spacing_ = {h};
    strides_ = {1};
    constexpr double four_pi = 4.0 * std::numbers::pi;
    weights_.resize(n);
    weights_[0] = four_pi / 3.0 * std::pow(0.5 * h, 3);
    for (int k = 1; k < n; ++k) {
      const double lo = (k - 0.5) * h;
      const double hi = (k + 0.5) * h;
      weights_[k] = four_pi / 3.0 * (hi * hi * hi - lo * lo * lo);
    }
    edges_.reserve(n);
    for (int k = 0; k < n; ++k) {
      const double face = (k + 0.5) * h;
      edges_.push_back({k, k + 1 < n ? k + 1 : -1, four_pi * face * face / h});
    }
    return;
  }

  if (static_cast<int>(domain_.extents.size()) != na) {
    throw InvalidInput("domain needs " + std::to_string(na) + " extents");
  }
  double w = 1.0;
  std::size_t total = 1;
  for (int a = 0; a < na; ++a) {
    const double L = domain_.extents[a];
    if (!(L > 0.0) || !std::isfinite(L)) throw InvalidInput("extents must be > 0");
    spacing_.push_back(L / (points_[a] + 1));
    strides_.push_back(total);
    total *= static_cast<std::size_t>(points_[a]);
    w *= spacing_.back();
  }
  weights_.assign(total, w);

  std::vector<int> idx(na, 0);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    for (int a = 0; a < na; ++a) {
      idx[a] = static_cast<int>(rem % points_[a]);
      rem /= points_[a];
    }
    for (int a = 0; a < na; ++a) {
      const double c = w / (spacing_[a] * spacing_[a]);
      const int ii = static_cast<int>(i);
      if (idx[a] == 0) edges_.push_back({ii, -1, c});
      if (idx[a] + 1 < points_[a]) {
        edges_.push_back({ii, ii + static_cast<int>(strides_[a]), c});
      } else {
        edges_.push_back({ii, -1, c});
      }
    }
  }
}

std::shared_ptr<const Grid> Grid::make(Domain domain, std::vector<int> points) {
  return std::make_shared<const Grid>(std::move(domain), std::move(points));
}

double Grid::coordinate(std::size_t i, int axis) const {
  if (radial()) return static_cast<double>(i) * spacing_[0];
  const std::size_t k = (i / strides_[axis]) % static_cast<std::size_t>(points_[axis]);
  return static_cast<double>(k + 1) * spacing_[axis];
}

double Grid::radius(std::size_t i) const {
  if (radial()) return coordinate(i, 0);
  double s = 0.0;
  for (int a = 0; a < axes(); ++a) {
    const double x = coordinate(i, a);
    s += x * x;
  }
  return std::sqrt(s);
}

double Grid::measure() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

double Grid::laplacian_ground_value() const {
  if (radial()) return std::numeric_limits<double>::quiet_NaN();
  double lam = 0.0;
  for (int a = 0; a < axes(); ++a) {
    const double h = spacing_[a];
    const double s = std::sin(std::numbers::pi * h / (2.0 * domain_.extents[a]));
    lam += 4.0 / (h * h) * s * s;
  }
  return lam;
}

std::string Grid::describe() const {
  std::ostringstream os;
  os << to_string(domain_.kind) << "[";
  for (int a = 0; a < axes(); ++a) os << (a ? "x" : "") << points_[a];
  os << "]";
  return os.str();
}

// ---------------------------------------------------------------------------

GridFunction::GridFunction(GridPtr grid) : grid_(std::move(grid)) {
  values_.assign(grid_->size(), 0.0);
}

GridFunction::GridFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) throw InvalidInput("value count does not match grid");
}

GridFunction GridFunction::sample(GridPtr grid,
                                  const std::function<double(std::span<const double>)>& fn) {
  GridFunction out(grid);
  const int na = grid->axes();
  std::vector<double> x(na);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    for (int a = 0; a < na; ++a) x[a] = grid->coordinate(i, a);
    out.values_[i] = fn(x);
  }
  return out;
}

GridFunction GridFunction::constant(GridPtr grid, double value) {
  GridFunction out(std::move(grid));
  std::fill(out.values_.begin(), out.values_.end(), value);
  return out;
}

GridFunction GridFunction::map(const std::function<double(double)>& fn) const {
  GridFunction out(*this);
  for (double& v : out.values_) v = fn(v);
  return out;
}

bool GridFunction::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool GridFunction::nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

bool GridFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (!a.grid() || !b.grid()) throw InvalidInput("grid function without grid");
  if (a.grid() != b.grid() && (a.grid()->describe() != b.grid()->describe() ||
                               a.grid()->spacing(0) != b.grid()->spacing(0))) {
    throw InvalidInput("grid functions live on different grids");
  }
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }
GridFunction operator*(GridFunction a, double s) { return a *= s; }
GridFunction operator-(GridFunction a) { return a *= -1.0; }

GridFunction hadamard(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  GridFunction out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

GridFunction signed_power(const GridFunction& u, double s) {
  return u.map([s](double v) {
    if (v == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(v), s - 1.0), v);
  });
}

// ---------------------------------------------------------------------------

namespace {

void require_finite(const GridFunction& u) {
  if (!u.finite()) throw InvalidInput("grid function has non-finite values");
}

}  // namespace

double lp_integral(const GridFunction& u, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("exponent must be finite and > 0");
  require_finite(u);
  const auto w = u.grid()->weights();
  double acc = 0.0;
  if (s == 2.0) {
    for (std::size_t i = 0; i < u.size(); ++i) acc += w[i] * u[i] * u[i];
  } else {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i] != 0.0) acc += w[i] * std::pow(std::abs(u[i]), s);
    }
  }
  return acc;
}

double lp_norm(const GridFunction& u, double s) {
  const double acc = lp_integral(u, s);
  return s == 2.0 ? std::sqrt(acc) : std::pow(acc, 1.0 / s);
}

double integral(const GridFunction& u) {
  const auto w = u.grid()->weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += w[i] * u[i];
  return acc;
}

double h1_seminorm(const GridFunction& u) {
  double acc = 0.0;
  for (const Edge& e : u.grid()->edges()) {
    const double d = u[e.i] - (e.j >= 0 ? u[e.j] : 0.0);
    acc += e.c * d * d;
  }
  return std::sqrt(acc);
}

void stiffness_apply(const Grid& grid, std::span<const double> u, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (const Edge& e : grid.edges()) {
    const double d = e.c * (u[e.i] - (e.j >= 0 ? u[e.j] : 0.0));
    out[e.i] += d;
    if (e.j >= 0) out[e.j] -= d;
  }
}

GridFunction apply_laplacian(const GridFunction& u) {
  GridFunction out(u.grid());
  stiffness_apply(*u.grid(), u.values(), out.values());
  const auto w = u.grid()->weights();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= w[i];
  return out;
}

double inner(const GridFunction& u, const GridFunction& v) {
  require_same_grid(u, v);
  const auto w = u.grid()->weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += w[i] * u[i] * v[i];
  return acc;
}

}  // namespace qstab
