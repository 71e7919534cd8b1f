#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qstab {

enum class DomainKind { interval, box2d, box3d, radial3d };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

struct Domain {
  DomainKind kind = DomainKind::interval;
  std::vector<double> extents;     // side lengths, cartesian kinds only
  double truncation_radius = 0.0;  // radial3d only

  static Domain interval(double length = 1.0);
  static Domain box2d(double lx = 1.0, double ly = 1.0);
  static Domain box3d(double lx = 1.0, double ly = 1.0, double lz = 1.0);
  static Domain radial3d(double truncation_radius = 20.0);

  // Number of stored axes (1 for radial3d).
  int axes() const;
  // Spatial dimension N of the underlying domain.
  int dimension() const;
};

// One coupling of the discrete Dirichlet form: coefficient * (u_i - u_j)^2,
// with j < 0 meaning the boundary (u_j = 0).
struct Edge {
  int i;
  int j;
  double c;
};

// Uniform tensor grid of interior nodes.
//
// Cartesian axes of length L with n points use x_k = (k+1) h, h = L/(n+1);
// boundary nodes are implicit zeros. The radial grid uses rho_k = k h,
// k = 0..n-1, h = R/n, with the origin as an unknown (zero flux there) and a
// Dirichlet node at rho = R. Weights are control-volume measures, so the
// stiffness form built from edges() satisfies discrete integration by parts
// exactly.
class Grid {
public:
  Grid(Domain domain, std::vector<int> points);

  static std::shared_ptr<const Grid> make(Domain domain, std::vector<int> points);

  const Domain& domain() const { return domain_; }
  DomainKind kind() const { return domain_.kind; }
  bool radial() const { return domain_.kind == DomainKind::radial3d; }
  int axes() const { return static_cast<int>(points_.size()); }
  int dimension() const { return domain_.dimension(); }
  int points(int axis) const { return points_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  std::size_t size() const { return weights_.size(); }

  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Coordinate of node i along an axis (the radius for radial grids).
  double coordinate(std::size_t i, int axis) const;
  // Euclidean distance to the origin (radial) or the coordinate tuple norm.
  double radius(std::size_t i) const;
  // Total measure of the discrete domain.
  double measure() const;
  // Smallest eigenvalue of the discrete Dirichlet Laplacian, when known in
  // closed form (cartesian grids); NaN otherwise.
  double laplacian_ground_value() const;

  std::string describe() const;

private:
  Domain domain_;
  std::vector<int> points_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::vector<double> weights_;
  std::vector<Edge> edges_;
};

using GridPtr = std::shared_ptr<const Grid>;

class GridFunction {
public:
  GridFunction() = default;
  explicit GridFunction(GridPtr grid);
  GridFunction(GridPtr grid, std::vector<double> values);

  // Evaluate fn at the coordinates of every node.
  static GridFunction sample(GridPtr grid,
                             const std::function<double(std::span<const double>)>& fn);
  static GridFunction constant(GridPtr grid, double value);

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  GridFunction map(const std::function<double(double)>& fn) const;
  bool finite() const;
  bool nonnegative() const;
  bool is_zero() const;
  double min() const;
  double max() const;
  double max_abs() const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s);

private:
  GridPtr grid_;
  std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);
GridFunction operator*(GridFunction a, double s);
GridFunction operator-(GridFunction a);
// Pointwise product.
GridFunction hadamard(const GridFunction& a, const GridFunction& b);
// |u|^{s-2} u, with the convention 0 at u = 0.
GridFunction signed_power(const GridFunction& u, double s);

void require_same_grid(const GridFunction& a, const GridFunction& b);

double lp_norm(const GridFunction& u, double s);
// Sum of w_i |u_i|^s, i.e. lp_norm(u, s)^s without the final root.
double lp_integral(const GridFunction& u, double s);
double integral(const GridFunction& u);
double h1_seminorm(const GridFunction& u);
GridFunction apply_laplacian(const GridFunction& u);
double inner(const GridFunction& u, const GridFunction& v);

// Coefficient-space products used by the solvers: K u (stiffness) and W u.
void stiffness_apply(const Grid& grid, std::span<const double> u, std::span<double> out);

}  // namespace qstab
