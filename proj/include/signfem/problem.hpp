#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "signfem/geometry.hpp"

namespace signfem {

/// Piecewise-constant sign-changing coefficient: a_plus on Omega_+, a_minus on Omega_-.
struct Coefficient {
  double a_plus = 1.0;
  double a_minus = -1.0;

  Coefficient() = default;
  Coefficient(double plus, double minus);

  double operator()(Subdomain s) const { return s == Subdomain::Plus ? a_plus : a_minus; }
  /// Largest epsilon_0 with a >= epsilon_0 on Omega_+ and a <= -epsilon_0 on Omega_-.
  double epsilon0() const { return std::min(a_plus, -a_minus); }
  /// Contrast a_minus / a_plus.
  double contrast() const { return a_minus / a_plus; }
};

struct ValueGradient {
  double value = 0.0;
  Point gradient;
};

enum class ProblemKind { Polynomial, Singular };

std::string_view to_string(ProblemKind k);
ProblemKind parse_problem_kind(std::string_view name);

/// Corner-singularity exponent for the L-shaped interface,
/// lambda = (2/pi) arccos((1 - mu) / (2 |1 + mu|)). Requires mu < -3 or -1/3 < mu < 0.
double singular_exponent(double mu);

/// Rows: value and flux continuity at theta = pi/2, then at theta = 0 == 2 pi,
/// acting on (c1, c2, d1, d2). Flux rows are divided by lambda.
Eigen::Matrix4d transmission_matrix(double mu, double lambda);

struct SingularConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  /// sigma_min / sigma_max of the transmission matrix.
  double relative_singular_value = 0.0;
};

/// Null vector of the transmission matrix, scaled to max |constant| = 1 with
/// the first nonzero constant positive. Throws if the matrix is not singular
/// to 1e-8 relative.
SingularConstants singular_constants(double mu, double lambda);

/// Exact solutions of the two benchmarks.
///   Polynomial: u = mu x(x^2-1)(y^2-1) on x > 0 and x(x^2-1)(y^2-1) on x < 0.
///   Singular:   S = r^lambda (c1 sin(l t) + c2 sin(l (pi/2 - t)))        0 < t < pi/2
///               S = r^lambda (d1 sin(l (t - pi/2)) + d2 sin(l (2pi - t))) pi/2 < t < 2pi
class ExactSolution {
 public:
  static ExactSolution polynomial(double mu);
  static ExactSolution singular(double mu);

  ProblemKind kind() const { return kind_; }
  double mu() const { return mu_; }
  double lambda() const { return lambda_; }
  const SingularConstants& constants() const { return constants_; }
  Geometry geometry() const;

  double value(Point p, std::optional<Subdomain> side = std::nullopt) const;
  /// Value and Cartesian gradient. The singular gradient is unbounded at the
  /// origin and asking for it there throws InvalidArgument.
  ValueGradient evaluate(Point p, std::optional<Subdomain> side = std::nullopt) const;
  /// -div(a grad u) on the given side; zero for the singular solution.
  double source(Point p, Subdomain side, const Coefficient& a) const;
  /// Laplacian of u on the given side (away from the origin for Singular).
  double laplacian(Point p, Subdomain side) const;

 private:
  Subdomain side_of(Point p) const;

  ProblemKind kind_ = ProblemKind::Polynomial;
  double mu_ = -1.0;
  double lambda_ = 0.0;
  SingularConstants constants_;
};

/// Source evaluated at a point in the open interior of one subdomain.
double source_eval(const ExactSolution& sol, const Coefficient& a, Point p);

/// One benchmark configuration: geometry, coefficient (1, mu), exact solution,
/// source f = -div(a grad u) and Dirichlet data g = u on Gamma.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::Polynomial;
  double mu = -3.0;
  Geometry geometry = Geometry::SymmetricSquare;
  Coefficient coefficient;
  ExactSolution exact;

  static ProblemSpec make(ProblemKind kind, double mu);

  double source(Point p, Subdomain side) const { return exact.source(p, side, coefficient); }
  double boundary_value(Point p) const { return exact.value(p); }
  /// Multi-line description including the singular constants, for run logs.
  std::string describe() const;
};

}  // namespace signfem
