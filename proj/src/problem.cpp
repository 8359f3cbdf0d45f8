#include "signfem/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>
#include <fmt/format.h>

namespace signfem {

namespace {

constexpr double kPi = std::numbers::pi;

// p(x,y) = x(x^2-1)(y^2-1) and its derivatives.
double poly_value(Point p) { return p.x * (p.x * p.x - 1.0) * (p.y * p.y - 1.0); }
Point poly_gradient(Point p) {
  return {(3.0 * p.x * p.x - 1.0) * (p.y * p.y - 1.0), 2.0 * p.y * p.x * (p.x * p.x - 1.0)};
}
double poly_laplacian(Point p) { return 6.0 * p.x * (p.y * p.y - 1.0) + 2.0 * p.x * (p.x * p.x - 1.0); }

}  // namespace

Coefficient::Coefficient(double plus, double minus) : a_plus(plus), a_minus(minus) {
  if (!(plus > 0.0) || !(minus < 0.0)) {
    throw InvalidArgument(fmt::format("coefficient must be positive on Omega_+ and negative on Omega_-, got ({}, {})",
                                      plus, minus));
  }
}

std::string_view to_string(ProblemKind k) { return k == ProblemKind::Polynomial ? "polynomial" : "singular"; }

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "polynomial") return ProblemKind::Polynomial;
  if (name == "singular") return ProblemKind::Singular;
  throw InvalidArgument("unknown problem '" + std::string(name) + "' (expected polynomial|singular)");
}

double singular_exponent(double mu) {
  const bool admissible = mu < -3.0 || (mu > -1.0 / 3.0 && mu < 0.0);
  if (!admissible || !std::isfinite(mu)) {
    throw InvalidArgument(fmt::format("mu = {} outside the singular range mu < -3 or -1/3 < mu < 0", mu));
  }
  const double arg = (1.0 - mu) / (2.0 * std::abs(1.0 + mu));
  if (arg < -1.0 || arg > 1.0) {
    throw InvalidArgument(fmt::format("arccos argument {} outside [-1, 1] for mu = {}", arg, mu));
  }
  return 2.0 / kPi * std::acos(arg);
}

Eigen::Matrix4d transmission_matrix(double mu, double lambda) {
  const double a = lambda * kPi / 2.0;        // lambda * (pi/2 - 0)
  const double b = lambda * 3.0 * kPi / 2.0;  // lambda * (2 pi - pi/2)
  Eigen::Matrix4d m;
  // clang-format off
  m << std::sin(a), 0.0,          0.0,                -std::sin(b),
       std::cos(a), -1.0,         -mu,                mu * std::cos(b),
       0.0,         std::sin(a),  -std::sin(b),       0.0,
       1.0,         -std::cos(a), -mu * std::cos(b),  mu;
  // clang-format on
  return m;
}

SingularConstants singular_constants(double mu, double lambda) {
  const Eigen::Matrix4d m = transmission_matrix(mu, lambda);
  const Eigen::JacobiSVD<Eigen::Matrix4d> svd(m, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double ratio = sigma(3) / sigma(0);
  if (!(ratio <= 1e-8)) {
    throw InvalidArgument(
        fmt::format("transmission matrix is not singular (sigma_min/sigma_max = {:.3e}) for mu = {}, lambda = {}",
                    ratio, mu, lambda));
  }
  Eigen::Vector4d v = svd.matrixV().col(3);
  v /= v.cwiseAbs().maxCoeff();
  for (int i = 0; i < 4; ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      break;
    }
  }
  for (int i = 0; i < 4; ++i) {
    if (std::abs(v(i)) < 1e-14) v(i) = 0.0;
  }
  return {v(0), v(1), v(2), v(3), ratio};
}

ExactSolution ExactSolution::polynomial(double mu) {
  if (!(mu < 0.0)) throw InvalidArgument(fmt::format("mu must be negative, got {}", mu));
  ExactSolution s;
  s.kind_ = ProblemKind::Polynomial;
  s.mu_ = mu;
  return s;
}

ExactSolution ExactSolution::singular(double mu) {
  ExactSolution s;
  s.kind_ = ProblemKind::Singular;
  s.mu_ = mu;
  s.lambda_ = singular_exponent(mu);
  s.constants_ = singular_constants(mu, s.lambda_);
  return s;
}

Geometry ExactSolution::geometry() const {
  return kind_ == ProblemKind::Polynomial ? Geometry::SymmetricSquare : Geometry::LShapedInterface;
}

Subdomain ExactSolution::side_of(Point p) const { return geometry::classify(geometry(), p); }

double ExactSolution::value(Point p, std::optional<Subdomain> side) const {
  if (kind_ == ProblemKind::Polynomial) {
    const Subdomain s = side.value_or(side_of(p));
    return (s == Subdomain::Plus ? mu_ : 1.0) * poly_value(p);
  }
  const double r = norm(p);
  if (r == 0.0) return 0.0;
  return evaluate(p, side).value;
}

ValueGradient ExactSolution::evaluate(Point p, std::optional<Subdomain> side) const {
  const Subdomain s = side.value_or(side_of(p));
  if (kind_ == ProblemKind::Polynomial) {
    const double scale = s == Subdomain::Plus ? mu_ : 1.0;
    return {scale * poly_value(p), scale * poly_gradient(p)};
  }
  const double r = norm(p);
  if (r == 0.0) throw InvalidArgument("singular solution gradient requested at the origin");
  double theta = std::atan2(p.y, p.x);
  if (s == Subdomain::Plus) {
    theta = std::clamp(theta, 0.0, kPi / 2.0);
  } else if (theta < kPi / 4.0) {
    theta += 2.0 * kPi;
  }
  const double l = lambda_;
  const auto& c = constants_;
  double angular = 0.0, angular_d = 0.0;
  if (s == Subdomain::Plus) {
    angular = c.c1 * std::sin(l * theta) + c.c2 * std::sin(l * (kPi / 2.0 - theta));
    angular_d = l * (c.c1 * std::cos(l * theta) - c.c2 * std::cos(l * (kPi / 2.0 - theta)));
  } else {
    angular = c.d1 * std::sin(l * (theta - kPi / 2.0)) + c.d2 * std::sin(l * (2.0 * kPi - theta));
    angular_d = l * (c.d1 * std::cos(l * (theta - kPi / 2.0)) - c.d2 * std::cos(l * (2.0 * kPi - theta)));
  }
  const double rl = std::pow(r, l);
  const double dr = l * rl / r * angular;   // dS/dr
  const double dt = rl / r * angular_d;     // (1/r) dS/dtheta
  const double ct = p.x / r, st = p.y / r;
  return {rl * angular, {dr * ct - dt * st, dr * st + dt * ct}};
}

double ExactSolution::laplacian(Point p, Subdomain side) const {
  if (kind_ == ProblemKind::Singular) return 0.0;
  return (side == Subdomain::Plus ? mu_ : 1.0) * poly_laplacian(p);
}

double ExactSolution::source(Point p, Subdomain side, const Coefficient& a) const {
  return -a(side) * laplacian(p, side);
}

double source_eval(const ExactSolution& sol, const Coefficient& a, Point p) {
  return sol.source(p, geometry::classify(sol.geometry(), p), a);
}

ProblemSpec ProblemSpec::make(ProblemKind kind, double mu) {
  ProblemSpec spec;
  spec.kind = kind;
  spec.mu = mu;
  spec.coefficient = Coefficient(1.0, mu);
  spec.exact = kind == ProblemKind::Polynomial ? ExactSolution::polynomial(mu) : ExactSolution::singular(mu);
  spec.geometry = spec.exact.geometry();
  return spec;
}

std::string ProblemSpec::describe() const {
  std::string out = fmt::format("problem = {}\nmu = {:.17g}\ngeometry = {}\na_plus = {:.17g}\na_minus = {:.17g}\n",
                                to_string(kind), mu, to_string(geometry), coefficient.a_plus, coefficient.a_minus);
  if (kind == ProblemKind::Singular) {
    const auto& c = exact.constants();
    out += fmt::format("lambda = {:.17g}\nc1 = {:.17g}\nc2 = {:.17g}\nd1 = {:.17g}\nd2 = {:.17g}\n", exact.lambda(), c.c1,
                       c.c2, c.d1, c.d2);
  }
  return out;
}

}  // namespace signfem
