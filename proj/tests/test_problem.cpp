#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "signfem/problem.hpp"
#include "signfem/quadrature.hpp"

using namespace signfem;

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// int over the reference triangle of xi^a eta^b.
double reference_monomial(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

Point polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

}  // namespace

TEST(Quadrature, RulesIntegrateMonomialsExactly) {
  const std::array<Point, 3> ref{Point{0, 0}, Point{1, 0}, Point{0, 1}};
  std::vector<TriangleRule> rules{symmetric_rule_degree4(), symmetric_rule_degree6(), collapsed_gauss_rule(10),
                                  collapsed_gauss_rule(3)};
  for (const auto& rule : rules) {
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    for (int a = 0; a <= rule.degree; ++a) {
      for (int b = 0; a + b <= rule.degree; ++b) {
        const double got = integrate(ref, rule, [&](Point p, const auto&) { return std::pow(p.x, a) * std::pow(p.y, b); });
        EXPECT_NEAR(got, reference_monomial(a, b), 1e-13) << "degree " << rule.degree << " monomial " << a << "," << b;
      }
    }
  }
}

TEST(Quadrature, GradedRuleHandlesCornerSingularity) {
  // int_T r^beta over the reference triangle, by the 1D polar oracle
  // int_0^{pi/2} R(t)^{beta+2}/(beta+2) dt with R(t) = 1/(cos t + sin t).
  const double beta = 2.0 * 0.46 - 2.0;
  std::vector<double> nodes, weights;
  gauss_legendre_unit(60, nodes, weights);
  double oracle = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double t = nodes[i] * kPi / 2.0;
    oracle += weights[i] * kPi / 2.0 * std::pow(1.0 / (std::cos(t) + std::sin(t)), beta + 2.0) / (beta + 2.0);
  }
  const std::array<Point, 3> ref{Point{0, 0}, Point{1, 0}, Point{0, 1}};
  const double got = integrate_graded(ref, 0, 40, collapsed_gauss_rule(10),
                                      [&](Point p, const auto&) { return std::pow(norm(p), beta); });
  EXPECT_NEAR(got, oracle, 1e-6 * oracle);

  // Barycentric coordinates handed to the integrand refer to the parent triangle.
  const std::array<Point, 3> tri{Point{0.5, 0.5}, Point{0.0, 0.0}, Point{1.0, 0.0}};
  const double linear = integrate_graded(tri, 1, 5, symmetric_rule_degree4(),
                                         [&](Point p, const std::array<double, 3>& b) {
                                           const Point q = map_barycentric(tri, b);
                                           EXPECT_NEAR(q.x, p.x, 1e-15);
                                           return b[2];
                                         });
  EXPECT_NEAR(linear, triangle_area(tri) / 3.0, 1e-15);
}

TEST(SingularExponent, MatchesReportedValues) {
  EXPECT_NEAR(singular_exponent(-5.0), 0.4601, 1e-4);
  EXPECT_NEAR(singular_exponent(-100.0), 0.6593, 1e-4);
  const double limit = singular_exponent(-1e6);
  EXPECT_GT(limit, 0.666);
  EXPECT_LT(limit, 0.667);
}

TEST(SingularExponent, RejectsInadmissibleContrast) {
  EXPECT_THROW(singular_exponent(-2.0), InvalidArgument);
  EXPECT_THROW(singular_exponent(-1.0), InvalidArgument);
  EXPECT_THROW(singular_exponent(0.5), InvalidArgument);
  EXPECT_THROW(singular_exponent(-0.5), InvalidArgument);
  EXPECT_NO_THROW(singular_exponent(-0.2));
}

TEST(SingularExponent, MonotoneBelowMinusThree) {
  double previous = singular_exponent(-3.001);
  for (int i = 1; i < 100; ++i) {
    const double mu = -3.001 - 0.5 * i;
    const double l = singular_exponent(mu);
    EXPECT_GT(l, previous) << "mu = " << mu;
    EXPECT_GT(l, 0.0);
    EXPECT_LT(l, 1.0);
    previous = l;
  }
}

TEST(SingularConstants, NullVectorOfTransmissionSystem) {
  for (double mu : {-5.0, -100.0, -3.5, -0.2, -0.1}) {
    const double l = singular_exponent(mu);
    const Eigen::Matrix4d m = transmission_matrix(mu, l);
    const Eigen::JacobiSVD<Eigen::Matrix4d> svd(m);
    EXPECT_LE(svd.singularValues()(3), 1e-8 * svd.singularValues()(0)) << "mu = " << mu;

    const auto c = singular_constants(mu, l);
    const Eigen::Vector4d v(c.c1, c.c2, c.d1, c.d2);
    EXPECT_LE((m * v).cwiseAbs().maxCoeff(), 1e-10) << "mu = " << mu;
    EXPECT_NEAR(v.cwiseAbs().maxCoeff(), 1.0, 1e-15);
    for (int i = 0; i < 4; ++i) {
      if (v(i) != 0.0) {
        EXPECT_GT(v(i), 0.0);
        break;
      }
    }
  }
  EXPECT_THROW(singular_constants(-5.0, 0.3), InvalidArgument);
}

TEST(SingularSolution, TransmissionConditionsOnBothRays) {
  for (double mu : {-5.0, -100.0}) {
    const auto s = ExactSolution::singular(mu);
    for (double theta : {kPi / 2.0, 0.0}) {
      const Point p = polar(0.5, theta);
      const auto plus = s.evaluate(p, Subdomain::Plus);
      const auto minus = s.evaluate(p, Subdomain::Minus);
      EXPECT_NEAR(plus.value, minus.value, 1e-12);
      const Point e_theta{-std::sin(theta), std::cos(theta)};
      EXPECT_NEAR(dot(plus.gradient, e_theta), mu * dot(minus.gradient, e_theta), 1e-10 * std::abs(mu));
    }
  }
}

TEST(SingularSolution, ValueFormulaAndFiniteDifferenceGradient) {
  const auto s = ExactSolution::singular(-5.0);
  const double l = s.lambda();
  const auto& c = s.constants();
  const Point diag = polar(0.3, kPi / 4.0);
  EXPECT_NEAR(s.value(diag), std::pow(0.3, l) * (c.c1 * std::sin(l * kPi / 4.0) + c.c2 * std::sin(l * kPi / 4.0)),
              1e-14);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  int checked = 0;
  while (checked < 50) {
    const Point p{coord(rng), coord(rng)};
    if (norm(p) < 0.05 || std::abs(p.x) < 1e-3 || std::abs(p.y) < 1e-3) continue;
    const double h = 1e-6;
    const auto side = geometry::classify(Geometry::LShapedInterface, p);
    const auto ex = s.evaluate(p, side);
    const double gx = (s.value({p.x + h, p.y}, side) - s.value({p.x - h, p.y}, side)) / (2 * h);
    const double gy = (s.value({p.x, p.y + h}, side) - s.value({p.x, p.y - h}, side)) / (2 * h);
    const double scale = norm(ex.gradient);
    EXPECT_LE(norm(Point{gx, gy} - ex.gradient), 1e-6 * scale) << "at " << p.x << "," << p.y;
    ++checked;
  }
  EXPECT_THROW(s.evaluate({0.0, 0.0}), InvalidArgument);
}

TEST(SingularSolution, HarmonicInEachSubdomain) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (double mu : {-5.0, -100.0}) {
    const auto s = ExactSolution::singular(mu);
    const Coefficient a(1.0, mu);
    int plus = 0, minus = 0;
    while (plus < 50 || minus < 50) {
      const Point p{coord(rng), coord(rng)};
      if (norm(p) < 0.1 || std::abs(p.x) < 1e-3 || std::abs(p.y) < 1e-3) continue;
      const auto side = geometry::classify(Geometry::LShapedInterface, p);
      int& count = side == Subdomain::Plus ? plus : minus;
      if (count >= 50) continue;
      const double h = 1e-4;
      const double lap = (s.value({p.x + h, p.y}, side) + s.value({p.x - h, p.y}, side) + s.value({p.x, p.y + h}, side) +
                          s.value({p.x, p.y - h}, side) - 4.0 * s.value(p, side)) /
                         (h * h);
      EXPECT_LE(std::abs(a(side) * lap), 1e-4);
      EXPECT_EQ(source_eval(s, a, p), 0.0);
      ++count;
    }
  }
}

TEST(PolynomialSolution, PointValuesAndBoundary) {
  const auto u = ExactSolution::polynomial(-3.0);
  EXPECT_NEAR(u.value({0.5, 0.0}), -1.125, 1e-15);
  for (double mu : {-3.0, -0.5, -7.0}) {
    const auto v = ExactSolution::polynomial(mu);
    for (double t = -1.0; t <= 1.0; t += 0.125) {
      EXPECT_EQ(v.value({t, 1.0}), 0.0);
      EXPECT_EQ(v.value({t, -1.0}), 0.0);
      EXPECT_EQ(v.value({1.0, t}), 0.0);
      EXPECT_EQ(v.value({-1.0, t}), 0.0);
    }
  }
}

TEST(PolynomialSolution, SourceMatchesFiniteDifferenceLaplacian) {
  // Second central differences are exact for the cubic/quadratic factors.
  const double mu = -3.0;
  const auto u = ExactSolution::polynomial(mu);
  const Coefficient a(1.0, mu);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> coord(-0.99, 0.99);
  for (int i = 0; i < 100; ++i) {
    const Point p{coord(rng), coord(rng)};
    if (std::abs(p.x) < 0.01) continue;
    const auto side = p.x > 0 ? Subdomain::Plus : Subdomain::Minus;
    const double h = 1e-3;
    const double lap = (u.value({p.x + h, p.y}, side) + u.value({p.x - h, p.y}, side) + u.value({p.x, p.y + h}, side) +
                        u.value({p.x, p.y - h}, side) - 4.0 * u.value(p, side)) /
                       (h * h);
    EXPECT_NEAR(source_eval(u, a, p), -a(side) * lap, 1e-7);
    const double closed = -(6.0 * p.x * (p.y * p.y - 1.0) + 2.0 * p.x * (p.x * p.x - 1.0)) * mu;
    EXPECT_NEAR(source_eval(u, a, p), closed, 1e-13);
  }
  for (double y = -1.0; y <= 1.0; y += 0.1) {
    EXPECT_EQ(u.source({0.0, y}, Subdomain::Plus, a), 0.0);
    EXPECT_EQ(u.source({0.0, y}, Subdomain::Minus, a), 0.0);
  }
}

TEST(PolynomialSolution, InterfaceValueAndFluxContinuity) {
  const double mu = -3.0;
  const auto u = ExactSolution::polynomial(mu);
  const Coefficient a(1.0, mu);
  for (int i = 0; i < 100; ++i) {
    const double y = -1.0 + 2.0 * i / 99.0;
    const auto plus = u.evaluate({0.0, y}, Subdomain::Plus);
    const auto minus = u.evaluate({0.0, y}, Subdomain::Minus);
    EXPECT_NEAR(plus.value, 0.0, 1e-12);
    EXPECT_NEAR(minus.value, 0.0, 1e-12);
    EXPECT_NEAR(a.a_plus * plus.gradient.x, mu * (1.0 - y * y), 1e-12);
    EXPECT_NEAR(a.a_minus * minus.gradient.x, mu * (1.0 - y * y), 1e-12);
  }
}

TEST(Coefficient, ValidatesSigns) {
  EXPECT_THROW(Coefficient(1.0, 0.5), InvalidArgument);
  EXPECT_THROW(Coefficient(-1.0, -0.5), InvalidArgument);
  const Coefficient a(1.0, -3.0);
  EXPECT_EQ(a.epsilon0(), 1.0);
  EXPECT_EQ(a(Subdomain::Minus), -3.0);
}

TEST(ProblemSpec, DescribesSingularConstants) {
  const auto spec = ProblemSpec::make(ProblemKind::Singular, -5.0);
  EXPECT_EQ(spec.geometry, Geometry::LShapedInterface);
  const std::string text = spec.describe();
  EXPECT_NE(text.find("lambda = 0.460"), std::string::npos);
  EXPECT_NE(text.find("c1 = "), std::string::npos);
  EXPECT_EQ(parse_problem_kind("polynomial"), ProblemKind::Polynomial);
  EXPECT_THROW(parse_problem_kind("cubic"), InvalidArgument);
}
