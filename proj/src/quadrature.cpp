#include "signfem/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace signfem {

namespace {

void add_orbit3(TriangleRule& rule, double a, double b, double w) {
  rule.barycentric.push_back({a, b, b});
  rule.barycentric.push_back({b, a, b});
  rule.barycentric.push_back({b, b, a});
  for (int i = 0; i < 3; ++i) rule.weights.push_back(w);
}

void add_orbit6(TriangleRule& rule, double a, double b, double c, double w) {
  const std::array<std::array<double, 3>, 6> perms{{{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}}};
  for (const auto& p : perms) {
    rule.barycentric.push_back(p);
    rule.weights.push_back(w);
  }
}

}  // namespace

const TriangleRule& symmetric_rule_degree4() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    r.degree = 4;
    add_orbit3(r, 0.108103018168070, 0.445948490915965, 0.223381589678011);
    add_orbit3(r, 0.816847572980459, 0.091576213509771, 0.109951743655322);
    return r;
  }();
  return rule;
}

const TriangleRule& symmetric_rule_degree6() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    r.degree = 6;
    add_orbit3(r, 0.501426509658179, 0.249286745170910, 0.116786275726379);
    add_orbit3(r, 0.873821971016996, 0.063089014491502, 0.050844906370207);
    add_orbit6(r, 0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374);
    return r;
  }();
  return rule;
}

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      const double p = n == 0 ? 1.0 : p1;
      dp = n * (x * p - p0) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

TriangleRule collapsed_gauss_rule(int degree) {
  const int n = (degree + 3) / 2;
  std::vector<double> nodes, weights;
  gauss_legendre_unit(n, nodes, weights);
  TriangleRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = nodes[i];
      const double v = nodes[j];
      const double xi = u;
      const double eta = v * (1.0 - u);
      rule.barycentric.push_back({1.0 - xi - eta, xi, eta});
      rule.weights.push_back(2.0 * weights[i] * weights[j] * (1.0 - u));
    }
  }
  return rule;
}

double triangle_area(const std::array<Point, 3>& tri) {
  return 0.5 * std::abs(cross(tri[1] - tri[0], tri[2] - tri[0]));
}

double integrate(const std::array<Point, 3>& tri, const TriangleRule& rule,
                 const std::function<double(Point, const std::array<double, 3>&)>& f) {
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    sum += rule.weights[q] * f(map_barycentric(tri, rule.barycentric[q]), rule.barycentric[q]);
  }
  return triangle_area(tri) * sum;
}

double integrate_graded(const std::array<Point, 3>& tri, int singular_vertex, int levels,
                        const TriangleRule& rule,
                        const std::function<double(Point, const std::array<double, 3>&)>& f) {
  using Bary = std::array<double, 3>;
  const double area = triangle_area(tri);
  const auto mid = [](const Bary& a, const Bary& b) {
    return Bary{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
  };
  // Sub-triangle in barycentric coordinates of the parent, corner first.
  Bary corner{0.0, 0.0, 0.0};
  corner[singular_vertex] = 1.0;
  Bary p1{0.0, 0.0, 0.0}, p2{0.0, 0.0, 0.0};
  p1[(singular_vertex + 1) % 3] = 1.0;
  p2[(singular_vertex + 2) % 3] = 1.0;

  const auto integrate_sub = [&](const Bary& a, const Bary& b, const Bary& c, double fraction) {
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& l = rule.barycentric[q];
      Bary composed{};
      for (int k = 0; k < 3; ++k) composed[k] = l[0] * a[k] + l[1] * b[k] + l[2] * c[k];
      sum += rule.weights[q] * f(map_barycentric(tri, composed), composed);
    }
    return fraction * area * sum;
  };

  double total = 0.0;
  double fraction = 1.0;
  for (int level = 0; level < levels; ++level) {
    const Bary m01 = mid(corner, p1), m12 = mid(p1, p2), m20 = mid(p2, corner);
    fraction *= 0.25;
    total += integrate_sub(m01, p1, m12, fraction);
    total += integrate_sub(m20, m12, p2, fraction);
    total += integrate_sub(m12, m20, m01, fraction);
    p1 = m01;
    p2 = m20;
  }
  total += integrate_sub(corner, p1, p2, fraction);
  return total;
}

}  // namespace signfem
