#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "signfem/geometry.hpp"

namespace signfem {

/// Quadrature on a triangle in barycentric form. Weights sum to one, so an
/// integral is |T| * sum_q w_q f(x_q).
struct TriangleRule {
  int degree = 0;
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// Symmetric 6-point rule, exact for degree 4.
const TriangleRule& symmetric_rule_degree4();
/// Symmetric 12-point rule, exact for degree 6.
const TriangleRule& symmetric_rule_degree6();
/// Collapsed (Duffy) Gauss-Legendre product rule exact for the given degree.
TriangleRule collapsed_gauss_rule(int degree);

/// Gauss-Legendre nodes and weights on [0,1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

inline Point map_barycentric(const std::array<Point, 3>& tri, const std::array<double, 3>& b) {
  return {b[0] * tri[0].x + b[1] * tri[1].x + b[2] * tri[2].x,
          b[0] * tri[0].y + b[1] * tri[1].y + b[2] * tri[2].y};
}

double triangle_area(const std::array<Point, 3>& tri);

/// Integrates f over the triangle. The integrand receives the physical point
/// and the barycentric coordinates of the quadrature node.
double integrate(const std::array<Point, 3>& tri, const TriangleRule& rule,
                 const std::function<double(Point, const std::array<double, 3>&)>& f);

/// Integrates f over the triangle with geometric grading toward the local
/// vertex `singular_vertex`: the corner child is subdivided `levels` times.
double integrate_graded(const std::array<Point, 3>& tri, int singular_vertex, int levels,
                        const TriangleRule& rule,
                        const std::function<double(Point, const std::array<double, 3>&)>& f);

}  // namespace signfem
