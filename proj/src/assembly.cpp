#include "signfem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace signfem {

namespace {

// Area relative to the squared longest edge below which a triangle counts as degenerate.
constexpr double kDegenerateShape = 1e-12;
constexpr int kGradingLevels = 30;

using Triplet = Eigen::Triplet<double, int>;

bool touches_origin(const std::array<Point, 3>& tri, int& local) {
  for (int i = 0; i < 3; ++i) {
    if (norm(tri[i]) <= kGeometryTolerance) {
      local = i;
      return true;
    }
  }
  return false;
}

}  // namespace

DofMap DofMap::build(const Mesh& mesh) {
  DofMap map;
  map.free_index.assign(mesh.num_vertices(), kNoIndex);
  for (const Vertex& v : mesh.vertices()) {
    if (v.on_boundary) {
      map.constrained_vertices.push_back(v.id);
    } else {
      map.free_index[v.id] = static_cast<Index>(map.free_vertices.size());
      map.free_vertices.push_back(v.id);
    }
  }
  return map;
}

std::array<Point, 3> hat_gradients(const std::array<Point, 3>& tri) {
  const double twice_area = cross(tri[1] - tri[0], tri[2] - tri[0]);
  const double s = 1.0 / twice_area;
  return {Point{(tri[1].y - tri[2].y) * s, (tri[2].x - tri[1].x) * s},
          Point{(tri[2].y - tri[0].y) * s, (tri[0].x - tri[2].x) * s},
          Point{(tri[0].y - tri[1].y) * s, (tri[1].x - tri[0].x) * s}};
}

std::array<std::array<double, 3>, 3> local_stiffness(const std::array<Point, 3>& tri, double a) {
  const double area = 0.5 * cross(tri[1] - tri[0], tri[2] - tri[0]);
  const double diam = std::max({norm(tri[1] - tri[0]), norm(tri[2] - tri[1]), norm(tri[0] - tri[2])});
  if (!(area > kDegenerateShape * diam * diam)) {
    throw InvalidArgument(fmt::format("degenerate or inverted triangle (signed area {:.3e})", area));
  }
  const auto g = hat_gradients(tri);
  std::array<std::array<double, 3>, 3> k{};
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      k[i][j] = a * area * dot(g[i], g[j]);
      k[j][i] = k[i][j];
    }
  }
  return k;
}

SparseMatrix assemble(const Mesh& mesh, const Coefficient& a) {
  std::vector<Triplet> triplets;
  triplets.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  for (const Triangle& t : mesh.triangles()) {
    const auto k = local_stiffness(mesh.triangle_coords(t.id), a(t.subdomain));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.emplace_back(t.vertex_ids[i], t.vertex_ids[j], k[i][j]);
    }
  }
  SparseMatrix matrix(mesh.num_vertices(), mesh.num_vertices());
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  matrix.makeCompressed();
  return matrix;
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  for (const Triangle& t : mesh.triangles()) {
    const double area = triangle_area(mesh.triangle_coords(t.id));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.emplace_back(t.vertex_ids[i], t.vertex_ids[j], area * (i == j ? 2.0 : 1.0) / 12.0);
    }
  }
  SparseMatrix matrix(mesh.num_vertices(), mesh.num_vertices());
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  matrix.makeCompressed();
  return matrix;
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const SubdomainField& f, const TriangleRule& rule) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (const Triangle& t : mesh.triangles()) {
    const auto tri = mesh.triangle_coords(t.id);
    const double area = triangle_area(tri);
    std::array<double, 3> local{};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& l = rule.barycentric[q];
      const double fq = f(map_barycentric(tri, l), t.subdomain);
      for (int i = 0; i < 3; ++i) local[i] += rule.weights[q] * fq * l[i];
    }
    for (int i = 0; i < 3; ++i) b(t.vertex_ids[i]) += area * local[i];
  }
  return b;
}

SparseSystem apply_dirichlet(const Mesh& mesh, const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                             const ScalarField& g) {
  if (matrix.rows() != mesh.num_vertices() || rhs.size() != mesh.num_vertices()) {
    throw InvalidArgument("system size does not match the mesh");
  }
  SparseSystem system;
  system.dofs = DofMap::build(mesh);
  const DofMap& dofs = system.dofs;

  Eigen::VectorXd values = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (Index v : dofs.constrained_vertices) values(v) = g(mesh.coords(v));

  system.rhs = rhs;
  std::vector<Triplet> triplets;
  triplets.reserve(matrix.nonZeros());
  for (int col = 0; col < matrix.outerSize(); ++col) {
    const bool col_constrained = dofs.is_constrained(col);
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
      const auto row = static_cast<Index>(it.row());
      const bool row_constrained = dofs.is_constrained(row);
      if (col_constrained) {
        if (!row_constrained) system.rhs(row) -= it.value() * values(col);
      } else if (!row_constrained) {
        triplets.emplace_back(row, col, it.value());
      }
    }
  }
  for (Index v : dofs.constrained_vertices) {
    triplets.emplace_back(v, v, 1.0);
    system.rhs(v) = values(v);
  }
  system.matrix.resize(mesh.num_vertices(), mesh.num_vertices());
  system.matrix.setFromTriplets(triplets.begin(), triplets.end());
  system.matrix.makeCompressed();
  return system;
}

DiscreteSolution solve(const Mesh& mesh, const SparseSystem& system) {
  const IndefiniteSolver solver(system.matrix);
  DiscreteSolution out;
  out.nodal = solver.solve(system.rhs);
  out.generation = mesh.generation();
  out.num_vertices = mesh.num_vertices();
  out.num_triangles = mesh.num_triangles();
  const double bnorm = system.rhs.norm();
  const double residual = (system.matrix * out.nodal - system.rhs).norm();
  if (bnorm > 0.0 && !(residual <= 1e-10 * bnorm)) {
    throw SingularSystem(fmt::format("relative residual {:.3e} exceeds 1e-10", residual / bnorm));
  }
  return out;
}

DiscreteSolution solve_problem(const Mesh& mesh, const ProblemSpec& problem, const TriangleRule& load_rule) {
  const SparseMatrix a = assemble(mesh, problem.coefficient);
  const Eigen::VectorXd b =
      assemble_load(mesh, [&](Point p, Subdomain s) { return problem.source(p, s); }, load_rule);
  const SparseSystem system = apply_dirichlet(mesh, a, b, [&](Point p) { return problem.boundary_value(p); });
  return solve(mesh, system);
}

Eigen::VectorXd interpolate(const Mesh& mesh, const ScalarField& g) {
  Eigen::VectorXd out(mesh.num_vertices());
  for (const Vertex& v : mesh.vertices()) out(v.id) = g(v.coords);
  return out;
}

ErrorNorms compute_errors(const Mesh& mesh, const DiscreteSolution& uh, const ExactSolution& exact) {
  return compute_errors(
      mesh, uh, [&](Point p, Subdomain s) { return exact.evaluate(p, s); }, exact.kind() == ProblemKind::Singular);
}

ErrorNorms compute_errors(const Mesh& mesh, const DiscreteSolution& uh, const ExactField& exact,
                          bool graded_at_origin) {
  if (!uh.matches(mesh)) throw InvalidArgument("discrete solution belongs to a different mesh");
  ErrorNorms out;
  out.element_l2_sq.resize(mesh.num_triangles());
  out.element_h1_semi_sq.resize(mesh.num_triangles());
  const TriangleRule& rule = symmetric_rule_degree6();
  static const TriangleRule singular_rule = collapsed_gauss_rule(10);

  double l2 = 0.0, semi = 0.0;
  for (const Triangle& t : mesh.triangles()) {
    const auto tri = mesh.triangle_coords(t.id);
    const auto grads = hat_gradients(tri);
    const std::array<double, 3> u{uh.nodal(t.vertex_ids[0]), uh.nodal(t.vertex_ids[1]), uh.nodal(t.vertex_ids[2])};
    const Point grad_h = u[0] * grads[0] + u[1] * grads[1] + u[2] * grads[2];

    const auto value_error = [&](Point p, const std::array<double, 3>& b) {
      const double e = exact(p, t.subdomain).value - (b[0] * u[0] + b[1] * u[1] + b[2] * u[2]);
      return e * e;
    };
    const auto gradient_error = [&](Point p, const std::array<double, 3>&) {
      const Point d = exact(p, t.subdomain).gradient - grad_h;
      return dot(d, d);
    };
    int corner = -1;
    double el2 = 0.0, eh1 = 0.0;
    if (graded_at_origin && touches_origin(tri, corner)) {
      el2 = integrate_graded(tri, corner, kGradingLevels, singular_rule, value_error);
      eh1 = integrate_graded(tri, corner, kGradingLevels, singular_rule, gradient_error);
    } else {
      el2 = integrate(tri, rule, value_error);
      eh1 = integrate(tri, rule, gradient_error);
    }
    out.element_l2_sq[t.id] = el2;
    out.element_h1_semi_sq[t.id] = eh1;
    l2 += el2;
    semi += eh1;
  }
  out.l2 = std::sqrt(l2);
  out.h1_semi = std::sqrt(semi);
  out.h1 = std::sqrt(l2 + semi);
  return out;
}

void write_coordinate(std::ostream& out, const SparseMatrix& matrix) {
  out << fmt::format("% rows {} cols {} nonzeros {}\n", matrix.rows(), matrix.cols(), matrix.nonZeros());
  for (int col = 0; col < matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
      out << fmt::format("{} {} {:.17g}\n", it.row(), it.col(), it.value());
    }
  }
  if (!out) throw IoError("failed writing matrix");
}

}  // namespace signfem
