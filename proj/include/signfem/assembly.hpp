#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "signfem/mesh.hpp"
#include "signfem/problem.hpp"
#include "signfem/quadrature.hpp"
#include "signfem/solver.hpp"

namespace signfem {

using ScalarField = std::function<double(Point)>;
using SubdomainField = std::function<double(Point, Subdomain)>;

/// P1 degrees of freedom: one per vertex; vertices on Gamma are constrained.
struct DofMap {
  std::vector<Index> free_index;     // vertex -> free dof number, kNoIndex if constrained
  std::vector<Index> free_vertices;  // free dof number -> vertex
  std::vector<Index> constrained_vertices;

  static DofMap build(const Mesh& mesh);
  Index num_free() const { return static_cast<Index>(free_vertices.size()); }
  bool is_constrained(Index v) const { return free_index[v] == kNoIndex; }
};

/// Gradients of the three barycentric hat functions of a triangle.
std::array<Point, 3> hat_gradients(const std::array<Point, 3>& tri);

/// Exact P1 element matrix a * int_T grad phi_j . grad phi_i.
std::array<std::array<double, 3>, 3> local_stiffness(const std::array<Point, 3>& tri, double a);

/// Global matrix B(phi_j, phi_i) over all vertices, assembled in triangle order.
SparseMatrix assemble(const Mesh& mesh, const Coefficient& a);

/// P1 mass matrix int phi_j phi_i.
SparseMatrix assemble_mass(const Mesh& mesh);

/// b_i = sum_T int_T f phi_i with the given rule (degree 4 by default).
Eigen::VectorXd assemble_load(const Mesh& mesh, const SubdomainField& f,
                              const TriangleRule& rule = symmetric_rule_degree4());

/// Vertex-indexed system after Dirichlet elimination.
struct SparseSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  DofMap dofs;
};

/// Symmetric elimination of the Gamma vertices with nodal data g: known
/// columns move to the right-hand side, constrained rows and columns become
/// identity rows with rhs g(x_v).
SparseSystem apply_dirichlet(const Mesh& mesh, const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                             const ScalarField& g);

/// Nodal P1 function tied to one mesh.
struct DiscreteSolution {
  Eigen::VectorXd nodal;
  int generation = 0;
  Index num_vertices = 0;
  Index num_triangles = 0;

  bool matches(const Mesh& mesh) const {
    return generation == mesh.generation() && num_vertices == mesh.num_vertices() &&
           num_triangles == mesh.num_triangles();
  }
};

/// Solves the constrained system. Throws SingularSystem when the factorization
/// is numerically singular or the relative residual exceeds 1e-10.
DiscreteSolution solve(const Mesh& mesh, const SparseSystem& system);

/// assemble + assemble_load + apply_dirichlet + solve for a benchmark.
DiscreteSolution solve_problem(const Mesh& mesh, const ProblemSpec& problem,
                               const TriangleRule& load_rule = symmetric_rule_degree4());

/// P1 interpolant of a function.
Eigen::VectorXd interpolate(const Mesh& mesh, const ScalarField& g);

struct ErrorNorms {
  double l2 = 0.0;       // ||u - u_h||
  double h1_semi = 0.0;  // ||grad(u - u_h)||
  double h1 = 0.0;       // full H^1 norm
  std::vector<double> element_l2_sq;
  std::vector<double> element_h1_semi_sq;
};

/// Errors against the exact solution. Triangles with a vertex at the origin
/// are integrated with a graded degree-10 rule when the solution is singular.
ErrorNorms compute_errors(const Mesh& mesh, const DiscreteSolution& uh, const ExactSolution& exact);

/// Same, against an arbitrary piecewise field. With graded_at_origin the
/// triangles touching (0,0) use the graded rule.
using ExactField = std::function<ValueGradient(Point, Subdomain)>;
ErrorNorms compute_errors(const Mesh& mesh, const DiscreteSolution& uh, const ExactField& exact,
                          bool graded_at_origin = false);

/// Coordinate-format dump "row col value" of the matrix, one entry per line.
void write_coordinate(std::ostream& out, const SparseMatrix& matrix);

}  // namespace signfem
