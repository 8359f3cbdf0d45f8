#include "signfem/tcoercivity.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

namespace signfem {

namespace {

using Triplet = Eigen::Triplet<double, int>;

// Sigma vertices that carry a degree of freedom.
bool interior_sigma(const Vertex& v) { return v.on_interface && !v.on_boundary; }

// Free vertices strictly inside the given subdomain.
bool interior_of(Geometry g, const Vertex& v, Subdomain side) {
  return !v.on_boundary && !v.on_interface && geometry::classify(g, v.coords) == side;
}

Index reflected_vertex(const Mesh& mesh, Point p) {
  const auto found = mesh.locate_vertex(p);
  if (!found) {
    throw InvalidArgument(
        fmt::format("no vertex at reflected point ({}, {}); the mesh is not mirror symmetric", p.x, p.y));
  }
  return *found;
}

// Vertex-indexed matrix of the nodal reflection onto target-interior vertices.
SparseMatrix nodal_reflection(const Mesh& mesh, Geometry g, LiftDirection d) {
  const Subdomain target = target_of(d);
  std::vector<Triplet> triplets;
  for (const Vertex& v : mesh.vertices()) {
    if (interior_of(g, v, target)) {
      for (const ReflectionTerm& term : reflection_terms(g, d, v.coords)) {
        triplets.emplace_back(v.id, reflected_vertex(mesh, term.point), term.weight);
      }
    } else if (interior_sigma(v)) {
      triplets.emplace_back(v.id, v.id, 1.0);
    }
  }
  SparseMatrix out(mesh.num_vertices(), mesh.num_vertices());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

// Rows of patch means over the target side: mean_{omega_x} of a P1 function
// is sum_T |T| (w_a + w_b + w_c) / 3 / |omega_x|.
SparseMatrix patch_mean_rows(const Mesh& mesh, Geometry g, Subdomain target) {
  std::vector<Triplet> triplets;
  for (const Vertex& v : mesh.vertices()) {
    if (!interior_of(g, v, target)) continue;
    double patch_area = 0.0;
    for (Index t : mesh.vertex_patch(v.id)) patch_area += mesh.triangle(t).area;
    for (Index t : mesh.vertex_patch(v.id)) {
      const Triangle& tri = mesh.triangle(t);
      for (Index w : tri.vertex_ids) triplets.emplace_back(v.id, w, tri.area / (3.0 * patch_area));
    }
  }
  SparseMatrix out(mesh.num_vertices(), mesh.num_vertices());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

// Sigma rows: point values (Modified) or edge means over e_x (Standard).
SparseMatrix sigma_rows(const Mesh& mesh, ClementWeights weights) {
  std::vector<Triplet> triplets;
  std::vector<std::vector<Index>> sigma_edges(mesh.num_vertices());
  for (const Edge& e : mesh.edges()) {
    if (!e.on_interface) continue;
    for (Index v : e.vertex_ids) sigma_edges[v].push_back(e.id);
  }
  for (const Vertex& v : mesh.vertices()) {
    if (!interior_sigma(v)) continue;
    if (weights == ClementWeights::Modified) {
      triplets.emplace_back(v.id, v.id, 1.0);
      continue;
    }
    double length = 0.0;
    for (Index e : sigma_edges[v.id]) length += mesh.edge(e).length;
    for (Index e : sigma_edges[v.id]) {
      const Edge& edge = mesh.edge(e);
      for (Index w : edge.vertex_ids) triplets.emplace_back(v.id, w, 0.5 * edge.length / length);
    }
  }
  SparseMatrix out(mesh.num_vertices(), mesh.num_vertices());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

// Stiffness over the triangles of one side with unit coefficient.
SparseMatrix side_stiffness(const Mesh& mesh, Subdomain side) {
  std::vector<Triplet> triplets;
  for (const Triangle& t : mesh.triangles()) {
    if (t.subdomain != side) continue;
    const auto k = local_stiffness(mesh.triangle_coords(t.id), 1.0);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.emplace_back(t.vertex_ids[i], t.vertex_ids[j], k[i][j]);
    }
  }
  SparseMatrix out(mesh.num_vertices(), mesh.num_vertices());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SparseMatrix side_mass(const Mesh& mesh, Subdomain side) {
  std::vector<Triplet> triplets;
  for (const Triangle& t : mesh.triangles()) {
    if (t.subdomain != side) continue;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.emplace_back(t.vertex_ids[i], t.vertex_ids[j], t.area * (i == j ? 2.0 : 1.0) / 12.0);
    }
  }
  SparseMatrix out(mesh.num_vertices(), mesh.num_vertices());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

// Dense restriction P^T M P onto the listed vertices.
Eigen::MatrixXd restrict_dense(const SparseMatrix& m, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  std::vector<Index> col_pos(m.cols(), kNoIndex), row_pos(m.rows(), kNoIndex);
  for (std::size_t i = 0; i < rows.size(); ++i) row_pos[rows[i]] = static_cast<Index>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) col_pos[cols[j]] = static_cast<Index>(j);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      const Index r = row_pos[it.row()], c = col_pos[it.col()];
      if (r != kNoIndex && c != kNoIndex) out(r, c) += it.value();
    }
  }
  return out;
}

Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, b, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw SingularSystem(fmt::format("generalized eigensolve of size {} did not converge", a.rows()));
  }
  return solver.eigenvalues();
}

}  // namespace

Subdomain source_of(LiftDirection d) { return d == LiftDirection::PlusToMinus ? Subdomain::Plus : Subdomain::Minus; }
Subdomain target_of(LiftDirection d) { return source_of(d) == Subdomain::Plus ? Subdomain::Minus : Subdomain::Plus; }

std::vector<ReflectionTerm> reflection_terms(Geometry g, LiftDirection d, Point p) {
  if (g == Geometry::SymmetricSquare) return {{{-p.x, p.y}, 1.0}};
  if (g != Geometry::LShapedInterface) throw InvalidArgument("unsupported geometry for reflection lifting");
  if (d == LiftDirection::PlusToMinus) {
    if (p.x <= 0.0 && p.y >= 0.0) return {{{-p.x, p.y}, 1.0}};
    if (p.x <= 0.0) return {{{-p.x, -p.y}, 1.0}};
    return {{{p.x, -p.y}, 1.0}};
  }
  return {{{-p.x, p.y}, 1.0}, {{p.x, -p.y}, 1.0}, {{-p.x, -p.y}, -1.0}};
}

double TraceLifting::operator()(const ScalarField& v, Point target) const {
  double sum = 0.0;
  for (const ReflectionTerm& term : reflection_terms(geometry, direction, target)) sum += term.weight * v(term.point);
  return sum;
}

ScalarField lift_trace(Geometry g, ScalarField v, LiftDirection d) {
  return [lifting = TraceLifting{g, d}, v = std::move(v)](Point p) { return lifting(v, p); };
}

Eigen::VectorXd lift_trace_nodal(const Mesh& mesh, Geometry g, const Eigen::VectorXd& v, LiftDirection d) {
  if (v.size() != mesh.num_vertices()) throw InvalidArgument("nodal vector does not match the mesh");
  Eigen::VectorXd out = v;
  const Subdomain target = target_of(d);
  for (const Vertex& x : mesh.vertices()) {
    if (x.on_interface || geometry::classify(g, x.coords) != target) continue;
    double sum = 0.0;
    for (const ReflectionTerm& term : reflection_terms(g, d, x.coords)) {
      sum += term.weight * v(reflected_vertex(mesh, term.point));
    }
    out(x.id) = sum;
  }
  return out;
}

Eigen::VectorXd clement_interpolate(const Mesh& mesh, Geometry g, const ScalarField& w, const Eigen::VectorXd& trace,
                                    ClementWeights weights, Subdomain target) {
  if (trace.size() != mesh.num_vertices()) throw InvalidArgument("trace vector does not match the mesh");
  const TriangleRule& rule = symmetric_rule_degree6();
  Eigen::VectorXd out = sigma_rows(mesh, weights) * trace;
  for (const Vertex& v : mesh.vertices()) {
    if (!interior_of(g, v, target)) continue;
    double integral = 0.0, area = 0.0;
    for (Index t : mesh.vertex_patch(v.id)) {
      integral += integrate(mesh.triangle_coords(t), rule, [&](Point p, const auto&) { return w(p); });
      area += mesh.triangle(t).area;
    }
    out(v.id) = integral / area;
  }
  return out;
}

Eigen::VectorXd clement_interpolate(const Mesh& mesh, Geometry g, const Eigen::VectorXd& w,
                                    const Eigen::VectorXd& trace, ClementWeights weights, Subdomain target) {
  if (trace.size() != mesh.num_vertices() || w.size() != mesh.num_vertices()) {
    throw InvalidArgument("nodal vector does not match the mesh");
  }
  return sigma_rows(mesh, weights) * trace + patch_mean_rows(mesh, g, target) * w;
}

DiscreteTOperator::DiscreteTOperator(const Mesh& mesh, Geometry g, DiscreteLifting lifting, LiftDirection direction)
    : direction_(direction) {
  const SparseMatrix reflection = nodal_reflection(mesh, g, direction);
  const Subdomain target = target_of(direction);
  if (lifting == DiscreteLifting::NodalReflection) {
    lifting_ = reflection;
  } else {
    // I_h applied to the reflected P1 function: patch means of R v at interior
    // target nodes and point values on Sigma.
    SparseMatrix copy_source(mesh.num_vertices(), mesh.num_vertices());
    std::vector<Triplet> keep;
    for (const Vertex& v : mesh.vertices()) {
      if (v.on_interface || geometry::classify(g, v.coords) != target) keep.emplace_back(v.id, v.id, 1.0);
    }
    copy_source.setFromTriplets(keep.begin(), keep.end());
    // Full-mesh P1 function equal to v on the source side and R v on the target side.
    std::vector<Triplet> reflected;
    for (const Vertex& v : mesh.vertices()) {
      if (v.on_interface || geometry::classify(g, v.coords) != target) continue;
      for (const ReflectionTerm& term : reflection_terms(g, direction, v.coords)) {
        reflected.emplace_back(v.id, reflected_vertex(mesh, term.point), term.weight);
      }
    }
    SparseMatrix r(mesh.num_vertices(), mesh.num_vertices());
    r.setFromTriplets(reflected.begin(), reflected.end());
    const SparseMatrix extended = copy_source + r;
    lifting_ = sigma_rows(mesh, ClementWeights::Modified) + SparseMatrix(patch_mean_rows(mesh, g, target) * extended);
  }
  lifting_.makeCompressed();

  std::vector<Triplet> t;
  for (const Vertex& v : mesh.vertices()) {
    t.emplace_back(v.id, v.id, interior_of(g, v, target) ? -1.0 : 1.0);
  }
  SparseMatrix base(mesh.num_vertices(), mesh.num_vertices());
  base.setFromTriplets(t.begin(), t.end());
  // 2 R_h restricted to interior target rows.
  std::vector<Triplet> target_rows;
  for (const Vertex& v : mesh.vertices()) {
    if (interior_of(g, v, target)) target_rows.emplace_back(v.id, v.id, 2.0);
  }
  SparseMatrix selector(mesh.num_vertices(), mesh.num_vertices());
  selector.setFromTriplets(target_rows.begin(), target_rows.end());
  matrix_ = base + SparseMatrix(selector * lifting_);
  matrix_.makeCompressed();
}

Eigen::VectorXd DiscreteTOperator::apply(const Eigen::VectorXd& v) const {
  if (v.size() != matrix_.cols()) throw InvalidArgument("nodal vector does not match the mesh");
  return matrix_ * v;
}

Eigen::VectorXd apply_Th(const Mesh& mesh, Geometry g, const Eigen::VectorXd& v, DiscreteLifting lifting,
                         LiftDirection direction) {
  return DiscreteTOperator(mesh, g, lifting, direction).apply(v);
}

double harmonic_extension_seminorm(const Mesh& mesh, Geometry g, const Eigen::VectorXd& trace, Subdomain target) {
  if (trace.size() != mesh.num_vertices()) throw InvalidArgument("trace vector does not match the mesh");
  const SparseMatrix k = side_stiffness(mesh, target);
  Eigen::VectorXd data = Eigen::VectorXd::Zero(mesh.num_vertices());
  std::vector<Index> inner;
  for (const Vertex& v : mesh.vertices()) {
    if (interior_sigma(v)) data(v.id) = trace(v.id);
    if (interior_of(g, v, target)) inner.push_back(v.id);
  }
  Eigen::VectorXd ext = data;
  if (!inner.empty()) {
    std::vector<Index> pos(mesh.num_vertices(), kNoIndex);
    for (std::size_t i = 0; i < inner.size(); ++i) pos[inner[i]] = static_cast<Index>(i);
    std::vector<Triplet> triplets;
    const Eigen::VectorXd kd = k * data;
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(inner.size()));
    for (std::size_t i = 0; i < inner.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = -kd(inner[i]);
    for (int c = 0; c < k.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(k, c); it; ++it) {
        if (pos[it.row()] != kNoIndex && pos[it.col()] != kNoIndex) {
          triplets.emplace_back(pos[it.row()], pos[it.col()], it.value());
        }
      }
    }
    SparseMatrix kk(static_cast<Eigen::Index>(inner.size()), static_cast<Eigen::Index>(inner.size()));
    kk.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(kk);
    if (ldlt.info() != Eigen::Success) throw SingularSystem("harmonic extension: factorization failed");
    const Eigen::VectorXd x = ldlt.solve(rhs);
    for (std::size_t i = 0; i < inner.size(); ++i) ext(inner[i]) = x(static_cast<Eigen::Index>(i));
  }
  return std::sqrt(std::max(0.0, ext.dot(k * ext)));
}

double subdomain_seminorm(const Mesh& mesh, const Eigen::VectorXd& v, Subdomain side) {
  if (v.size() != mesh.num_vertices()) throw InvalidArgument("nodal vector does not match the mesh");
  return std::sqrt(std::max(0.0, v.dot(side_stiffness(mesh, side) * v)));
}

double subdomain_norm(const Mesh& mesh, const Eigen::VectorXd& v, Subdomain side) {
  if (v.size() != mesh.num_vertices()) throw InvalidArgument("nodal vector does not match the mesh");
  const SparseMatrix g = side_stiffness(mesh, side) + side_mass(mesh, side);
  return std::sqrt(std::max(0.0, v.dot(g * v)));
}

CoercivityEstimate estimate_KR_and_coercivity(const Mesh& input, Geometry g, double mu,
                                              const CoercivityOptions& options) {
  if (!(mu < 0.0)) throw InvalidArgument(fmt::format("contrast must be negative, got {}", mu));
  // Exchanging roles: Omega_- becomes the side that keeps its values and the
  // form is scaled by 1/mu so that it is again positive there.
  const LiftDirection d = options.exchange_roles ? LiftDirection::MinusToPlus : LiftDirection::PlusToMinus;
  const Subdomain source = source_of(d), target = target_of(d);
  const Coefficient a(1.0, mu);
  const double sign = a(source) > 0.0 ? 1.0 : -1.0;

  std::vector<Index> free, source_dofs;
  for (const Vertex& v : input.vertices()) {
    if (v.on_boundary) continue;
    free.push_back(v.id);
    if (v.on_interface || geometry::classify(g, v.coords) == source) source_dofs.push_back(v.id);
  }
  CoercivityEstimate out;
  out.free_dofs = static_cast<Index>(free.size());
  out.source_dofs = static_cast<Index>(source_dofs.size());
  if (out.free_dofs > options.max_dofs) {
    throw InvalidArgument(fmt::format("{} free dofs exceed the dense eigensolve limit {}", out.free_dofs, options.max_dofs));
  }

  const DiscreteTOperator t(input, g, options.lifting, d);

  // K_R: |a_target| R^T K_target R against a_source K_source on the source dofs.
  const SparseMatrix k_source = side_stiffness(input, source);
  const SparseMatrix k_target = side_stiffness(input, target);
  const SparseMatrix rt = t.lifting().transpose();
  const SparseMatrix lifted = rt * k_target * t.lifting();
  const Eigen::MatrixXd num = std::abs(a(target)) * restrict_dense(lifted, source_dofs, source_dofs);
  const Eigen::MatrixXd den = std::abs(a(source)) * restrict_dense(k_source, source_dofs, source_dofs);
  out.k_r = generalized_eigenvalues(num, den).maxCoeff();

  // alpha: sym(sign * A T) against the H^1 Gram matrix, on all free dofs.
  const SparseMatrix stiffness = assemble(input, a);
  const SparseMatrix at = sign * (stiffness * t.matrix());
  const Eigen::MatrixXd atd = restrict_dense(at, free, free);
  const Eigen::MatrixXd sym = 0.5 * (atd + atd.transpose());
  const SparseMatrix gram = side_stiffness(input, Subdomain::Plus) + side_stiffness(input, Subdomain::Minus) +
                            assemble_mass(input);
  out.alpha_min = generalized_eigenvalues(sym, restrict_dense(gram, free, free)).minCoeff();
  return out;
}

bool CoercivityReport::k_within_bound(double tol) const {
  return std::all_of(lines.begin(), lines.end(), [&](const auto& l) { return l.estimate.k_r <= k_bound + tol; });
}

bool CoercivityReport::alpha_positive() const {
  return std::all_of(lines.begin(), lines.end(), [](const auto& l) { return l.estimate.alpha_min > 0.0; });
}

void write_report(std::ostream& out, const CoercivityReport& r) {
  out << fmt::format("geometry {}\nmu {}\nlifting {}\nexchange_roles {}\nk_bound {:.10g}\n", to_string(r.geometry),
                     r.mu, to_string(r.options.lifting), r.options.exchange_roles ? "yes" : "no", r.k_bound);
  out << fmt::format("{:>5} {:>9} {:>10} {:>9} {:>16} {:>16}\n", "level", "vertices", "h", "free", "K_R_h", "alpha_min");
  for (const auto& l : r.lines) {
    out << fmt::format("{:>5} {:>9} {:>10.4e} {:>9} {:>16.10e} {:>16.10e}\n", l.level, l.vertices, l.h,
                       l.estimate.free_dofs, l.estimate.k_r, l.estimate.alpha_min);
  }
  out << fmt::format("K_R_h <= bound: {}\nalpha_min > 0: {}\n", r.k_within_bound() ? "pass" : "fail",
                     r.alpha_positive() ? "pass" : "fail");
  if (!out) throw IoError("failed writing coercivity report");
}

std::string_view to_string(DiscreteLifting l) { return l == DiscreteLifting::Clement ? "clement" : "reflection"; }

DiscreteLifting parse_discrete_lifting(std::string_view name) {
  if (name == "clement") return DiscreteLifting::Clement;
  if (name == "reflection") return DiscreteLifting::NodalReflection;
  throw InvalidArgument(fmt::format("unknown lifting '{}' (expected clement or reflection)", name));
}

}  // namespace signfem
