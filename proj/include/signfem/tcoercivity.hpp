#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "signfem/assembly.hpp"

namespace signfem {

/// Which subdomain feeds the lifting. PlusToMinus extends v_+ into Omega_-.
enum class LiftDirection { PlusToMinus, MinusToPlus };

Subdomain source_of(LiftDirection d);
Subdomain target_of(LiftDirection d);

/// One term of a reflection lifting: (R v)(x) = sum weight * v(point).
struct ReflectionTerm {
  Point point;
  double weight = 1.0;
};

/// Reflection terms for a target point of the given geometry.
///   SymmetricSquare, either way:  v(-x, y)
///   LShapedInterface, forward:    v(-x, y) | v(-x, -y) | v(x, -y) by quadrant
///   LShapedInterface, reverse:    v(-x, y) + v(x, -y) - v(-x, -y)
std::vector<ReflectionTerm> reflection_terms(Geometry g, LiftDirection d, Point target);

/// Closed-form reflection lifting of a function given on the source subdomain.
struct TraceLifting {
  Geometry geometry = Geometry::SymmetricSquare;
  LiftDirection direction = LiftDirection::PlusToMinus;

  double operator()(const ScalarField& v, Point target) const;
};

ScalarField lift_trace(Geometry g, ScalarField v, LiftDirection d = LiftDirection::PlusToMinus);

/// Nodal reflection of a P1 function on a mirror-symmetric mesh: target
/// vertices off Sigma receive the reflected values, everything else is copied.
/// Throws InvalidArgument when a reflected vertex does not exist.
Eigen::VectorXd lift_trace_nodal(const Mesh& mesh, Geometry g, const Eigen::VectorXd& v,
                                 LiftDirection d = LiftDirection::PlusToMinus);

/// Nodal weights of the quasi-interpolant on the target subdomain.
///   Modified: alpha_x = patch mean of w at interior nodes, phi_h(x) on Sigma.
///   Standard: beta_x  = patch mean at interior nodes, mean of phi_h over
///             e_x = omega_x cap Sigma on Sigma (Clement / Scott-Zhang).
enum class ClementWeights { Modified, Standard };

/// Quasi-interpolant of w (given on the target subdomain) with Sigma data
/// trace (a vertex-indexed vector, read at Sigma vertices only). The result
/// is vertex-indexed and vanishes off the closed target subdomain and on Gamma.
Eigen::VectorXd clement_interpolate(const Mesh& mesh, Geometry g, const ScalarField& w, const Eigen::VectorXd& trace,
                                    ClementWeights weights = ClementWeights::Modified,
                                    Subdomain target = Subdomain::Minus);
/// Same with w a P1 function (patch means are then exact).
Eigen::VectorXd clement_interpolate(const Mesh& mesh, Geometry g, const Eigen::VectorXd& w,
                                    const Eigen::VectorXd& trace, ClementWeights weights = ClementWeights::Modified,
                                    Subdomain target = Subdomain::Minus);

/// How R_h is realized inside T_h.
enum class DiscreteLifting {
  Clement,          // R_h = I_h R
  NodalReflection,  // R_h = nodal reflection, exact on mirror-symmetric meshes
};

/// T_h v = v on the source side, -v + 2 R_h(v|Sigma) on the target side.
class DiscreteTOperator {
 public:
  DiscreteTOperator(const Mesh& mesh, Geometry g, DiscreteLifting lifting,
                    LiftDirection direction = LiftDirection::PlusToMinus);

  /// Vertex-indexed lifting matrix: (R_h v) on the closed target side.
  const SparseMatrix& lifting() const { return lifting_; }
  /// Vertex-indexed matrix of T_h.
  const SparseMatrix& matrix() const { return matrix_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  LiftDirection direction() const { return direction_; }

 private:
  LiftDirection direction_;
  SparseMatrix lifting_;
  SparseMatrix matrix_;
};

Eigen::VectorXd apply_Th(const Mesh& mesh, Geometry g, const Eigen::VectorXd& v,
                         DiscreteLifting lifting = DiscreteLifting::Clement,
                         LiftDirection direction = LiftDirection::PlusToMinus);

/// |E_h phi|_{1,target} for the discrete harmonic extension E_h of the Sigma
/// data (zero on Gamma). Stands in for the trace norm.
double harmonic_extension_seminorm(const Mesh& mesh, Geometry g, const Eigen::VectorXd& trace,
                                   Subdomain target = Subdomain::Minus);

/// H^1 seminorm and full norm of a P1 function restricted to one subdomain.
double subdomain_seminorm(const Mesh& mesh, const Eigen::VectorXd& v, Subdomain side);
double subdomain_norm(const Mesh& mesh, const Eigen::VectorXd& v, Subdomain side);

struct CoercivityOptions {
  DiscreteLifting lifting = DiscreteLifting::NodalReflection;
  /// Use Omega_- as the source side (the reformulation for |mu| > 1).
  bool exchange_roles = false;
  /// Refuse dense eigensolves above this many free dofs.
  Index max_dofs = 10000;
};

struct CoercivityEstimate {
  double k_r = 0.0;        // sup |B_target(R_h v, R_h v)| / B_source(v, v)
  double alpha_min = 0.0;  // min eig of sym(B(u, T_h v)) against the H^1 Gram matrix
  Index free_dofs = 0;
  Index source_dofs = 0;
};

/// Dense generalized symmetric eigensolves on the free dofs.
CoercivityEstimate estimate_KR_and_coercivity(const Mesh& mesh, Geometry g, double mu,
                                              const CoercivityOptions& options = {});

struct CoercivityReportLine {
  int level = 0;
  Index vertices = 0;
  double h = 0.0;
  CoercivityEstimate estimate;
};

struct CoercivityReport {
  Geometry geometry = Geometry::SymmetricSquare;
  double mu = 0.0;
  CoercivityOptions options;
  double k_bound = 0.0;  // |mu| (square) or 3|mu| (L-shape), inverted when roles are exchanged
  std::vector<CoercivityReportLine> lines;

  bool k_within_bound(double tol = 1e-6) const;
  bool alpha_positive() const;
};

void write_report(std::ostream& out, const CoercivityReport& report);

std::string_view to_string(DiscreteLifting l);
DiscreteLifting parse_discrete_lifting(std::string_view name);

}  // namespace signfem
