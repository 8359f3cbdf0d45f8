#pragma once

#include <iosfwd>
#include <vector>

#include "signfem/assembly.hpp"

namespace signfem {

/// Per-triangle residual indicators of a P1 solution.
///   residual[T]    = h_T || f_T + div(a grad u_h) ||_T   (div term vanishes for P1, a const per T)
///   jump[T]        = sum over interior edges e of T of h_e^{1/2} || [a grad u_h . n_e] ||_e
///   oscillation[T] = h_T || f - f_T ||_T
/// Each interior edge contributes in full to both of its triangles.
struct ElementIndicators {
  std::vector<double> residual;
  std::vector<double> jump;
  std::vector<double> oscillation;
  std::vector<double> mean_source;  // f_T

  Index size() const { return static_cast<Index>(residual.size()); }
  /// eta_T = eta_{R,T} + eta_{J,T}
  double combined(Index t) const { return residual[t] + jump[t]; }
  std::vector<double> combined() const;
};

/// f_T uses mean_rule (the load-vector rule), osc a degree-6 rule.
ElementIndicators compute_indicators(const Mesh& mesh, const DiscreteSolution& uh, const Coefficient& a,
                                     const SubdomainField& f,
                                     const TriangleRule& mean_rule = symmetric_rule_degree4());

struct EstimatorReport {
  double eta_residual = 0.0;  // eta_R = (sum eta_{R,T}^2)^{1/2}
  double eta_jump = 0.0;      // eta_J = (sum eta_{J,T}^2)^{1/2}
  double eta = 0.0;           // eta_R + eta_J
  double oscillation = 0.0;   // osc(f)
  double error_h1 = 0.0;
  double effectivity = 0.0;   // eta / e_H1, meaningless when exact_solution is set
  bool exact_solution = false;
};

/// Global aggregates. e_h1 == 0 sets exact_solution instead of dividing.
EstimatorReport aggregate(const ElementIndicators& indicators, double error_h1);

/// osc(f, omega_T) = (sum_{T' in omega_T} h_T'^2 ||f - f_T'||^2)^{1/2}
double patch_oscillation(const Mesh& mesh, const ElementIndicators& indicators, Index t);

/// Text dump: "triangle eta_R eta_J osc" per line.
void write_indicators(std::ostream& out, const ElementIndicators& indicators);

}  // namespace signfem
