#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "signfem/estimator.hpp"

namespace signfem {

enum class RefinementMode { Uniform, Adaptive };

std::string_view to_string(RefinementMode m);
RefinementMode parse_refinement_mode(std::string_view name);

/// One line of a convergence table. Rates are absent on the first row.
struct TableRow {
  int k = 1;
  Index dof = 0;
  Index triangles = 0;
  double e_l2 = 0.0;
  std::optional<double> cv_l2;
  double e_h1 = 0.0;
  std::optional<double> cv_h1;
  double eta = 0.0;
  double effectivity = 0.0;
  double oscillation = 0.0;
  double e_h1_semi = 0.0;
  bool exact_solution = false;
};

struct ConvergenceTable {
  std::vector<TableRow> rows;

  /// Appends a row and fills its rates from the previous one. Throws
  /// InvalidArgument when the DoF count does not increase.
  void append(TableRow row);
  /// Every table invariant that fails, empty when the table is valid.
  std::vector<std::string> defects() const;

  /// k,dof,e_l2,cv_l2,e_h1,cv_h1,eta,effectivity
  void write_csv(std::ostream& out) const;
  /// Fixed-width layout with the same columns.
  void write_text(std::ostream& out) const;
};

/// CV = ln(e_prev / e_next) / ln(sqrt(dof_next / dof_prev)).
double convergence_rate(double e_prev, Index dof_prev, double e_next, Index dof_next);
double convergence_rate(const TableRow& prev, const TableRow& next, bool h1);

/// {T : eta_T > threshold * max eta}, ascending.
std::vector<Index> mark(const ElementIndicators& indicators, double threshold = 0.5);

/// Everything computed on one level, handed to the observer before refinement.
struct LevelData {
  int k = 1;
  const Mesh* mesh = nullptr;
  const DiscreteSolution* solution = nullptr;
  const ElementIndicators* indicators = nullptr;
  const TableRow* row = nullptr;
  std::vector<Index> marked;  // triangles refined next (all of them in uniform mode)
};

struct LoopOptions {
  RefinementMode mode = RefinementMode::Uniform;
  int steps = 4;
  double mark_threshold = 0.5;
  /// Stop early once a level reaches this many vertices.
  std::optional<Index> max_dof;
  /// Rule for the load vector and f_T.
  const TriangleRule* load_rule = &symmetric_rule_degree4();
  std::function<void(const LevelData&)> observer;
};

/// Failure on a given level of the loop; the message names the level.
class LevelFailure : public Error {
 public:
  LevelFailure(int level, bool singular, const std::string& what);
  int level() const { return level_; }
  bool singular() const { return singular_; }

 private:
  int level_;
  bool singular_;
};

/// solve, errors, indicators, record, refine; repeated `steps` times.
ConvergenceTable run_loop(const ProblemSpec& problem, Mesh initial, const LoopOptions& options);

/// Share of the marked triangles whose centroid lies within `radius` of p.
double marked_fraction_near(const Mesh& mesh, const std::vector<Index>& marked, Point p, double radius);

}  // namespace signfem
