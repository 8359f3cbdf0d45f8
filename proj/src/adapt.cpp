#include "signfem/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace signfem {

std::string_view to_string(RefinementMode m) { return m == RefinementMode::Uniform ? "uniform" : "adaptive"; }

RefinementMode parse_refinement_mode(std::string_view name) {
  if (name == "uniform") return RefinementMode::Uniform;
  if (name == "adaptive") return RefinementMode::Adaptive;
  throw InvalidArgument(fmt::format("unknown refinement mode '{}' (expected uniform or adaptive)", name));
}

double convergence_rate(double e_prev, Index dof_prev, double e_next, Index dof_next) {
  if (!(e_prev > 0.0) || !(e_next > 0.0)) {
    throw InvalidArgument(fmt::format("rates need positive errors, got {} and {}", e_prev, e_next));
  }
  if (dof_prev <= 0 || dof_next <= dof_prev) {
    throw InvalidArgument(fmt::format("rates need increasing positive DoF, got {} and {}", dof_prev, dof_next));
  }
  return std::log(e_prev / e_next) / std::log(std::sqrt(static_cast<double>(dof_next) / dof_prev));
}

double convergence_rate(const TableRow& prev, const TableRow& next, bool h1) {
  return h1 ? convergence_rate(prev.e_h1, prev.dof, next.e_h1, next.dof)
            : convergence_rate(prev.e_l2, prev.dof, next.e_l2, next.dof);
}

void ConvergenceTable::append(TableRow row) {
  row.cv_l2.reset();
  row.cv_h1.reset();
  if (!rows.empty()) {
    const TableRow& prev = rows.back();
    if (row.dof <= prev.dof) {
      throw InvalidArgument(fmt::format("DoF must increase: {} after {}", row.dof, prev.dof));
    }
    if (prev.e_l2 > 0.0 && row.e_l2 > 0.0) row.cv_l2 = convergence_rate(prev, row, false);
    if (prev.e_h1 > 0.0 && row.e_h1 > 0.0) row.cv_h1 = convergence_rate(prev, row, true);
  }
  rows.push_back(row);
}

std::vector<std::string> ConvergenceTable::defects() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == 0 && (rows[i].cv_l2 || rows[i].cv_h1)) out.push_back("first row carries a rate");
    if (i > 0 && rows[i].dof <= rows[i - 1].dof) out.push_back(fmt::format("row {}: DoF not increasing", i + 1));
    if (i > 0 && rows[i].k <= rows[i - 1].k) out.push_back(fmt::format("row {}: level not increasing", i + 1));
  }
  return out;
}

namespace {

std::string optional_field(const std::optional<double>& v, const char* spec) {
  return v ? fmt::format(fmt::runtime(spec), *v) : std::string();
}

}  // namespace

void ConvergenceTable::write_csv(std::ostream& out) const {
  out << "k,dof,e_l2,cv_l2,e_h1,cv_h1,eta,effectivity\n";
  for (const TableRow& r : rows) {
    out << fmt::format("{},{},{:.6e},{},{:.6e},{},{:.6e},{}\n", r.k, r.dof, r.e_l2, optional_field(r.cv_l2, "{:.4f}"),
                       r.e_h1, optional_field(r.cv_h1, "{:.4f}"), r.eta,
                       r.exact_solution ? std::string() : fmt::format("{:.4f}", r.effectivity));
  }
  if (!out) throw IoError("failed writing convergence table");
}

void ConvergenceTable::write_text(std::ostream& out) const {
  out << fmt::format("{:>4} {:>9} {:>10} {:>6} {:>10} {:>6} {:>10} {:>8}\n", "k", "DoF", "e_L2", "CV_L2", "e_H1",
                     "CV_H1", "eta", "eta/e_H1");
  for (const TableRow& r : rows) {
    out << fmt::format("{:>4} {:>9} {:>10.2E} {:>6} {:>10.2E} {:>6} {:>10.2E} {:>8}\n", r.k, r.dof, r.e_l2,
                       optional_field(r.cv_l2, "{:.2f}"), r.e_h1, optional_field(r.cv_h1, "{:.2f}"), r.eta,
                       r.exact_solution ? std::string("-") : fmt::format("{:.2f}", r.effectivity));
  }
  if (!out) throw IoError("failed writing convergence table");
}

std::vector<Index> mark(const ElementIndicators& indicators, double threshold) {
  if (indicators.size() == 0) throw InvalidArgument("cannot mark an empty indicator set");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgument(fmt::format("marking threshold must lie in (0,1), got {}", threshold));
  }
  double max = 0.0;
  for (Index t = 0; t < indicators.size(); ++t) max = std::max(max, indicators.combined(t));
  std::vector<Index> out;
  const double cut = threshold * max;
  for (Index t = 0; t < indicators.size(); ++t) {
    if (indicators.combined(t) > cut) out.push_back(t);
  }
  return out;
}

LevelFailure::LevelFailure(int level, bool singular, const std::string& what)
    : Error(fmt::format("level {}: {}", level, what)), level_(level), singular_(singular) {}

ConvergenceTable run_loop(const ProblemSpec& problem, Mesh initial, const LoopOptions& options) {
  if (options.steps < 1) throw InvalidArgument(fmt::format("steps must be >= 1, got {}", options.steps));
  ConvergenceTable table;
  Mesh mesh = std::move(initial);
  const SubdomainField f = [&](Point p, Subdomain s) { return problem.source(p, s); };

  for (int k = 1; k <= options.steps; ++k) {
    DiscreteSolution uh;
    try {
      uh = solve_problem(mesh, problem, *options.load_rule);
    } catch (const SingularSystem& e) {
      throw LevelFailure(k, true, e.what());
    } catch (const Error& e) {
      throw LevelFailure(k, false, e.what());
    }
    const ErrorNorms err = compute_errors(mesh, uh, problem.exact);
    const ElementIndicators ind = compute_indicators(mesh, uh, problem.coefficient, f, *options.load_rule);
    const EstimatorReport rep = aggregate(ind, err.h1);

    TableRow row;
    row.k = k;
    row.dof = mesh.num_vertices();
    row.triangles = mesh.num_triangles();
    row.e_l2 = err.l2;
    row.e_h1 = err.h1;
    row.e_h1_semi = err.h1_semi;
    row.eta = rep.eta;
    row.effectivity = rep.effectivity;
    row.oscillation = rep.oscillation;
    row.exact_solution = rep.exact_solution;
    table.append(row);

    const bool last = k == options.steps || (options.max_dof && mesh.num_vertices() >= *options.max_dof);
    std::vector<Index> marked;
    if (options.mode == RefinementMode::Adaptive) {
      marked = mark(ind, options.mark_threshold);
    } else {
      marked.resize(mesh.num_triangles());
      for (Index t = 0; t < mesh.num_triangles(); ++t) marked[t] = t;
    }
    if (options.observer) {
      LevelData data{k, &mesh, &uh, &ind, &table.rows.back(), marked};
      options.observer(data);
    }
    if (last) break;
    mesh = options.mode == RefinementMode::Uniform ? refine_uniform(mesh) : refine_marked(mesh, marked);
  }
  return table;
}

double marked_fraction_near(const Mesh& mesh, const std::vector<Index>& marked, Point p, double radius) {
  if (marked.empty()) return 0.0;
  std::size_t near = 0;
  for (Index t : marked) {
    const auto c = mesh.triangle_coords(t);
    const Point centroid = (1.0 / 3.0) * (c[0] + c[1] + c[2]);
    if (norm(centroid - p) < radius) ++near;
  }
  return static_cast<double>(near) / static_cast<double>(marked.size());
}

}  // namespace signfem
