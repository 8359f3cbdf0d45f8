#include "signfem/estimator.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace signfem {

std::vector<double> ElementIndicators::combined() const {
  std::vector<double> out(residual.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = residual[t] + jump[t];
  return out;
}

ElementIndicators compute_indicators(const Mesh& mesh, const DiscreteSolution& uh, const Coefficient& a,
                                     const SubdomainField& f, const TriangleRule& mean_rule) {
  if (!uh.matches(mesh)) throw InvalidArgument("discrete solution belongs to a different mesh");
  const Index nt = mesh.num_triangles();
  ElementIndicators ind;
  ind.residual.assign(nt, 0.0);
  ind.jump.assign(nt, 0.0);
  ind.oscillation.assign(nt, 0.0);
  ind.mean_source.assign(nt, 0.0);

  const TriangleRule& osc_rule = symmetric_rule_degree6();
  std::vector<Point> flux(nt);
  for (const Triangle& t : mesh.triangles()) {
    const auto tri = mesh.triangle_coords(t.id);
    const auto grads = hat_gradients(tri);
    Point g{0.0, 0.0};
    for (int i = 0; i < 3; ++i) g = g + uh.nodal(t.vertex_ids[i]) * grads[i];
    flux[t.id] = a(t.subdomain) * g;

    const auto source = [&](Point p, const auto&) { return f(p, t.subdomain); };
    const double mean = integrate(tri, mean_rule, source) / t.area;
    ind.mean_source[t.id] = mean;
    ind.residual[t.id] = t.diameter * std::abs(mean) * std::sqrt(t.area);
    const double osc_sq = integrate(tri, osc_rule, [&](Point p, const auto&) {
      const double d = f(p, t.subdomain) - mean;
      return d * d;
    });
    ind.oscillation[t.id] = t.diameter * std::sqrt(osc_sq);
  }

  for (const Edge& e : mesh.edges()) {
    if (e.kind != EdgeKind::Interior) continue;
    const double jump = dot(flux[e.triangles[0]] - flux[e.triangles[1]], e.normal);
    // h_e^{1/2} * |jump| * |e|^{1/2}: the jump of a P1 flux is constant on e.
    const double contribution = e.length * std::abs(jump);
    ind.jump[e.triangles[0]] += contribution;
    ind.jump[e.triangles[1]] += contribution;
  }
  return ind;
}

EstimatorReport aggregate(const ElementIndicators& indicators, double error_h1) {
  EstimatorReport r;
  double rr = 0.0, jj = 0.0, oo = 0.0;
  for (Index t = 0; t < indicators.size(); ++t) {
    rr += indicators.residual[t] * indicators.residual[t];
    jj += indicators.jump[t] * indicators.jump[t];
    oo += indicators.oscillation[t] * indicators.oscillation[t];
  }
  r.eta_residual = std::sqrt(rr);
  r.eta_jump = std::sqrt(jj);
  r.eta = r.eta_residual + r.eta_jump;
  r.oscillation = std::sqrt(oo);
  r.error_h1 = error_h1;
  if (error_h1 > 0.0) {
    r.effectivity = r.eta / error_h1;
  } else {
    r.exact_solution = true;
  }
  return r;
}

double patch_oscillation(const Mesh& mesh, const ElementIndicators& indicators, Index t) {
  double sum = 0.0;
  for (Index s : mesh.triangle_patch(t)) sum += indicators.oscillation[s] * indicators.oscillation[s];
  return std::sqrt(sum);
}

void write_indicators(std::ostream& out, const ElementIndicators& indicators) {
  out << "# triangle eta_R eta_J osc\n";
  for (Index t = 0; t < indicators.size(); ++t) {
    out << fmt::format("{} {:.17g} {:.17g} {:.17g}\n", t, indicators.residual[t], indicators.jump[t],
                       indicators.oscillation[t]);
  }
  if (!out) throw IoError("failed writing indicators");
}

}  // namespace signfem
