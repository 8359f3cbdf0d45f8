#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "signfem/tcoercivity.hpp"

using namespace signfem;

namespace {

Mesh mirrored(Geometry g, int n) { return build_structured_mesh(g, n, Diagonal::Mirrored); }

// Random P1 function vanishing on Gamma.
Eigen::VectorXd random_field(const Mesh& mesh, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(mesh.num_vertices());
  for (const Vertex& x : mesh.vertices()) v(x.id) = x.on_boundary ? 0.0 : dist(rng);
  return v;
}

bool interior_sigma(const Vertex& v) { return v.on_interface && !v.on_boundary; }

}  // namespace

TEST(Lifting, ClosedFormReflections) {
  const auto v = [](Point p) { return p.x * (1.0 - p.x) + 0.0 * p.y; };
  const ScalarField lifted = lift_trace(Geometry::SymmetricSquare, v);
  for (Point p : {Point{-0.3, 0.2}, Point{-0.9, -0.7}}) EXPECT_DOUBLE_EQ(lifted(p), -p.x * (1.0 + p.x));
  EXPECT_DOUBLE_EQ(lifted({0.0, 0.4}), v({0.0, 0.4}));

  const ScalarField one = lift_trace(Geometry::LShapedInterface, [](Point) { return 1.0; }, LiftDirection::MinusToPlus);
  EXPECT_DOUBLE_EQ(one({0.3, 0.6}), 1.0);
}

TEST(Lifting, TraceAgreementOnSigma) {
  const auto v = [](Point p) { return std::sin(2.0 * p.x + 1.0) * std::cos(p.y - 0.3); };
  for (auto d : {LiftDirection::PlusToMinus, LiftDirection::MinusToPlus}) {
    for (Geometry g : {Geometry::SymmetricSquare, Geometry::LShapedInterface}) {
      const ScalarField lifted = lift_trace(g, v, d);
      for (double s = 0.05; s < 1.0; s += 0.1) {
        EXPECT_NEAR(lifted({0.0, s}), v({0.0, s}), 1e-12);
        if (g == Geometry::SymmetricSquare) EXPECT_NEAR(lifted({0.0, -s}), v({0.0, -s}), 1e-12);
        if (g == Geometry::LShapedInterface) EXPECT_NEAR(lifted({s, 0.0}), v({s, 0.0}), 1e-12);
      }
    }
  }
}

TEST(Lifting, NodalReflectionScalesEnergyExactly) {
  std::mt19937_64 rng(7);
  const Mesh square = mirrored(Geometry::SymmetricSquare, 4);
  const Mesh lshape = mirrored(Geometry::LShapedInterface, 4);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd v = random_field(square, rng);
    const Eigen::VectorXd rv = lift_trace_nodal(square, Geometry::SymmetricSquare, v);
    const double ratio = std::pow(subdomain_seminorm(square, rv, Subdomain::Minus), 2) /
                         std::pow(subdomain_seminorm(square, v, Subdomain::Plus), 2);
    EXPECT_NEAR(ratio, 1.0, 1e-12);

    const Eigen::VectorXd w = random_field(lshape, rng);
    const Eigen::VectorXd rw = lift_trace_nodal(lshape, Geometry::LShapedInterface, w);
    EXPECT_NEAR(std::pow(subdomain_seminorm(lshape, rw, Subdomain::Minus), 2) /
                    std::pow(subdomain_seminorm(lshape, w, Subdomain::Plus), 2),
                3.0, 1e-12);
    for (const Vertex& x : lshape.vertices()) {
      if (x.on_interface) EXPECT_EQ(rw(x.id), w(x.id));
    }
  }
}

TEST(Lifting, NodalReflectionNeedsMirrorSymmetry) {
  const Mesh mesh = refine_marked(mirrored(Geometry::SymmetricSquare, 2), std::vector<Index>{0});
  EXPECT_THROW(lift_trace_nodal(mesh, Geometry::SymmetricSquare, Eigen::VectorXd::Ones(mesh.num_vertices())),
               InvalidArgument);
}

TEST(Clement, ConstantsAreReproduced) {
  for (Geometry g : {Geometry::SymmetricSquare, Geometry::LShapedInterface}) {
    const Mesh mesh = mirrored(g, 3);
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(mesh.num_vertices(), 2.5);
    for (auto weights : {ClementWeights::Modified, ClementWeights::Standard}) {
      const Eigen::VectorXd a = clement_interpolate(mesh, g, [](Point) { return 2.5; }, c, weights);
      const Eigen::VectorXd b = clement_interpolate(mesh, g, c, c, weights);
      for (const Vertex& v : mesh.vertices()) {
        const bool in_minus = !v.on_boundary && (v.on_interface || geometry::classify(g, v.coords) == Subdomain::Minus);
        EXPECT_NEAR(a(v.id), in_minus ? 2.5 : 0.0, 1e-13);
        EXPECT_NEAR(b(v.id), in_minus ? 2.5 : 0.0, 1e-13);
      }
    }
  }
}

TEST(Clement, TracePreservedOnEveryLevel) {
  std::mt19937_64 rng(11);
  for (Geometry g : {Geometry::SymmetricSquare, Geometry::LShapedInterface}) {
    Mesh mesh = mirrored(g, 2);
    for (int level = 0; level < 4; ++level) {
      const Eigen::VectorXd v = random_field(mesh, rng);
      const Eigen::VectorXd rv = lift_trace_nodal(mesh, g, v);
      const Eigen::VectorXd ih = clement_interpolate(mesh, g, rv, v);
      for (const Vertex& x : mesh.vertices()) {
        if (interior_sigma(x)) EXPECT_EQ(ih(x.id), v(x.id));
      }
      mesh = refine_uniform(mesh);
    }
  }
}

TEST(Clement, StabilityRatioBoundedUnderRefinement) {
  const std::array<ScalarField, 3> fields{
      [](Point p) { return (1 - p.x * p.x) * (1 - p.y * p.y); },
      [](Point p) { return (1 - p.x * p.x) * (1 - p.y * p.y) * (p.y + 0.3); },
      [](Point p) { return std::sin(std::numbers::pi * p.y) * (1 - p.x * p.x); },
  };
  for (auto weights : {ClementWeights::Modified, ClementWeights::Standard}) {
    for (const ScalarField& f : fields) {
      // n = 2 has a single interior Omega_- node per column and is pre-asymptotic.
      Mesh mesh = mirrored(Geometry::SymmetricSquare, 4);
      std::vector<double> ratios;
      for (int level = 0; level < 4; ++level) {
        const Eigen::VectorXd v = interpolate(mesh, f);
        const Eigen::VectorXd w = lift_trace_nodal(mesh, Geometry::SymmetricSquare, v);
        const Eigen::VectorXd ih = clement_interpolate(mesh, Geometry::SymmetricSquare, w, v, weights);
        const double num = subdomain_seminorm(mesh, ih, Subdomain::Minus);
        const double den = subdomain_norm(mesh, w, Subdomain::Minus) +
                           harmonic_extension_seminorm(mesh, Geometry::SymmetricSquare, v);
        ratios.push_back(num / den);
        mesh = refine_uniform(mesh);
      }
      const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
      EXPECT_GT(*lo, 0.0);
      EXPECT_LE(*hi, 2.0 * *lo) << ::testing::PrintToString(ratios);
    }
  }
}

TEST(HarmonicExtension, MinimizesEnergyAmongExtensions) {
  std::mt19937_64 rng(5);
  const Mesh mesh = mirrored(Geometry::LShapedInterface, 4);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::VectorXd v = random_field(mesh, rng);
    const Eigen::VectorXd rv = lift_trace_nodal(mesh, Geometry::LShapedInterface, v);
    const double harmonic = harmonic_extension_seminorm(mesh, Geometry::LShapedInterface, v);
    EXPECT_GT(harmonic, 0.0);
    EXPECT_LE(harmonic, subdomain_seminorm(mesh, rv, Subdomain::Minus) + 1e-12);
  }
  EXPECT_EQ(harmonic_extension_seminorm(mesh, Geometry::LShapedInterface, Eigen::VectorXd::Zero(mesh.num_vertices())),
            0.0);
}

TEST(TOperator, ZeroTraceFunctionsAreNegated) {
  const Mesh mesh = mirrored(Geometry::SymmetricSquare, 3);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (const Vertex& x : mesh.vertices()) {
    if (!x.on_boundary && !x.on_interface && x.coords.x < 0.0) v(x.id) = std::cos(3.0 * x.coords.y) + x.coords.x;
  }
  for (auto lifting : {DiscreteLifting::Clement, DiscreteLifting::NodalReflection}) {
    const Eigen::VectorXd tv = apply_Th(mesh, Geometry::SymmetricSquare, v, lifting);
    EXPECT_LT((tv + v).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(TOperator, InterfaceValuesKeptAndReflectionIsAnInvolution) {
  std::mt19937_64 rng(3);
  for (Geometry g : {Geometry::SymmetricSquare, Geometry::LShapedInterface}) {
    const Mesh mesh = mirrored(g, 3);
    const DiscreteTOperator clement(mesh, g, DiscreteLifting::Clement);
    const DiscreteTOperator nodal(mesh, g, DiscreteLifting::NodalReflection);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd v = random_field(mesh, rng);
      for (const DiscreteTOperator* t : {&clement, &nodal}) {
        const Eigen::VectorXd tv = t->apply(v);
        for (const Vertex& x : mesh.vertices()) {
          if (x.on_interface || geometry::classify(g, x.coords) == Subdomain::Plus) EXPECT_EQ(tv(x.id), v(x.id));
        }
      }
      // T(Tv) = v: the source side is untouched, so the target side flips back.
      const Eigen::VectorXd ttv = nodal.apply(nodal.apply(v));
      EXPECT_LT((ttv - v).cwiseAbs().maxCoeff(), 1e-13);
      const Eigen::VectorXd ttc = clement.apply(clement.apply(v));
      EXPECT_LT((ttc - v).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
}

TEST(Coercivity, SquareWithSmallContrast) {
  Mesh mesh = mirrored(Geometry::SymmetricSquare, 2);
  double first_alpha = 0.0;
  for (int level = 0; level < 3; ++level) {
    const auto est = estimate_KR_and_coercivity(mesh, Geometry::SymmetricSquare, -0.5);
    EXPECT_NEAR(est.k_r, 0.5, 1e-8);
    EXPECT_GT(est.alpha_min, 0.0);
    if (level == 0) first_alpha = est.alpha_min;
    EXPECT_GE(est.alpha_min, 0.5 * first_alpha);
    const auto cl = estimate_KR_and_coercivity(mesh, Geometry::SymmetricSquare, -0.5,
                                               CoercivityOptions{.lifting = DiscreteLifting::Clement});
    EXPECT_GT(cl.alpha_min, 0.0);
    EXPECT_LT(cl.k_r, 1.0);
    mesh = refine_uniform(mesh);
  }
}

TEST(Coercivity, LShapeBoundAndExchangedRoles) {
  Mesh mesh = mirrored(Geometry::LShapedInterface, 2);
  for (int level = 0; level < 3; ++level) {
    const auto est = estimate_KR_and_coercivity(mesh, Geometry::LShapedInterface, -0.2);
    EXPECT_LE(est.k_r, 0.6 + 1e-8);
    EXPECT_GT(est.alpha_min, 0.0);
    const auto rev = estimate_KR_and_coercivity(mesh, Geometry::LShapedInterface, -5.0,
                                                CoercivityOptions{.exchange_roles = true});
    EXPECT_LE(rev.k_r, 3.0 / 5.0 + 1e-8);
    EXPECT_GT(rev.alpha_min, 0.0);
    mesh = refine_uniform(mesh);
  }
}

TEST(Coercivity, LargeContrastNeedsExchangedRoles) {
  const Mesh mesh = mirrored(Geometry::SymmetricSquare, 4);
  const auto plain = estimate_KR_and_coercivity(mesh, Geometry::SymmetricSquare, -3.0);
  EXPECT_NEAR(plain.k_r, 3.0, 1e-8);
  EXPECT_LT(plain.alpha_min, 0.0);
  const auto swapped =
      estimate_KR_and_coercivity(mesh, Geometry::SymmetricSquare, -3.0, CoercivityOptions{.exchange_roles = true});
  EXPECT_NEAR(swapped.k_r, 1.0 / 3.0, 1e-8);
  EXPECT_GT(swapped.alpha_min, 0.0);
}

TEST(Coercivity, CriticalContrastDegenerates) {
  const Mesh mesh = mirrored(Geometry::SymmetricSquare, 4);
  const auto est = estimate_KR_and_coercivity(mesh, Geometry::SymmetricSquare, -1.0);
  EXPECT_NEAR(est.k_r, 1.0, 1e-8);
  EXPECT_LE(est.alpha_min, 1e-10);
}

TEST(Coercivity, Guards) {
  const Mesh mesh = mirrored(Geometry::SymmetricSquare, 2);
  EXPECT_THROW(estimate_KR_and_coercivity(mesh, Geometry::SymmetricSquare, 0.5), InvalidArgument);
  EXPECT_THROW(estimate_KR_and_coercivity(mesh, Geometry::SymmetricSquare, -0.5, CoercivityOptions{.max_dofs = 3}),
               InvalidArgument);
  EXPECT_EQ(parse_discrete_lifting("clement"), DiscreteLifting::Clement);
  EXPECT_THROW(parse_discrete_lifting("harmonic"), InvalidArgument);
}

TEST(Coercivity, ReportLayout) {
  CoercivityReport report;
  report.mu = -0.5;
  report.k_bound = 0.5;
  const Mesh mesh = mirrored(Geometry::SymmetricSquare, 2);
  report.lines.push_back({0, mesh.num_vertices(), mesh.max_diameter(),
                          estimate_KR_and_coercivity(mesh, Geometry::SymmetricSquare, -0.5)});
  EXPECT_TRUE(report.k_within_bound());
  EXPECT_TRUE(report.alpha_positive());
  std::ostringstream out;
  write_report(out, report);
  EXPECT_NE(out.str().find("geometry square"), std::string::npos);
  EXPECT_NE(out.str().find("alpha_min > 0: pass"), std::string::npos);
}
