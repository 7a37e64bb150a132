#include <cmath>

#include <Eigen/Dense>
#include <tuple>

#include <gtest/gtest.h>

#include "greenforms/bundle.hpp"
#include "greenforms/errors.hpp"
#include "greenforms/forms.hpp"
#include "greenforms/green.hpp"
#include "greenforms/hodge.hpp"

using namespace greenforms;

namespace {

SimplicialMesh shape(Shape s, int res) {
  switch (s) {
    case Shape::annulus: return generate_mesh(s, {0.5, 1.0}, res);
    case Shape::box3d: return generate_mesh(s, {1, 1, 1}, res);
    default: return generate_mesh(s, {1.0}, res);
  }
}

int harmonic_dim(const SimplicialMesh& m, int p, BoundaryCondition bc) {
  const auto b = FlatBundle::identity(1, m.count(1));
  return harmonic_space(HodgeLaplacian(m, p, b, bc)).dimension();
}

Cochain random_exact(const SimplicialMesh& m, const FlatBundle& b, int p, Rng& rng, Vec* potential = nullptr) {
  const int r = b.rank();
  const Cochain v = to_bundle_frame(m, b, interpolate(m, p - 1, r, random_smooth_form(m.dim(), p - 1, r, rng, 6, 3.0)));
  if (potential) *potential = v.values;
  return {p, r, exterior_derivative(m, p - 1, b).matrix * v.values};
}

}  // namespace

struct BettiCase {
  Shape shape;
  int res;
  std::vector<int> neumann, dirichlet;
};

class Betti : public ::testing::TestWithParam<BettiCase> {};

TEST_P(Betti, HarmonicDimensions) {
  const auto& c = GetParam();
  const auto m = shape(c.shape, c.res);
  for (int p = 0; p <= m.dim(); ++p) {
    EXPECT_EQ(harmonic_dim(m, p, BoundaryCondition::neumann), c.neumann[p]) << "N p=" << p;
    EXPECT_EQ(harmonic_dim(m, p, BoundaryCondition::dirichlet), c.dirichlet[p]) << "D p=" << p;
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, Betti,
                         ::testing::Values(BettiCase{Shape::disk, 6, {1, 0, 0}, {0, 0, 1}},
                                           BettiCase{Shape::annulus, 6, {1, 1, 0}, {0, 1, 1}},
                                           BettiCase{Shape::torus2d, 5, {1, 2, 1}, {1, 2, 1}},
                                           BettiCase{Shape::box3d, 3, {1, 0, 0, 0}, {0, 0, 0, 1}}),
                         [](const auto& info) { return shape_name(info.param.shape); });

TEST(HarmonicSpace, BasisIsHarmonicAndOrthonormal) {
  const auto m = shape(Shape::annulus, 8);
  const auto b = FlatBundle::identity(1, m.count(1));
  for (auto bc : {BoundaryCondition::neumann, BoundaryCondition::dirichlet}) {
    const HodgeLaplacian lap(m, 1, b, bc);
    const auto h = harmonic_space(lap);
    ASSERT_EQ(h.dimension(), 1);
    const Mat gram = h.basis.transpose() * lap.mass() * h.basis;
    EXPECT_LE((gram - Mat::Identity(1, 1)).norm(), 1e-10);
    const Vec x = h.basis.col(0);
    EXPECT_LE(lap.derivative(x).norm(), 1e-8);
    EXPECT_LE(lap.codifferential(x).norm(), 1e-8);
  }
}

TEST(HarmonicSpace, TwistedAnnulusLosesLoop) {
  // nontrivial holonomy kills the flat sections and the loop class
  const auto m = shape(Shape::annulus, 8);
  const auto b = build_flat_bundle(m, 2, BundleSpec::rotation(1.0));
  EXPECT_EQ(harmonic_space(HodgeLaplacian(m, 0, b, BoundaryCondition::neumann)).dimension(), 0);
  const auto g = build_flat_bundle(m, 2, BundleSpec::random_flat(3));
  EXPECT_EQ(harmonic_space(HodgeLaplacian(m, 1, g, BoundaryCondition::neumann)).dimension(), 2);
}

TEST(Potential, ZeroSource) {
  const auto m = shape(Shape::disk, 8);
  const auto b = FlatBundle::identity(1, m.count(1));
  const HodgeLaplacian lap(m, 1, b, BoundaryCondition::dirichlet);
  const PotentialSolver ps(lap);
  EXPECT_EQ(ps.potential(Vec::Zero(m.count(1))).norm(), 0.0);
}

TEST(Potential, TorsionFunctionOfTheDisk) {
  const auto m = shape(Shape::disk, 32);
  const auto b = FlatBundle::identity(1, m.count(1));
  const HodgeLaplacian lap(m, 0, b, BoundaryCondition::dirichlet);
  const PotentialSolver ps(lap);
  const Vec phi = ps.potential(Vec::Ones(m.count(0)));
  double worst = 0.0;
  for (int v = 0; v < m.count(0); ++v) worst = std::max(worst, std::abs(phi[v] - (1.0 - m.vertex(v).squaredNorm()) / 4.0));
  EXPECT_LE(worst, 0.02 * 0.25);
}

TEST(Potential, ManufacturedOneFormOnAnnulus) {
  const auto m = shape(Shape::annulus, 8);
  const auto b = FlatBundle::identity(1, m.count(1));
  const HodgeLaplacian lap(m, 1, b, BoundaryCondition::neumann);
  const PotentialSolver ps(lap);
  Rng rng(5);
  const Vec w = interpolate(m, 1, 1, random_smooth_form(2, 1, 1, rng, 6, 2.0)).values;
  const Vec w0 = w - ps.harmonic_part(w);
  const Vec f = lap.dofs().extend(lap.apply(lap.dofs().restrict(w0)));
  const Vec phi = ps.potential(f);
  EXPECT_LE(mass_norm(lap.mass_full(), phi - w0), 1e-6 * mass_norm(lap.mass_full(), w0));
}

TEST(Potential, RejectsHarmonicSource) {
  const auto m = shape(Shape::annulus, 6);
  const auto b = FlatBundle::identity(1, m.count(1));
  const HodgeLaplacian lap(m, 1, b, BoundaryCondition::neumann);
  const PotentialSolver ps(lap);
  const Vec h = ps.harmonic().full.col(0);
  try {
    ps.potential(h);
    FAIL() << "harmonic source accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotOrthogonal);
  }
  EXPECT_LE(ps.potential(h, true).norm(), 1e-8);
}

TEST(Potential, AgreesWithGreenColumns) {
  const auto m = shape(Shape::disk, 6);
  const auto b = FlatBundle::identity(1, m.count(1));
  for (int p : {0, 1}) {
    const HodgeLaplacian lap(m, p, b, BoundaryCondition::dirichlet);
    const PotentialSolver ps(lap);
    std::vector<int> inner;
    for (int s = 0; s < m.count(p); ++s)
      if (!m.on_boundary(p, s)) inner.push_back(s);
    const auto k = green_columns(lap, inner);
    Rng rng(8);
    Vec f(m.count(p));
    for (int i = 0; i < f.size(); ++i) f[i] = rng.normal();
    const Vec phi = ps.potential(f);
    const Vec load = lap.mass_full() * f;
    double worst = 0.0;
    for (std::size_t j = 0; j < inner.size(); ++j)
      worst = std::max(worst, std::abs(k.columns.col(static_cast<Eigen::Index>(j)).dot(load) - phi[inner[j]]));
    EXPECT_LE(worst, 1e-8 * phi.cwiseAbs().maxCoeff()) << "p=" << p;
  }
}

TEST(SolveD, ExactDataOnSeveralConfigurations) {
  struct Case {
    Shape s;
    int res, p, rank;
    bool gauge;
  };
  for (const auto& c : {Case{Shape::disk, 8, 1, 1, false}, Case{Shape::disk, 8, 2, 1, false},
                        Case{Shape::annulus, 8, 1, 2, true}, Case{Shape::box3d, 3, 1, 1, false},
                        Case{Shape::box3d, 3, 2, 1, false}}) {
    const auto m = shape(c.s, c.res);
    const auto b = c.gauge ? build_flat_bundle(m, c.rank, BundleSpec::random_flat(7)) : FlatBundle::identity(c.rank, m.count(1));
    const DSolver ds(m, c.p, b);
    Rng rng(21);
    for (int i = 0; i < 10; ++i) {
      Vec v;
      const Cochain f = random_exact(m, b, c.p, rng, &v);
      const auto res = ds.solve(f);
      EXPECT_LE(res.report.residual, 1e-8) << shape_name(c.s) << " p=" << c.p;
      EXPECT_LE(res.report.orthogonality, 1e-8);
      // no particular solution is shorter than the returned one
      Vec v0 = v;
      const auto& hl = ds.lower_harmonic();
      if (hl.dimension() > 0) v0 -= hl.full * (hl.full.transpose() * (ds.mass_lower() * v));
      EXPECT_LE(mass_norm(ds.mass_lower(), res.u.values), mass_norm(ds.mass_lower(), v0) + 1e-6)
          << shape_name(c.s) << " p=" << c.p << " rank " << c.rank;
    }
  }
}

TEST(SolveD, MatchesMinimalNormSolution) {
  for (auto [s, res, p] : {std::tuple{Shape::disk, 4, 1}, std::tuple{Shape::disk, 4, 2}, std::tuple{Shape::box3d, 2, 2}}) {
    const auto m = shape(s, res);
    const auto b = FlatBundle::identity(1, m.count(1));
    const DSolver ds(m, p, b);
    Rng rng(2);
    const Cochain f = random_exact(m, b, p, rng);
    const auto u = ds.solve(f).u.values;
    // argmin |u|_M subject to du = f: u = M^-1 D^T lambda
    const Mat d = Mat(ds.derivative());
    const Mat mli = Mat(ds.mass_lower()).inverse();
    const Vec lambda = (d * mli * d.transpose()).completeOrthogonalDecomposition().solve(f.values);
    const Vec umin = mli * d.transpose() * lambda;
    EXPECT_LE((d * umin - f.values).norm(), 1e-9 * f.values.norm());
    EXPECT_LE(mass_norm(ds.mass_lower(), u - umin), 1e-6 * mass_norm(ds.mass_lower(), umin)) << shape_name(s) << " p=" << p;
  }
}

TEST(SolveD, ZeroData) {
  const auto m = shape(Shape::disk, 6);
  const auto b = FlatBundle::identity(1, m.count(1));
  const DSolver ds(m, 1, b);
  const auto r = ds.solve(Cochain::zeros(m, 1));
  EXPECT_EQ(r.u.values.norm(), 0.0);
  EXPECT_EQ(r.report.norm_ratio, 0.0);
}

TEST(SolveD, AnnulusGeneratorIsObstructed) {
  const auto m = shape(Shape::annulus, 12);
  const auto b = FlatBundle::identity(1, m.count(1));
  const DSolver ds(m, 1, b);
  const Cochain h{1, 1, ds.neumann().harmonic().full.col(0)};
  try {
    ds.solve(h);
    FAIL() << "harmonic generator solved";
  } catch (const ObstructionError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ObstructionNonExact);
    EXPECT_NEAR(e.report().obstruction_norm, mass_norm(ds.mass(), h.values), 1e-6);
  }
}

TEST(SolveD, RejectsNonClosedData) {
  const auto m = shape(Shape::disk, 6);
  const auto b = FlatBundle::identity(1, m.count(1));
  const DSolver ds(m, 1, b);
  Rng rng(1);
  Cochain f = Cochain::zeros(m, 1);
  for (int i = 0; i < f.values.size(); ++i) f.values[i] = rng.normal();
  try {
    ds.solve(f);
    FAIL() << "non-closed data accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotClosed);
  }
  EXPECT_THROW(DSolver(m, 0, b), Error);
}

TEST(SolveD, NormRatioStableUnderRefinement) {
  std::vector<double> worst;
  for (int res : {8, 16}) {
    const auto m = shape(Shape::disk, res);
    const auto b = FlatBundle::identity(1, m.count(1));
    const DSolver ds(m, 1, b);
    Rng rng(33);
    double w = 0.0;
    for (int i = 0; i < 50; ++i) w = std::max(w, ds.solve(random_exact(m, b, 1, rng), 2.0, 2.0).report.norm_ratio);
    worst.push_back(w);
  }
  EXPECT_LE(std::max(worst[0], worst[1]) / std::min(worst[0], worst[1]), 2.0);
}

TEST(SolveD, GaugeBundlesAgreeAcrossRanks) {
  const auto m = shape(Shape::disk, 8);
  std::vector<double> worst;
  for (int rank : {1, 2}) {
    const auto b = build_flat_bundle(m, rank, BundleSpec::random_flat(13));
    const DSolver ds(m, 1, b);
    Rng rng(17);
    double w = 0.0;
    for (int i = 0; i < 50; ++i) w = std::max(w, ds.solve(random_exact(m, b, 1, rng), 2.0, 2.0).report.norm_ratio);
    worst.push_back(w);
  }
  EXPECT_LE(std::max(worst[0], worst[1]) / std::min(worst[0], worst[1]), 1.5);
}

TEST(HodgeDecomposition, RandomCochains) {
  for (auto s : {Shape::annulus, Shape::torus2d}) {
    const auto m = shape(s, 6);
    const auto b = FlatBundle::identity(1, m.count(1));
    const HodgeLaplacian lap(m, 1, b, BoundaryCondition::neumann);
    const PotentialSolver ps(lap);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
      Vec f(m.count(1));
      for (int j = 0; j < f.size(); ++j) f[j] = rng.normal();
      const auto dec = hodge_decomposition(ps, f);
      EXPECT_LE(dec.reconstruction, 1e-8);
      EXPECT_LE(dec.max_cross, 1e-8);
    }
  }
}

TEST(HarmonicExtension, ReproducesLinearFunction) {
  const auto m = shape(Shape::disk, 8);
  const HarmonicExtension ext(m, 0);
  Vec x(m.count(0));
  for (int v = 0; v < m.count(0); ++v) x[v] = m.vertex(v)[0] - 2.0 * m.vertex(v)[1];
  Vec data = x;
  for (int v = 0; v < m.count(0); ++v)
    if (!m.on_boundary(0, v)) data[v] = 0.0;
  // P1 reproduces affine functions exactly
  EXPECT_LE((ext.extend(data) - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(HarmonicExtension, TopDegreeUnsupported) {
  const auto m = shape(Shape::disk, 4);
  try {
    HarmonicExtension ext(m, 2);
    FAIL() << "top degree accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedConfiguration);
  }
}
