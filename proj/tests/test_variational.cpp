#include <gtest/gtest.h>

#include <dimervar/variational.hpp>

using namespace dimervar;

namespace {

BoundaryData planar_square_boundary(double s, double t) {
  BoundaryData d;
  for (int k = 0; k <= 8; ++k) {
    const double u = k / 8.0;
    for (Point2 p : {Point2{u, 0}, Point2{1, u}, Point2{1 - u, 1}, Point2{0, 1 - u}}) d.samples.push_back({p, s * p.x + t * p.y});
  }
  return d;
}

}  // namespace

TEST(Region, Validation) {
  EXPECT_THROW(validate_region({{{0, 0}, {1, 0}}}), InvalidRegion);
  EXPECT_THROW(validate_region({{{0, 0}, {0, 1}, {1, 1}, {1, 0}}}), InvalidRegion);  // clockwise
  EXPECT_THROW(validate_region({{{0, 0}, {1, 1}, {1, 0}, {0, 1}}}), InvalidRegion);  // bow tie
  EXPECT_NO_THROW(validate_region(aztec_polygon()));
}

TEST(Boundary, LipschitzViolation) {
  BoundaryData d{{{{0, 0}, 0}, {{1, 0}, 2.5}}};
  EXPECT_THROW(validate_boundary(d), InfeasibleBoundary);
  EXPECT_THROW(discretize(unit_square(), d, 0.1), InfeasibleBoundary);
  EXPECT_THROW(discretize(unit_square(), planar_square_boundary(0, 0), 0), InvalidRegion);
}

TEST(Boundary, AztecData) {
  auto d = aztec_boundary_data(8);
  for (const auto& s : d.samples) EXPECT_NEAR(s.h, 2 - 2 * std::abs(s.p.x), 1e-12);
  EXPECT_NO_THROW(validate_boundary(d));
}

TEST(Discretize, SquareMesh) {
  auto F = discretize(unit_square(), planar_square_boundary(0, 0), 0.25);
  EXPECT_EQ(F.nodes.size(), 25u);
  EXPECT_NEAR(F.area, 1, 1e-12);
  int pinned = 0;
  for (char p : F.pinned) pinned += p;
  EXPECT_EQ(pinned, 16);
}

TEST(Discretize, DiamondArea) {
  auto F = discretize(aztec_polygon(), aztec_boundary_data(8), 1.0 / 8);
  EXPECT_NEAR(F.area, 2, 1e-12);
}

TEST(Solver, FlatSquare) {
  auto F = discretize(unit_square(), planar_square_boundary(0, 0), 1.0 / 16);
  auto rep = maximize_entropy(F);
  EXPECT_NEAR(rep.ent, 2 * catalan / pi, 1e-9);
  for (double v : F.values) EXPECT_NEAR(v, 0, 1e-8);
  EXPECT_NEAR(rep.residual_norm, 0, 1e-8);
}

TEST(Solver, PlanarBoundaryGivesPlane) {
  const double s = 0.6, t = -0.4;
  auto F = discretize(unit_square(), planar_square_boundary(s, t), 1.0 / 12);
  auto rep = maximize_entropy(F);
  EXPECT_NEAR(rep.ent, ent_from_tilt({s, t}), 1e-8);
  for (std::size_t k = 0; k < F.nodes.size(); ++k)
    EXPECT_NEAR(F.values[k], s * F.nodes[k].x + t * F.nodes[k].y, 1e-5);
}

TEST(Solver, AztecCoarse) {
  auto F = discretize(aztec_polygon(), aztec_boundary_data(16), 1.0 / 16);
  auto rep = maximize_entropy(F);
  EXPECT_NEAR(rep.ent, std::log(2.0) / 2, 0.02);
  // Reflection symmetry of the data is inherited by the maximizer.
  for (std::size_t k = 0; k < F.nodes.size(); ++k) {
    const auto [i, j] = F.grid[k];
    const int mirror = F.node(F.nx - 1 - i, j);
    ASSERT_GE(mirror, 0);
    EXPECT_NEAR(F.values[k], F.values[mirror], 1e-6);
  }
  // Each tilt satisfies the Lipschitz constraint.
  for (const auto& T : F.triangles) {
    auto tl = F.tilt(T);
    EXPECT_LE(std::abs(tl.s) + std::abs(tl.t), 2 + 1e-9);
  }
}

TEST(Solver, BarrierObjectiveIncreasesWithinEachStage) {
  auto F = discretize(aztec_polygon(), aztec_boundary_data(16), 1.0 / 12);
  auto rep = maximize_entropy(F);
  ASSERT_GT(rep.history.size(), 2u);
  for (std::size_t k = 1; k < rep.history.size(); ++k)
    if (rep.history[k].stage == rep.history[k - 1].stage) {
      EXPECT_GE(rep.history[k].objective, rep.history[k - 1].objective);
    }
}

TEST(Solver, StartIndependence) {
  auto F1 = discretize(aztec_polygon(), aztec_boundary_data(16), 1.0 / 12);
  auto F2 = F1;
  maximize_entropy(F1);
  SolverConfig cfg;
  cfg.random_start = true;
  cfg.seed = 17;
  maximize_entropy(F2, cfg);
  for (std::size_t k = 0; k < F1.values.size(); ++k) EXPECT_NEAR(F1.values[k], F2.values[k], 1e-5);
}

TEST(Solver, IterationCap) {
  auto F = discretize(aztec_polygon(), aztec_boundary_data(16), 1.0 / 16);
  SolverConfig cfg;
  cfg.max_iterations = 3;
  EXPECT_THROW(maximize_entropy(F, cfg), NonConvergence);
}

TEST(Frozen, CornersAreBrickwork) {
  auto F = discretize(aztec_polygon(), aztec_boundary_data(16), 1.0 / 16);
  maximize_entropy(F);
  const auto tilts = tilt_field(F);
  const auto centres = cell_centres(F);
  const auto probs = predicted_probabilities(F);
  ASSERT_EQ(tilts.size(), centres.size());
  for (std::size_t c = 0; c < tilts.size(); ++c) {
    const double r2 = centres[c].x * centres[c].x + centres[c].y * centres[c].y;
    if (std::abs(centres[c].x) + std::abs(centres[c].y) > 0.9 && r2 > 0.7) {
      EXPECT_TRUE(is_extremal(tilts[c]));
      EXPECT_EQ(std::max({probs[c].pa, probs[c].pb, probs[c].pc, probs[c].pd}), 1.0);
    }
    if (r2 < 0.1) {
      EXPECT_FALSE(is_extremal(tilts[c]));
    }
  }
}

TEST(Field, Interpolation) {
  auto F = discretize(unit_square(), planar_square_boundary(0.5, 0.25), 0.25);
  maximize_entropy(F);
  EXPECT_NEAR(field_at(F, {0.3, 0.7}), 0.5 * 0.3 + 0.25 * 0.7, 1e-7);
  auto D = discretize(aztec_polygon(), aztec_boundary_data(8), 1.0 / 8);
  EXPECT_TRUE(std::isfinite(field_at(D, {0.49, 0.49})));
}
