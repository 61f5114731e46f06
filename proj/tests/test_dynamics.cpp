#include <gtest/gtest.h>

#include <cmath>

#include "hamgeo/dynamics.hpp"
#include "support.hpp"

using namespace hamgeo;
using testsupport::kP0;
using testsupport::max_abs;

namespace {

const HamiltonianSpec kH = builtin::planar_hamiltonian();
const HamiltonianSpec kFree = builtin::free_particle();

double h_drift(double dt, long steps) {
  return drift_report(integrate_rk4(kH, kP0, dt, steps, {}))[0].max_drift;
}

}  // namespace

TEST(HamiltonRhs, Examples) {
  EXPECT_EQ(hamilton_rhs(kH, kP0), (std::vector<double>{3, 2, -2, 0}));
  const PhasePoint Q({1, 2}, {-0.5, 4});
  EXPECT_EQ(hamilton_rhs(kFree, Q), (std::vector<double>{-0.5, 4, 0, 0}));
  EXPECT_EQ(max_abs(hamilton_rhs(HamiltonianSpec::parse("c", "2", 2), Q)), 0.0);
}

TEST(Rk4, DefaultPlanarRunConservesMomentumAndEnergy) {
  const auto traj = integrate_rk4(kH, kP0, 1e-3, 10000, {{"p2", parse("p2", 2)}, {"c", parse("3", 2)}});
  ASSERT_TRUE(traj.ok()) << traj.message;
  ASSERT_EQ(traj.states.size(), 10001u);
  const auto d = drift_report(traj);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0].name, "H");
  EXPECT_EQ(d[0].initial, 2.5);
  EXPECT_LE(d[0].max_drift, 1e-8);
  EXPECT_EQ(d[1].name, "p2");
  EXPECT_LE(d[1].max_drift, 1e-12);
  EXPECT_EQ(d[2].max_drift, 0.0);
  for (std::size_t k = 1; k < traj.times.size(); ++k) EXPECT_GT(traj.times[k], traj.times[k - 1]);
  EXPECT_NEAR(traj.times.back(), 10.0, 1e-12);
}

TEST(Rk4, FourthOrderConvergence) {
  const double ratio = h_drift(1e-3, 10000) / h_drift(5e-4, 20000);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(Rk4, TimeReversal) {
  const auto fwd = integrate_rk4(kH, kP0, 1e-3, 1000, {});
  const PhasePoint end = fwd.states.back();
  // reverse the flow by flipping momenta: H is even in p
  const PhasePoint flipped(end.x(), {-end.p()[0], -end.p()[1]});
  const auto back = integrate_rk4(kH, flipped, 1e-3, 1000, {});
  const PhasePoint r = back.states.back();
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(r.x()[i], kP0.x()[i], 1e-9);
    EXPECT_NEAR(-r.p()[i], kP0.p()[i], 1e-9);
  }
}

TEST(Rk4, FreeParticleIsExact) {
  const PhasePoint start({0.5, -1.0}, {0.3, -0.7});
  const auto traj = integrate_rk4(kFree, start, 0.01, 500, {});
  for (std::size_t k = 0; k < traj.states.size(); k += 50) {
    const double t = traj.times[k];
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(traj.states[k].x()[i], start.x()[i] + t * start.p()[i], 1e-13);
      EXPECT_EQ(traj.states[k].p()[i], start.p()[i]);
    }
  }
}

TEST(Rk4, BlowUpTruncatesTrajectory) {
  const auto H = HamiltonianSpec::parse("quartic", "0.5*p1^2-0.25*x1^4", 1);
  const auto traj = integrate_rk4(H, PhasePoint({1.0}, {1.0}), 1e-3, 10000, {});
  EXPECT_EQ(traj.status, Trajectory::Status::blow_up);
  EXPECT_FALSE(traj.ok());
  EXPECT_LT(traj.states.size(), 10001u);
  EXPECT_FALSE(traj.message.empty());
}

TEST(Rk4, DomainErrorTruncatesTrajectory) {
  const auto H = HamiltonianSpec::parse("log", "0.5*p1^2+ln(x1)", 1);
  const auto traj = integrate_rk4(H, PhasePoint({1.0}, {-1.0}), 1e-2, 1000, {});
  EXPECT_EQ(traj.status, Trajectory::Status::domain_error);
  EXPECT_LT(traj.states.size(), 1001u);
  EXPECT_EQ(traj.states.size(), traj.times.size());
}

TEST(Rk4, RejectsBadStepping) {
  EXPECT_THROW(integrate_rk4(kH, kP0, 0.0, 10, {}), std::invalid_argument);
  EXPECT_THROW(integrate_rk4(kH, kP0, 1e-3, 0, {}), std::invalid_argument);
  EXPECT_THROW(integrate_rk4(kH, PhasePoint({1.0}, {1.0}), 1e-3, 10, {}), DimensionError);
}

TEST(Rk4, ConservedWatchesStayWithinDriftBound) {
  // any watch with rho_H(Q) = 0 along the run drifts by at most 1e-8
  const std::vector<NamedExpression> watch{{"p2", parse("p2", 2)},
                                           {"p2sq", parse("p2^2+sin(p2)", 2)},
                                           {"Hp2", parse("p2*(p1^2+(p1*x1+p2)^2)", 2)}};
  const auto traj = integrate_rk4(kH, kP0, 1e-3, 10000, watch);
  for (const auto& d : drift_report(traj)) EXPECT_LE(d.max_drift, 1e-8) << d.name;
}

TEST(Geodesic, Examples) {
  EXPECT_LT(max_abs(geodesic_residual(kH, kP0)), 1e-9);
  for (const auto& P : testsupport::planar_points()) EXPECT_LT(max_abs(geodesic_residual(kH, P)), 1e-8);
  EXPECT_EQ(max_abs(geodesic_residual(kFree, PhasePoint({3, 1}, {-2, 0.5}))), 0.0);
}

TEST(Berwald, EqualsDynamicalDerivativeAlongHorizontalFlow) {
  const std::vector<VectorFieldSpec> fields{
      VectorFieldSpec::coordinate(2, 2), VectorFieldSpec::coordinate(2, 3), VectorFieldSpec::coordinate(2, 0),
      hamiltonian_field_spec(kH), VectorFieldSpec::parse(2, {"x1*p2", "p1^2"}, {"x2", "x1*p1*p2"})};
  for (const auto& Y : fields) {
    for (const auto& P : testsupport::planar_points()) {
      const auto r = berwald_vs_nabla(kH, Y, P);
      EXPECT_LT(max_abs(r), 1e-8);
    }
  }
}

TEST(Berwald, FreeParticlePolynomialFields) {
  testsupport::ExprGen gen(2, 77);
  for (int k = 0; k < 10; ++k) {
    const VectorFieldSpec Y(2, {gen.expr(2), gen.expr(2)}, {gen.expr(2), gen.expr(2)});
    for (const auto& P : testsupport::box_points(2, -1, 1, 10, k)) {
      EXPECT_LT(max_abs(berwald_vs_nabla(kFree, Y, P)), 1e-10);
    }
  }
}

TEST(Berwald, RefusesWithoutHorizontality) {
  const auto H = HamiltonianSpec::parse("warped", "0.5*exp(x2)*p1^2+0.5*(1+x1^2)*p2^2+x1*p1*p2+sin(x2)", 2);
  EXPECT_THROW(berwald_vs_nabla(H, VectorFieldSpec::coordinate(2, 2), kP0), HypothesisError);
}
