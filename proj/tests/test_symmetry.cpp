#include <gtest/gtest.h>

#include <cmath>

#include "hamgeo/acceptance.hpp"
#include "hamgeo/symmetry.hpp"
#include "support.hpp"

using namespace hamgeo;
using testsupport::kP0;
using testsupport::max_abs;

namespace {

const HamiltonianSpec kH = builtin::planar_hamiltonian();
const HamiltonianSpec kFree = builtin::free_particle();

VectorFieldSpec field(std::vector<std::string> xs, std::vector<std::string> ps) {
  return VectorFieldSpec::parse(2, xs, ps);
}

BaseVectorFieldSpec base(std::vector<std::string> xs) { return BaseVectorFieldSpec::parse(2, xs); }

const VectorFieldSpec kRho = hamiltonian_field_spec(kH);
const VectorFieldSpec kP2dx2 = field({"0", "p2"}, {"0", "0"});

}  // namespace

TEST(LieBracket, Examples) {
  const auto X = field({"x1*p2", "sin(p1)"}, {"x2^2", "p1*p2"});
  EXPECT_EQ(max_abs(lie_bracket(X, X, kP0)), 0.0);
  const auto b = lie_bracket(field({"1", "0"}, {"0", "0"}), field({"x1", "0"}, {"0", "0"}), PhasePoint({0.3, 2}, {1, 5}));
  EXPECT_EQ(b, (std::vector<double>{1, 0, 0, 0}));
  for (const auto& P : testsupport::planar_points()) EXPECT_LT(max_abs(lie_bracket(kRho, kP2dx2, P)), 1e-12);
}

TEST(LieBracket, AntisymmetricAndBilinear) {
  testsupport::ExprGen gen(2, 21);
  for (int k = 0; k < 20; ++k) {
    const VectorFieldSpec X(2, {gen.expr(2), gen.expr(2)}, {gen.expr(2), gen.expr(2)});
    const VectorFieldSpec Y(2, {gen.expr(2), gen.expr(2)}, {gen.expr(2), gen.expr(2)});
    const VectorFieldSpec Z(2, {gen.expr(2), gen.expr(2)}, {gen.expr(2), gen.expr(2)});
    std::vector<Expression> ys, zs;
    for (std::size_t a = 0; a < 4; ++a) ys.push_back(Y.component(a) + Expression::constant(2.0) * Z.component(a));
    const VectorFieldSpec YZ(2, {ys[0], ys[1]}, {ys[2], ys[3]});
    for (const auto& P : testsupport::box_points(2, -1, 1, 5, k)) {
      const auto xy = lie_bracket(X, Y, P), yx = lie_bracket(Y, X, P);
      const auto xz = lie_bracket(X, Z, P), xyz = lie_bracket(X, YZ, P);
      for (std::size_t a = 0; a < 4; ++a) {
        EXPECT_EQ(xy[a], -yx[a]);
        EXPECT_NEAR(xyz[a], xy[a] + 2 * xz[a], 1e-10 * std::max(1.0, std::fabs(xyz[a])));
      }
    }
  }
}

TEST(SymmetryResidual, Examples) {
  for (const auto& P : testsupport::planar_points()) {
    EXPECT_LT(max_abs(symmetry_residual(kH, kP2dx2, P)), 1e-12);
    EXPECT_LT(max_abs(symmetry_residual(kH, kRho, P)), 1e-12);
  }
  const auto r = symmetry_residual(kH, field({"1", "0"}, {"0", "0"}), kP0);
  EXPECT_DOUBLE_EQ(r[0], -3.0);
  EXPECT_DOUBLE_EQ(r[1], -1.0);
  EXPECT_THROW(symmetry_residual(kH, VectorFieldSpec::zero(3), kP0), DimensionError);
}

TEST(NewtonoidResidual, Examples) {
  for (const auto& P : testsupport::planar_points()) EXPECT_LT(max_abs(newtonoid_residual(kH, kP2dx2, P)), 1e-12);
  EXPECT_EQ(max_abs(newtonoid_residual(kH, VectorFieldSpec::zero(2), kP0)), 0.0);
  // g_lower [[1,-1],[-1,2]] times the x-part (-3,-1) of the bracket
  const auto r = newtonoid_residual(kH, field({"1", "0"}, {"0", "0"}), kP0);
  EXPECT_DOUBLE_EQ(r[0], -2.0);
  EXPECT_DOUBLE_EQ(r[1], 1.0);
}

TEST(NewtonoidResidual, EverySymmetryIsNewtonoid) {
  // symmetries: p2 d/dx2, rho_H, their combinations, and the lift of d/dx2
  const std::vector<VectorFieldSpec> fields{kP2dx2, kRho, complete_lift(base({"0", "1"})),
                                            field({"0", "3*p2+1"}, {"0", "0"})};
  for (const auto& X : fields) {
    for (const auto& P : testsupport::planar_points()) {
      if (max_abs(symmetry_residual(kH, X, P)) < 1e-10) {
        EXPECT_LT(max_abs(newtonoid_residual(kH, X, P)), 1e-9);
      }
    }
  }
}

TEST(NewtonoidLift, Examples) {
  EXPECT_EQ(newtonoid_lift(kH, {parse("0", 2), parse("p2", 2)}, kP0), (std::vector<double>{0, 1, 0, 0}));
  EXPECT_EQ(max_abs(newtonoid_lift(kH, {parse("0", 2), parse("0", 2)}, kP0)), 0.0);
  const auto f = newtonoid_lift(kFree, {parse("2", 2), parse("-1", 2)}, PhasePoint({3, 1}, {0.5, 2}));
  EXPECT_EQ(f, (std::vector<double>{2, -1, 0, 0}));
}

TEST(NewtonoidLift, LiftIsNewtonoidAndSatisfiesInvariantForm) {
  testsupport::ExprGen gen(2, 31);
  for (int k = 0; k < 10; ++k) {
    const std::vector<Expression> xs{gen.expr(2), gen.expr(2)};
    for (const auto& P : testsupport::planar_points(10, k)) {
      const LocalGeometry geo(kH, P, 2);
      std::vector<LocalField> fs{jet_lift(xs[0], P, 2), jet_lift(xs[1], P, 2)};
      const auto lifted = newtonoid_lift(geo, fs);
      EXPECT_LT(max_abs(newtonoid_residual(geo, lifted)), 1e-9 * std::max(1.0, max_abs(lifted.values())));
      EXPECT_LT(max_abs(newtonoid_invariant_residual(geo, lifted)), 1e-9 * std::max(1.0, max_abs(lifted.values())));
    }
  }
}

TEST(NewtonoidInvariant, ZeroAndVerticalFields) {
  EXPECT_EQ(max_abs(newtonoid_invariant_residual(kH, VectorFieldSpec::zero(2), kP0)), 0.0);
  // a vertical field is not Newtonoid here: v(X) = X but J_H(nabla X) differs
  EXPECT_GT(max_abs(newtonoid_invariant_residual(kH, field({"0", "0"}, {"1", "0"}), kP0)), 0.1);
}

TEST(CompleteLift, Examples) {
  const auto a = complete_lift(base({"0", "1"}));
  EXPECT_EQ(print(a.x_components[1]), "1");
  EXPECT_EQ(print(a.p_components[0]), "0");
  EXPECT_EQ(print(a.p_components[1]), "0");

  const auto b = complete_lift(base({"x1", "0"}));
  const PhasePoint Q({0.7, -0.4}, {1.3, 2.1});
  const auto vb = model(b, Q, 0).values();
  EXPECT_EQ(vb, (std::vector<double>{0.7, 0, -1.3, 0}));

  const auto c = complete_lift(base({"x2", "0"}));
  const auto vc = model(c, Q, 0).values();
  EXPECT_EQ(vc, (std::vector<double>{-0.4, 0, 0, -1.3}));
  EXPECT_EQ(max_abs(liouville_lie_derivative(b, Q)), 0.0);
  EXPECT_EQ(max_abs(liouville_lie_derivative(c, Q)), 0.0);
}

TEST(CompleteLift, PreservesLiouvilleFormOnPolynomialCorpus) {
  const auto pts = testsupport::box_points(2, -2, 2, 50, 41);
  for (const auto& Xt : acceptance::polynomial_base_fields()) {
    const auto lift = complete_lift(Xt);
    for (const auto& P : pts) EXPECT_LT(max_abs(liouville_lie_derivative(lift, P)), 1e-10);
  }
}

TEST(CompleteLift, PrintedPlusSignBreaksLiouvilleForm) {
  const auto lift = complete_lift(base({"x1^2", "x1*x2"}), LiftSign::plus);
  EXPECT_GT(max_abs(liouville_lie_derivative(lift, kP0)), 1.0);
  acceptance::Options o;
  o.lift_sign = LiftSign::plus;
  EXPECT_FALSE(acceptance::complete_lift_invariance(o).pass());
  EXPECT_TRUE(acceptance::complete_lift_invariance(acceptance::Options{}).pass());
}

TEST(NaturalSymmetry, Examples) {
  for (const auto& P : testsupport::planar_points(30)) {
    EXPECT_EQ(max_abs(natural_symmetry_residual(kH, base({"0", "1"}), P)), 0.0);
    EXPECT_EQ(max_abs(natural_symmetry_residual(kFree, base({"2.5", "-1"}), P)), 0.0);
  }
  EXPECT_GT(max_abs(natural_symmetry_residual(kH, base({"x1", "0"}), kP0)), 0.1);
}

TEST(Noether, Examples) {
  for (const auto& P : testsupport::planar_points()) {
    const auto r = noether_residual(kH, kRho, P);
    EXPECT_LT(max_abs(r.lie_omega), 1e-10);
    EXPECT_LT(std::fabs(r.x_of_h), 1e-10);
    const auto d = noether_residual(kH, field({"0", "1"}, {"0", "0"}), P);
    EXPECT_EQ(max_abs(d.lie_omega), 0.0);
    EXPECT_EQ(d.x_of_h, 0.0);
  }
  const auto s = noether_residual(kH, field({"x1", "0"}, {"0", "0"}), kP0);
  EXPECT_DOUBLE_EQ(max_abs(s.lie_omega), 1.0);
}

TEST(Noether, LieOmegaIsAntisymmetric) {
  testsupport::ExprGen gen(2, 51);
  for (int k = 0; k < 20; ++k) {
    const VectorFieldSpec X(2, {gen.expr(3), gen.expr(3)}, {gen.expr(3), gen.expr(3)});
    const auto r = noether_residual(kH, X, PhasePoint({0.2, -0.3}, {0.9, 1.4}));
    EXPECT_EQ(max_abs(r.lie_omega + r.lie_omega.transpose()), 0.0);
  }
}

TEST(InvariantEquation, Examples) {
  for (const auto& P : testsupport::planar_points(20)) {
    EXPECT_LT(max_abs(invariant_equation_residual(kH, kP2dx2, P)), 1e-8);
  }
  EXPECT_EQ(max_abs(invariant_equation_residual(kH, VectorFieldSpec::zero(2), kP0)), 0.0);
}

TEST(InvariantEquation, FlatReduction) {
  // N = Phi = 0: the residual is rho_H(rho_H(g_ij X^i)) = rho_H(rho_H(x1)) = 0
  // for X = x1 d/dx1, and p1 p2 for X = x1 x2 d/dx1 (g = I).
  for (const auto& P : testsupport::box_points(2, -1, 1, 20, 61)) {
    EXPECT_EQ(max_abs(invariant_equation_residual(kFree, field({"x1", "0"}, {"0", "0"}), P)), 0.0);
    const auto r = invariant_equation_residual(kFree, field({"x1*x2", "0"}, {"0", "0"}), P);
    EXPECT_NEAR(r[0], 2 * P.p()[0] * P.p()[1], 1e-14);
    EXPECT_EQ(r[1], 0.0);
  }
}

TEST(InvariantEquation, FollowsFromSymmetryAndNewtonoid) {
  const std::vector<VectorFieldSpec> fields{kP2dx2, kRho, field({"0", "p2^2"}, {"0", "0"})};
  for (const auto& X : fields) {
    for (const auto& P : testsupport::planar_points(30)) {
      if (max_abs(symmetry_residual(kH, X, P)) < 1e-10 && max_abs(newtonoid_residual(kH, X, P)) < 1e-9) {
        EXPECT_LT(max_abs(invariant_equation_residual(kH, X, P)), 1e-8);
      }
    }
  }
}

TEST(StarProduct, Examples) {
  const auto X = field({"x1", "p1"}, {"x2", "0"});
  const auto one = star_product(parse("1", 2), X, kH, kP0);
  const LocalGeometry geo(kH, kP0, 1);
  const auto jb = geo.tangent_structure(bracket(geo.rho(), model(X, kP0, 1))).values();
  const auto xv = model(X, kP0, 0).values();
  for (std::size_t a = 0; a < 4; ++a) EXPECT_NEAR(one[a], xv[a] + jb[a], 1e-14);

  EXPECT_EQ(max_abs(star_product(parse("0", 2), X, kH, kP0)), 0.0);

  // Newtonoid X: the middle term drops out
  const auto f = parse("x1*p2+1", 2);
  for (const auto& P : testsupport::planar_points(20)) {
    const auto s = star_product(f, kP2dx2, kH, P);
    const LocalGeometry g(kH, P, 1);
    const double fv = evaluate(f, P);
    const double rf = g.along_rho(jet_lift(f, P, 1)).value();
    const auto jx = g.tangent_structure(model(kP2dx2, P, 0)).values();
    const auto x = model(kP2dx2, P, 0).values();
    for (std::size_t a = 0; a < 4; ++a) EXPECT_NEAR(s[a], fv * x[a] + rf * jx[a], 1e-12);
  }
}

TEST(InvariantVectorField, Examples) {
  EXPECT_EQ(invariant_vector_field_check(kH, base({"0", "1"}), kP0), 0.0);
  EXPECT_EQ(invariant_vector_field_check(kFree, base({"3", "-2"}), kP0), 0.0);
  EXPECT_DOUBLE_EQ(invariant_vector_field_check(kH, base({"1", "0"}), kP0), 2.0);
}

TEST(MomentumMap, Examples) {
  const PhasePoint Q({0.4, 1.0}, {-0.3, 0.8});
  EXPECT_EQ(momentum_map(base({"0", "1"}), Q), 0.8);
  EXPECT_EQ(momentum_map(base({"0", "0"}), Q), 0.0);
  EXPECT_EQ(momentum_map(base({"x1", "0"}), kP0), 1.0);
}

TEST(NoetherFromConservation, Examples) {
  const auto a = noether_from_conservation(parse("p2", 2), kH, kP0);
  EXPECT_EQ(a.values, (std::vector<double>{0, 1, 0, 0}));
  EXPECT_EQ(max_abs(a.residual.lie_omega), 0.0);
  EXPECT_EQ(a.residual.x_of_h, 0.0);
  EXPECT_EQ(a.rho_f, 0.0);
  EXPECT_EQ(a.conservation_value, 0.0);

  for (const auto& P : testsupport::planar_points(20)) {
    const auto h = noether_from_conservation(kH.expr, kH, P);
    const auto rho = hamiltonian_vector_field(kH, P);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(h.values[i], rho.xi[i], 1e-12);
      EXPECT_NEAR(h.values[2 + i], rho.chi[i], 1e-12);
    }
  }

  const auto c = noether_from_conservation(parse("4", 2), kH, kP0);
  EXPECT_EQ(max_abs(c.values), 0.0);
  EXPECT_EQ(c.conservation_value, 4.0);
}

TEST(NoetherFromConservation, ConservedQuantitiesGiveConservedDifferences) {
  // p2, H and functions of them are conserved on the planar example
  for (const char* text : {"p2", "0.5*(p1^2+(p1*x1+p2)^2)", "p2^3+sin(p2)", "p2*(p1^2+(p1*x1+p2)^2)"}) {
    for (const auto& P : testsupport::planar_points(30)) {
      const auto r = noether_from_conservation(parse(text, 2), kH, P);
      EXPECT_LT(std::fabs(r.rho_f), 1e-10) << text;
      EXPECT_LT(std::fabs(r.rho_conservation), 1e-10) << text;
      EXPECT_LT(max_abs(r.residual.lie_omega), 1e-10) << text;
      EXPECT_LT(std::fabs(r.residual.x_of_h), 1e-10) << text;
    }
  }
}
