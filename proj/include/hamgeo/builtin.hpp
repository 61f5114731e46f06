#pragma once

// Reference systems shipped with the library: the planar control-affine
// example with generators (1, 0) and (x1, 1), and the free particle.

#include <string>
#include <vector>

#include "hamgeo/expr.hpp"
#include "hamgeo/phase_point.hpp"

namespace hamgeo::builtin {

inline constexpr const char* kPlanarHamiltonian = "0.5*(p1^2+(p1*x1+p2)^2)";
inline constexpr const char* kFreeParticle = "0.5*(p1^2+p2^2)";

inline ControlAffineSystem planar_control_system() {
  return {2, {{parse("1", 2), parse("0", 2)}, {parse("x1", 2), parse("1", 2)}}};
}

inline HamiltonianSpec planar_hamiltonian() { return HamiltonianSpec::parse("paper-example", kPlanarHamiltonian, 2); }

inline HamiltonianSpec free_particle() { return HamiltonianSpec::parse("free-particle", kFreeParticle, 2); }

/// Start of the reference trajectory.
inline PhasePoint planar_start() { return PhasePoint({1.0, 0.0}, {1.0, 1.0}); }

}  // namespace hamgeo::builtin
