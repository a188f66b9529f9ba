#pragma once

// Closed-form reference for the separable test geometry: a horizontal
// delta line at height h0 in a Dirichlet-Dirichlet strip of width d. The
// ground state does not depend on x, so it solves a 1D transcendental
// equation that is located here by bisection.

namespace rdl {

struct SeparableLineRoot {
  double k = 0.0;       // wavenumber; imaginary part when energy < 0
  double energy = 0.0;  // k^2, or -kappa^2 below zero
};

/// Root of k (cot(k h0) + cot(k (d - h0))) = sigma on the ground branch.
/// For sigma above d / (h0 (d - h0)) the ground energy is negative and the
/// hyperbolic equation kappa (coth(kappa h0) + coth(kappa (d - h0))) = sigma
/// is solved instead.
SeparableLineRoot separable_line_ground_state(double width, double height, double sigma);

}  // namespace rdl
