#pragma once

#include "mtlab/cgo.hpp"
#include "mtlab/field.hpp"
#include "mtlab/identity.hpp"
#include "mtlab/material.hpp"

namespace mtlab::mirror {

// Reflection across the plane {x3 = 0}:
//   scalar   beta*(x)  = beta(x1, x2, -x3)
//   vector   X*(x)     = (X1(x1,x2,-x3), X2(x1,x2,-x3), -X3(x1,x2,-x3))
// realized as index maps on grids whose node set is symmetric under
// x3 -> -x3 (center at zero; any node count). The three algebraic rules
//   grad beta* = (grad beta)*, (beta X)* = beta* X*, curl X* = -(curl X)*
// then hold with the discrete stencils exactly as with derivatives.
ScalarField3 reflect(const ScalarField3& f);
VectorField3 reflect(const VectorField3& f);

// Node layer sitting on the plane; requires odd n3 (throws otherwise).
std::size_t plane_layer(const Grid3& g);

// Largest modulus of the tangential (x1, x2) components over the plane layer.
double plane_tangential_sup(const VectorField3& f);

// Mirror-symmetrized material: every bump strictly below the plane gains its
// mirror image, bumps centered on the plane stay single. A bump that crosses
// the plane without being centered on it cannot be extended evenly.
MaterialModel even_extension(const MaterialModel& m);

// ---------------------------------------------------------------------------
// Reflected CGO field  H = H~ - H~*  for an even material. The tangential
// components of H~ and H~* agree on the plane, so the combined field has
// vanishing tangential trace there while still solving the same curl-curl
// equation (evenness of the coefficients is what lets the reflected copy
// solve it too).
// ---------------------------------------------------------------------------
struct ReflectedField {
  VectorField3 original;
  VectorField3 reflected;
  VectorField3 combined;  // original - reflected
  double trace_sup = 0.0;         // sup of |tangential(combined)| on the plane
  double combined_sup = 0.0;      // sup of |combined| over the grid
  double curlcurl_residual = 0.0;       // of combined
  double base_curlcurl_residual = 0.0;  // of the unreflected solution
};

// Builds the CGO solution for (m, pair, member), trims the periodic view
// down to the symmetric node grid (dropping the wrap layer), and assembles
// the reflected combination. Requires rho1 with a nonzero third component,
// rho2 tangent to the plane, an even material and even opts.n.
ReflectedField build_reflected_cgo(const MaterialModel& m, const cgo::PhasePair& pair, int member,
                                   const cgo::CgoOptions& opts = {});

// ---------------------------------------------------------------------------
// Phase bookkeeping of the reflected products. With zeta* the reflected
// phase vector, the cross terms oscillate with
//   i(zeta1 - zeta2*).x = i xi_tilde_plus.x  - 2 tau rho_{2,3} x3 - eta_plus(x3)
//   i(zeta1* - zeta2).x = i xi_tilde_minus.x + 2 tau rho_{2,3} x3 - eta_minus(x3)
// where
//   xi_tilde_{+-} = (xi1, xi2, +-2 tau sqrt(1 - |xi|^2/(4 tau^2)) rho_{1,3})
//   eta_{+-}(x3)  = +-2 omega sigma0 mu0 rho_{1,3} x3
//                   / [tau (sqrt(1 - |xi|^2/4tau^2 + i omega sigma0 mu0/tau^2)
//                        + sqrt(1 - |xi|^2/4tau^2))]
// an exact rearrangement (assertable to rounding), with |eta| = O(1/tau) and
// |xi_tilde| ~ 2 tau driving the cross terms to zero.
// ---------------------------------------------------------------------------
struct PhaseSplit {
  Vec3 xi{};
  Vec3 xi_star{};        // (xi1, xi2, -xi3)
  Vec3 xi_tilde_plus{};
  Vec3 xi_tilde_minus{};
  cplx eta_plus_coeff{};   // eta_plus(x3)  = eta_plus_coeff  * x3
  cplx eta_minus_coeff{};  // eta_minus(x3) = eta_minus_coeff * x3
  double real_exponent_plus = 0.0;   // coefficient of x3: -2 tau rho_{2,3}
  double real_exponent_minus = 0.0;  // coefficient of x3: +2 tau rho_{2,3}

  cplx eta_plus(double x3) const { return eta_plus_coeff * x3; }
  cplx eta_minus(double x3) const { return eta_minus_coeff * x3; }
};

PhaseSplit phase_split(const cgo::PhasePair& pair);

// ---------------------------------------------------------------------------
// The pairing of integral_identity restricted to the lower half {x3 <= 0},
// for fields whose tangential traces vanish on the plane. The leakage of
// both inputs is measured first; inputs violating the 1e-2 relative bound
// are rejected with the measured value in the message.
// ---------------------------------------------------------------------------
identity::IdentityReport local_integral_identity(const MaterialModel& m1, const MaterialModel& m2,
                                                 const VectorField3& H1, const VectorField3& H2,
                                                 double omega);

}  // namespace mtlab::mirror
