#pragma once

// Shared spectral plumbing for the complex-frequency solvers. Fields marked
// "_w" live in the demodulated representation u(x) e^{-i delta.x} with delta
// the half-shifted lattice offset of the box, so every multiplier below is
// evaluated at kappa = k + delta and never meets the zero of the symbol at
// the origin.

#include "mtlab/cgo.hpp"

namespace mtlab::cgo::detail {

inline cplx conjugated_symbol(const Vec3& kappa, const CVec3& zeta) {
  return cplx(dot(kappa, kappa)) +
         2.0 * (zeta[0] * kappa[0] + zeta[1] * kappa[1] + zeta[2] * kappa[2]);
}

inline double zeta_norm(const CVec3& z) {
  return std::sqrt(std::norm(z[0]) + std::norm(z[1]) + std::norm(z[2]));
}

CField conj_inverse_w(const PeriodicBox& box, const CVec3& zeta, const CField& w, double floor_abs,
                      std::size_t* hits);
CField conj_forward_w(const PeriodicBox& box, const CVec3& zeta, const CField& w);
CField dzeta_w(const PeriodicBox& box, const CVec3& zeta, const CField& w, int axis);
CField3 curl_zeta_w(const PeriodicBox& box, const CVec3& zeta, const CField3& w);

double box_weighted_norm(const PeriodicBox& box, const CField& f, double delta, bool shifted);
double box_weighted_norm(const PeriodicBox& box, const CField3& f, double delta, bool shifted);

}  // namespace mtlab::cgo::detail
