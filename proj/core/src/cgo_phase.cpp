#include <cmath>
#include <complex>
#include <stdexcept>

#include "mtlab/cgo.hpp"

namespace mtlab::cgo {

namespace {

void require_unit(const Vec3& v, const char* name) {
  if (std::abs(norm2(v) - 1.0) > 1e-12)
    throw std::invalid_argument(std::string("build_phase_pair: ") + name + " must be a unit vector");
}

void require_orthogonal(const Vec3& u, const Vec3& v, const char* what) {
  const double scale = 1.0 + norm2(u) * norm2(v);
  if (std::abs(dot(u, v)) > 1e-12 * scale)
    throw std::invalid_argument(std::string("build_phase_pair: ") + what +
                                " must be orthogonal (geometry violation)");
}

}  // namespace

CVec3 PhasePair::remainder(int member) const {
  const CVec3 z = (member == 1) ? zeta1 : zeta2;
  const CVec3 lead = cplx(tau) * rho();
  return z - lead;
}

CVec3 PhasePair::effective_zeta(int member) const {
  if (member == 1) return zeta1;
  return cplx(-1.0) * zeta2;
}

CVec3 PhasePair::effective_rho(int member) const {
  return (member == 1) ? rho() : cplx(-1.0) * rho();
}

Vec3 PhasePair::effective_rho1(int member) const {
  return (member == 1) ? rho1 : Vec3{-rho1[0], -rho1[1], -rho1[2]};
}

Vec3 PhasePair::effective_rho2(int member) const {
  return (member == 1) ? rho2 : Vec3{-rho2[0], -rho2[1], -rho2[2]};
}

PhasePair build_phase_pair(const Vec3& xi, const Vec3& rho1, const Vec3& rho2, double tau,
                           double omega, double sigma0, double mu0) {
  require_unit(rho1, "rho1");
  require_unit(rho2, "rho2");
  require_orthogonal(rho1, rho2, "rho1 and rho2");
  require_orthogonal(rho1, xi, "rho1 and xi");
  require_orthogonal(rho2, xi, "rho2 and xi");
  if (!(tau > 0.0)) throw std::invalid_argument("build_phase_pair: tau must be positive");
  if (!(sigma0 > 0.0) || !(mu0 > 0.0))
    throw std::invalid_argument("build_phase_pair: background sigma0, mu0 must be positive");

  const double xi2 = dot(xi, xi);
  if (!(1.0 - xi2 / (4.0 * tau * tau) > 0.0))
    throw std::invalid_argument("build_phase_pair: tau too small, need |xi| < 2 tau");

  PhasePair p;
  p.xi = xi;
  p.rho1 = rho1;
  p.rho2 = rho2;
  p.tau = tau;
  p.omega = omega;
  p.sigma0 = sigma0;
  p.mu0 = mu0;

  // tau * sqrt(1 - |xi|^2/4tau^2 + i omega sigma0 mu0 / tau^2), principal branch.
  const cplx root =
      tau * std::sqrt(cplx(1.0 - xi2 / (4.0 * tau * tau), omega * sigma0 * mu0 / (tau * tau)));

  for (int d = 0; d < 3; ++d) {
    const cplx common = cplx(0.0, tau) * rho2[d] + root * rho1[d];
    p.zeta1[d] = cplx(0.5 * xi[d]) + common;
    p.zeta2[d] = cplx(-0.5 * xi[d]) + common;
  }
  return p;
}

void frame_for_xi(const Vec3& xi, Vec3& rho1, Vec3& rho2) {
  const double len = norm2(xi);
  if (len < 1e-14) {
    rho1 = {1.0, 0.0, 0.0};
    rho2 = {0.0, 1.0, 0.0};
    return;
  }
  const Vec3 hat = (1.0 / len) * xi;
  // Seed with the coordinate axis least aligned with xi, Gram-Schmidt it.
  int seed = 0;
  double best = std::abs(hat[0]);
  for (int d = 1; d < 3; ++d)
    if (std::abs(hat[d]) < best) {
      best = std::abs(hat[d]);
      seed = d;
    }
  Vec3 e{0.0, 0.0, 0.0};
  e[seed] = 1.0;
  Vec3 r1 = e - dot(e, hat) * hat;
  r1 = (1.0 / norm2(r1)) * r1;
  rho1 = r1;
  rho2 = cross(hat, r1);
}

}  // namespace mtlab::cgo
