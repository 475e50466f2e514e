#pragma once

#include <vector>

#include "mtlab/field.hpp"

namespace mtlab {

// Conductivity / permeability model: positive constants sigma0, mu0 plus a
// sum of C² ball bumps  A * (1 - |x-c|²/R²)³  on |x-c| < R. Everything is
// analytic, so first and second derivatives are evaluated in closed form
// rather than by stencils.

enum class BumpTarget { Sigma, Mu };

struct Bump {
  Vec3 center{0.0, 0.0, 0.0};
  double radius = 1.0;
  double amplitude = 0.0;
  BumpTarget target = BumpTarget::Sigma;

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  std::array<double, 9> hessian(const Vec3& x) const;  // row-major 3x3
};

struct MaterialModel {
  double sigma0 = 1.0;
  double mu0 = 1.0;
  std::vector<Bump> bumps;
  double support_radius = 0.0;  // sigma-sigma0 and mu-mu0 vanish outside B(0, support_radius)

  MaterialModel() = default;
  MaterialModel(double s0, double m0, std::vector<Bump> bs);

  double sigma(const Vec3& x) const;
  double mu(const Vec3& x) const;
  Vec3 grad_sigma(const Vec3& x) const;
  Vec3 grad_mu(const Vec3& x) const;
  std::array<double, 9> hess_sigma(const Vec3& x) const;
  std::array<double, 9> hess_mu(const Vec3& x) const;

  // log-material helpers: alpha = log sigma, beta = log mu
  double alpha(const Vec3& x) const { return std::log(sigma(x)); }
  double beta(const Vec3& x) const { return std::log(mu(x)); }
  Vec3 grad_alpha(const Vec3& x) const;
  Vec3 grad_beta(const Vec3& x) const;
  std::array<double, 9> hess_alpha(const Vec3& x) const;
  std::array<double, 9> hess_beta(const Vec3& x) const;

  ScalarField3 sigma_field(const Grid3& g) const;
  ScalarField3 mu_field(const Grid3& g) const;

  bool is_constant() const { return bumps.empty(); }
};

}  // namespace mtlab
