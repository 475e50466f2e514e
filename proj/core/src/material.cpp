#include "mtlab/material.hpp"

#include <cmath>

namespace mtlab {

double Bump::value(const Vec3& x) const {
  const Vec3 d = x - center;
  const double s = dot(d, d) / (radius * radius);
  if (s >= 1.0) return 0.0;
  const double t = 1.0 - s;
  return amplitude * t * t * t;
}

Vec3 Bump::gradient(const Vec3& x) const {
  const Vec3 d = x - center;
  const double r2 = radius * radius;
  const double s = dot(d, d) / r2;
  if (s >= 1.0) return {0.0, 0.0, 0.0};
  const double t = 1.0 - s;
  // d/dx A t³ = -3A t² * 2 d / r²
  return (-6.0 * amplitude * t * t / r2) * d;
}

std::array<double, 9> Bump::hessian(const Vec3& x) const {
  std::array<double, 9> H{};
  const Vec3 d = x - center;
  const double r2 = radius * radius;
  const double s = dot(d, d) / r2;
  if (s >= 1.0) return H;
  const double t = 1.0 - s;
  const double c1 = -6.0 * amplitude * t * t / r2;      // multiplies identity
  const double c2 = 24.0 * amplitude * t / (r2 * r2);   // multiplies d dᵀ
  for (int i = 0; i < 3; ++i) {
    H[4 * i] = c1;
    for (int j = 0; j < 3; ++j) H[3 * i + j] += c2 * d[i] * d[j];
  }
  return H;
}

MaterialModel::MaterialModel(double s0, double m0, std::vector<Bump> bs)
    : sigma0(s0), mu0(m0), bumps(std::move(bs)) {
  if (!(sigma0 > 0.0) || !(mu0 > 0.0))
    throw std::invalid_argument("MaterialModel: background sigma0 and mu0 must be positive");
  double neg_sigma = 0.0, neg_mu = 0.0;
  for (const auto& b : bumps) {
    if (!(b.radius > 0.0)) throw std::invalid_argument("MaterialModel: bump radius must be positive");
    support_radius = std::max(support_radius, norm2(b.center) + b.radius);
    if (b.amplitude < 0.0) (b.target == BumpTarget::Sigma ? neg_sigma : neg_mu) += b.amplitude;
  }
  // Conservative positivity screen; if overlapping negative bumps trip it,
  // fall back to dense sampling over the support before rejecting.
  if (sigma0 + neg_sigma <= 0.0 || mu0 + neg_mu <= 0.0) {
    const double R = support_radius;
    const int m = 48;
    double smin = sigma0, mmin = mu0;
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
          const Vec3 x{-R + 2.0 * R * i / (m - 1), -R + 2.0 * R * j / (m - 1),
                       -R + 2.0 * R * k / (m - 1)};
          smin = std::min(smin, sigma(x));
          mmin = std::min(mmin, mu(x));
        }
    if (smin <= 0.0 || mmin <= 0.0)
      throw std::invalid_argument(
          "MaterialModel: coefficients must stay positive (sampled min sigma = " +
          std::to_string(smin) + ", min mu = " + std::to_string(mmin) + ")");
  }
}

double MaterialModel::sigma(const Vec3& x) const {
  double v = sigma0;
  for (const auto& b : bumps)
    if (b.target == BumpTarget::Sigma) v += b.value(x);
  return v;
}

double MaterialModel::mu(const Vec3& x) const {
  double v = mu0;
  for (const auto& b : bumps)
    if (b.target == BumpTarget::Mu) v += b.value(x);
  return v;
}

Vec3 MaterialModel::grad_sigma(const Vec3& x) const {
  Vec3 g{0.0, 0.0, 0.0};
  for (const auto& b : bumps)
    if (b.target == BumpTarget::Sigma) g = g + b.gradient(x);
  return g;
}

Vec3 MaterialModel::grad_mu(const Vec3& x) const {
  Vec3 g{0.0, 0.0, 0.0};
  for (const auto& b : bumps)
    if (b.target == BumpTarget::Mu) g = g + b.gradient(x);
  return g;
}

std::array<double, 9> MaterialModel::hess_sigma(const Vec3& x) const {
  std::array<double, 9> H{};
  for (const auto& b : bumps)
    if (b.target == BumpTarget::Sigma) {
      auto Hb = b.hessian(x);
      for (int i = 0; i < 9; ++i) H[i] += Hb[i];
    }
  return H;
}

std::array<double, 9> MaterialModel::hess_mu(const Vec3& x) const {
  std::array<double, 9> H{};
  for (const auto& b : bumps)
    if (b.target == BumpTarget::Mu) {
      auto Hb = b.hessian(x);
      for (int i = 0; i < 9; ++i) H[i] += Hb[i];
    }
  return H;
}

Vec3 MaterialModel::grad_alpha(const Vec3& x) const { return (1.0 / sigma(x)) * grad_sigma(x); }
Vec3 MaterialModel::grad_beta(const Vec3& x) const { return (1.0 / mu(x)) * grad_mu(x); }

// hess(log f) = hess(f)/f - grad(f) grad(f)ᵀ / f²
static std::array<double, 9> log_hessian(double f, const Vec3& gf, const std::array<double, 9>& Hf) {
  std::array<double, 9> H{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) H[3 * i + j] = Hf[3 * i + j] / f - gf[i] * gf[j] / (f * f);
  return H;
}

std::array<double, 9> MaterialModel::hess_alpha(const Vec3& x) const {
  return log_hessian(sigma(x), grad_sigma(x), hess_sigma(x));
}
std::array<double, 9> MaterialModel::hess_beta(const Vec3& x) const {
  return log_hessian(mu(x), grad_mu(x), hess_mu(x));
}

ScalarField3 MaterialModel::sigma_field(const Grid3& g) const {
  return ScalarField3::sample(g, [&](const Vec3& x) { return cplx(sigma(x)); });
}

ScalarField3 MaterialModel::mu_field(const Grid3& g) const {
  return ScalarField3::sample(g, [&](const Vec3& x) { return cplx(mu(x)); });
}

}  // namespace mtlab
