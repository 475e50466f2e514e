#include "mtlab/norms.hpp"

#include <cmath>

namespace mtlab {

double trapezoid_weight(const Grid3& g, std::size_t i, std::size_t j, std::size_t k) {
  double w = g.spacing(0) * g.spacing(1) * g.spacing(2);
  if (i == 0 || i == g.n[0] - 1) w *= 0.5;
  if (j == 0 || j == g.n[1] - 1) w *= 0.5;
  if (k == 0 || k == g.n[2] - 1) w *= 0.5;
  return w;
}

namespace {

template <typename Norm2AtIndex>
double weighted_norm_impl(const Grid3& g, const WeightedNormParams& p, Norm2AtIndex norm2_at) {
  p.validate();
  const double dexp = p.shifted ? p.delta + 1.0 : p.delta;
  double acc = 0.0;
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) {
        const Vec3 x = g.point(i, j, k);
        const double w = trapezoid_weight(g, i, j, k) * std::pow(1.0 + dot(x, x), dexp);
        acc += w * norm2_at(g.index(i, j, k));
      }
  return std::sqrt(acc);
}

}  // namespace

double weighted_norm(const ScalarField3& f, const WeightedNormParams& p) {
  return weighted_norm_impl(f.grid, p, [&](std::size_t m) { return std::norm(f.data[m]); });
}

double weighted_norm(const VectorField3& f, const WeightedNormParams& p) {
  return weighted_norm_impl(f.grid, p, [&](std::size_t m) {
    return std::norm(f.comp[0][m]) + std::norm(f.comp[1][m]) + std::norm(f.comp[2][m]);
  });
}

double l2_norm(const ScalarField3& f) {
  double acc = 0.0;
  const Grid3& g = f.grid;
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i)
        acc += trapezoid_weight(g, i, j, k) * std::norm(f.data[g.index(i, j, k)]);
  return std::sqrt(acc);
}

double l2_norm(const VectorField3& f) {
  double acc = 0.0;
  const Grid3& g = f.grid;
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) {
        const std::size_t m = g.index(i, j, k);
        acc += trapezoid_weight(g, i, j, k) *
               (std::norm(f.comp[0][m]) + std::norm(f.comp[1][m]) + std::norm(f.comp[2][m]));
      }
  return std::sqrt(acc);
}

cplx integrate(const ScalarField3& f) {
  cplx acc(0.0);
  const Grid3& g = f.grid;
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i)
        acc += trapezoid_weight(g, i, j, k) * f.data[g.index(i, j, k)];
  return acc;
}

}  // namespace mtlab
