#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "mtlab/grid.hpp"

namespace mtlab {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using CVec3 = std::array<cplx, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm2(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Bilinear (unconjugated) products throughout; complex geometry such as
// rho·rho = 0 relies on this convention, so there is deliberately no
// Hermitian dot for CVec3.
inline CVec3 operator+(const CVec3& a, const CVec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline CVec3 operator-(const CVec3& a, const CVec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline CVec3 operator*(cplx s, const CVec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline cplx dot(const CVec3& a, const CVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline CVec3 cross(const CVec3& a, const CVec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline CVec3 to_cvec(const Vec3& a) { return {cplx(a[0]), cplx(a[1]), cplx(a[2])}; }
inline CVec3 conj(const CVec3& a) { return {std::conj(a[0]), std::conj(a[1]), std::conj(a[2])}; }
inline double cnorm2(const CVec3& a) {
  return std::sqrt(std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]));
}

struct ScalarField3 {
  Grid3 grid;
  std::vector<cplx> data;

  ScalarField3() = default;
  explicit ScalarField3(const Grid3& g) : grid(g), data(g.size(), cplx(0.0)) {}

  cplx& at(std::size_t i, std::size_t j, std::size_t k) { return data[grid.index(i, j, k)]; }
  const cplx& at(std::size_t i, std::size_t j, std::size_t k) const {
    return data[grid.index(i, j, k)];
  }

  static ScalarField3 sample(const Grid3& g, const std::function<cplx(const Vec3&)>& f) {
    ScalarField3 out(g);
    for (std::size_t k = 0; k < g.n[2]; ++k)
      for (std::size_t j = 0; j < g.n[1]; ++j)
        for (std::size_t i = 0; i < g.n[0]; ++i) out.at(i, j, k) = f(g.point(i, j, k));
    return out;
  }
};

// Three scalar components on a common grid (structure-of-arrays).
struct VectorField3 {
  Grid3 grid;
  std::array<std::vector<cplx>, 3> comp;

  VectorField3() = default;
  explicit VectorField3(const Grid3& g) : grid(g) {
    for (auto& c : comp) c.assign(g.size(), cplx(0.0));
  }

  cplx& at(int c, std::size_t i, std::size_t j, std::size_t k) {
    return comp[c][grid.index(i, j, k)];
  }
  const cplx& at(int c, std::size_t i, std::size_t j, std::size_t k) const {
    return comp[c][grid.index(i, j, k)];
  }
  CVec3 vec(std::size_t i, std::size_t j, std::size_t k) const {
    std::size_t idx = grid.index(i, j, k);
    return {comp[0][idx], comp[1][idx], comp[2][idx]};
  }
  void set(std::size_t i, std::size_t j, std::size_t k, const CVec3& v) {
    std::size_t idx = grid.index(i, j, k);
    comp[0][idx] = v[0];
    comp[1][idx] = v[1];
    comp[2][idx] = v[2];
  }

  static VectorField3 sample(const Grid3& g, const std::function<CVec3(const Vec3&)>& f) {
    VectorField3 out(g);
    for (std::size_t k = 0; k < g.n[2]; ++k)
      for (std::size_t j = 0; j < g.n[1]; ++j)
        for (std::size_t i = 0; i < g.n[0]; ++i) out.set(i, j, k, f(g.point(i, j, k)));
    return out;
  }
};

void check_same_grid(const Grid3& a, const Grid3& b, const char* where);

}  // namespace mtlab
