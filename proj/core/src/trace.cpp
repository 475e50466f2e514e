#include "mtlab/trace.hpp"

#include <cmath>

namespace mtlab {

TangentialTrace::TangentialTrace(Face f, const Grid3& g) : face(f), grid(g) {
  auto sh = shape();
  values[0].assign(sh[0] * sh[1], cplx(0.0));
  values[1].assign(sh[0] * sh[1], cplx(0.0));
}

std::array<std::size_t, 2> TangentialTrace::shape() const {
  auto t = face_tangent_axes(face);
  return {grid.n[t[0]], grid.n[t[1]]};
}

std::size_t TangentialTrace::index(std::size_t ia, std::size_t ib) const {
  return ia + shape()[0] * ib;
}

Vec3 TangentialTrace::point(std::size_t ia, std::size_t ib) const {
  auto t = face_tangent_axes(face);
  const int a = face_axis(face);
  std::size_t ijk[3];
  ijk[a] = (face_sign(face) < 0) ? 0 : grid.n[a] - 1;
  ijk[t[0]] = ia;
  ijk[t[1]] = ib;
  return grid.point(ijk[0], ijk[1], ijk[2]);
}

CVec3 TangentialTrace::vec3(std::size_t ia, std::size_t ib) const {
  auto t = face_tangent_axes(face);
  CVec3 out{cplx(0.0), cplx(0.0), cplx(0.0)};
  out[t[0]] = values[0][index(ia, ib)];
  out[t[1]] = values[1][index(ia, ib)];
  return out;
}

void TangentialTrace::set_vec3(std::size_t ia, std::size_t ib, const CVec3& t3) {
  auto t = face_tangent_axes(face);
  values[0][index(ia, ib)] = t3[t[0]];
  values[1][index(ia, ib)] = t3[t[1]];
}

double TangentialTrace::max_abs() const {
  double m = 0.0;
  for (int c = 0; c < 2; ++c)
    for (const auto& v : values[c]) m = std::max(m, std::abs(v));
  return m;
}

TangentialTrace tangential_trace(const VectorField3& u, Face face) {
  TangentialTrace out(face, u.grid);
  const CVec3 nu = to_cvec(face_normal(face));
  auto sh = out.shape();
  auto t = face_tangent_axes(face);
  const int a = face_axis(face);
  std::size_t ijk[3];
  ijk[a] = (face_sign(face) < 0) ? 0 : u.grid.n[a] - 1;
  for (std::size_t ib = 0; ib < sh[1]; ++ib)
    for (std::size_t ia = 0; ia < sh[0]; ++ia) {
      ijk[t[0]] = ia;
      ijk[t[1]] = ib;
      out.set_vec3(ia, ib, cross(nu, u.vec(ijk[0], ijk[1], ijk[2])));
    }
  return out;
}

std::vector<cplx> surface_divergence(const TangentialTrace& t) {
  auto sh = t.shape();
  auto ax = face_tangent_axes(t.face);
  const double ha = t.grid.spacing(ax[0]);
  const double hb = t.grid.spacing(ax[1]);
  std::vector<cplx> out(sh[0] * sh[1], cplx(0.0));

  auto d1 = [](const std::vector<cplx>& v, std::vector<cplx>& o, std::size_t n, std::size_t stride,
               std::size_t count, std::size_t cstride, double h) {
    for (std::size_t c = 0; c < count; ++c) {
      const std::size_t base = c * cstride;
      o[base] += (-3.0 * v[base] + 4.0 * v[base + stride] - v[base + 2 * stride]) / (2.0 * h);
      for (std::size_t m = 1; m + 1 < n; ++m)
        o[base + m * stride] += (v[base + (m + 1) * stride] - v[base + (m - 1) * stride]) / (2.0 * h);
      const std::size_t e = base + (n - 1) * stride;
      o[e] += (3.0 * v[e] - 4.0 * v[e - stride] + v[e - 2 * stride]) / (2.0 * h);
    }
  };
  d1(t.values[0], out, sh[0], 1, sh[1], sh[0], ha);
  d1(t.values[1], out, sh[1], sh[0], sh[0], 1, hb);
  return out;
}

}  // namespace mtlab
