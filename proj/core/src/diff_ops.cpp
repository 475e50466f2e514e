#include "mtlab/diff_ops.hpp"

namespace mtlab {
namespace {

// Differentiate one component array along `axis`. Central difference inside,
// (-3f0+4f1-f2)/2h and its mirror at the ends; both are exact on quadratics.
void d1_lines(const Grid3& g, const std::vector<cplx>& in, std::vector<cplx>& out, int axis) {
  const std::size_t na = g.n[axis];
  const double h = g.spacing(axis);
  const std::size_t stride = (axis == 0) ? 1 : (axis == 1) ? g.n[0] : g.n[0] * g.n[1];

  // iterate over all lines along `axis`
  const int a1 = (axis == 0) ? 1 : 0;
  const int a2 = (axis == 2) ? 1 : 2;
  const std::size_t s1 = (a1 == 0) ? 1 : (a1 == 1) ? g.n[0] : g.n[0] * g.n[1];
  const std::size_t s2 = (a2 == 0) ? 1 : (a2 == 1) ? g.n[0] : g.n[0] * g.n[1];
  for (std::size_t q = 0; q < g.n[a2]; ++q) {
    for (std::size_t p = 0; p < g.n[a1]; ++p) {
      const std::size_t base = p * s1 + q * s2;
      out[base] = (-3.0 * in[base] + 4.0 * in[base + stride] - in[base + 2 * stride]) / (2.0 * h);
      for (std::size_t m = 1; m + 1 < na; ++m)
        out[base + m * stride] =
            (in[base + (m + 1) * stride] - in[base + (m - 1) * stride]) / (2.0 * h);
      const std::size_t e = base + (na - 1) * stride;
      out[e] = (3.0 * in[e] - 4.0 * in[e - stride] + in[e - 2 * stride]) / (2.0 * h);
    }
  }
}

void d2_lines(const Grid3& g, const std::vector<cplx>& in, std::vector<cplx>& out, int axis) {
  const std::size_t na = g.n[axis];
  const double h2 = g.spacing(axis) * g.spacing(axis);
  const std::size_t stride = (axis == 0) ? 1 : (axis == 1) ? g.n[0] : g.n[0] * g.n[1];
  const int a1 = (axis == 0) ? 1 : 0;
  const int a2 = (axis == 2) ? 1 : 2;
  const std::size_t s1 = (a1 == 0) ? 1 : (a1 == 1) ? g.n[0] : g.n[0] * g.n[1];
  const std::size_t s2 = (a2 == 0) ? 1 : (a2 == 1) ? g.n[0] : g.n[0] * g.n[1];
  for (std::size_t q = 0; q < g.n[a2]; ++q) {
    for (std::size_t p = 0; p < g.n[a1]; ++p) {
      const std::size_t base = p * s1 + q * s2;
      // one-sided second derivative: 2f0 - 5f1 + 4f2 - f3 over h² (second order)
      out[base] = (2.0 * in[base] - 5.0 * in[base + stride] + 4.0 * in[base + 2 * stride] -
                   in[base + 3 * stride]) /
                  h2;
      for (std::size_t m = 1; m + 1 < na; ++m)
        out[base + m * stride] = (in[base + (m + 1) * stride] - 2.0 * in[base + m * stride] +
                                  in[base + (m - 1) * stride]) /
                                 h2;
      const std::size_t e = base + (na - 1) * stride;
      out[e] = (2.0 * in[e] - 5.0 * in[e - stride] + 4.0 * in[e - 2 * stride] -
                in[e - 3 * stride]) /
               h2;
    }
  }
}

}  // namespace

ScalarField3 partial(const ScalarField3& f, int axis) {
  ScalarField3 out(f.grid);
  d1_lines(f.grid, f.data, out.data, axis);
  return out;
}

ScalarField3 partial2(const ScalarField3& f, int axis) {
  ScalarField3 out(f.grid);
  d2_lines(f.grid, f.data, out.data, axis);
  return out;
}

VectorField3 grad(const ScalarField3& f) {
  VectorField3 out(f.grid);
  for (int a = 0; a < 3; ++a) d1_lines(f.grid, f.data, out.comp[a], a);
  return out;
}

VectorField3 curl(const VectorField3& u) {
  const Grid3& g = u.grid;
  VectorField3 out(g);
  std::vector<cplx> tmp1(g.size()), tmp2(g.size());
  // (curl u)_c = d_a u_b - d_b u_a, (c,a,b) cyclic
  const int A[3] = {1, 2, 0}, B[3] = {2, 0, 1};
  for (int c = 0; c < 3; ++c) {
    d1_lines(g, u.comp[B[c]], tmp1, A[c]);
    d1_lines(g, u.comp[A[c]], tmp2, B[c]);
    for (std::size_t m = 0; m < g.size(); ++m) out.comp[c][m] = tmp1[m] - tmp2[m];
  }
  return out;
}

ScalarField3 divergence(const VectorField3& u) {
  const Grid3& g = u.grid;
  ScalarField3 out(g);
  std::vector<cplx> tmp(g.size());
  for (int a = 0; a < 3; ++a) {
    d1_lines(g, u.comp[a], tmp, a);
    for (std::size_t m = 0; m < g.size(); ++m) out.data[m] += tmp[m];
  }
  return out;
}

ScalarField3 laplacian(const ScalarField3& f) {
  const Grid3& g = f.grid;
  ScalarField3 out(g);
  std::vector<cplx> tmp(g.size());
  for (int a = 0; a < 3; ++a) {
    d2_lines(g, f.data, tmp, a);
    for (std::size_t m = 0; m < g.size(); ++m) out.data[m] += tmp[m];
  }
  return out;
}

}  // namespace mtlab
