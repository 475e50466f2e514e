#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtlab/cgo.hpp"
#include "mtlab/diff_ops.hpp"

namespace mtlab::cgo {

namespace {

// 1/(2 pi (y1 + i y2)) averaged over an h1 x h2 cell centered at (y1, y2),
// by midpoint refinement. The exactly centered cell averages to zero by
// antisymmetry, which the symmetric sample layout reproduces.
cplx kernel_cell_average(double y1, double y2, double h1, double h2, int refine) {
  cplx acc(0.0, 0.0);
  for (int a = 0; a < refine; ++a)
    for (int b = 0; b < refine; ++b) {
      const double u = y1 + ((a + 0.5) / refine - 0.5) * h1;
      const double v = y2 + ((b + 0.5) / refine - 0.5) * h2;
      acc += 1.0 / cplx(u, v);
    }
  return acc / (2.0 * M_PI * double(refine) * double(refine));
}

cplx kernel_value(double y1, double y2, double h1, double h2) {
  if (std::hypot(y1, y2) <= 4.0 * std::max(h1, h2))
    return kernel_cell_average(y1, y2, h1, h2, 16);
  return 1.0 / (2.0 * M_PI * cplx(y1, y2));
}

bool support_bounds(const ScalarField3& f, std::array<std::size_t, 3>& lo,
                    std::array<std::size_t, 3>& hi) {
  double peak = 0.0;
  for (const auto& v : f.data) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return false;
  const double tol = 1e-13 * peak;
  lo = {f.grid.n[0], f.grid.n[1], f.grid.n[2]};
  hi = {0, 0, 0};
  for (std::size_t k = 0; k < f.grid.n[2]; ++k)
    for (std::size_t j = 0; j < f.grid.n[1]; ++j)
      for (std::size_t i = 0; i < f.grid.n[0]; ++i) {
        if (std::abs(f.at(i, j, k)) <= tol) continue;
        lo = {std::min(lo[0], i), std::min(lo[1], j), std::min(lo[2], k)};
        hi = {std::max(hi[0], i), std::max(hi[1], j), std::max(hi[2], k)};
      }
  return true;
}

// rho ~ +-e_axis within tolerance?
bool axis_direction(const Vec3& v, int& axis, double& sign) {
  for (int d = 0; d < 3; ++d) {
    if (std::abs(std::abs(v[d]) - 1.0) < 1e-12) {
      const int o1 = (d + 1) % 3, o2 = (d + 2) % 3;
      if (std::abs(v[o1]) < 1e-12 && std::abs(v[o2]) < 1e-12) {
        axis = d;
        sign = v[d] > 0 ? 1.0 : -1.0;
        return true;
      }
    }
  }
  return false;
}

// Planar convolution when rho1, rho2 are (signed) coordinate axes: zero-pad
// the two in-plane axes to double size so the circular convolution is the
// exact linear one, and put the kernel on the zero-displacement slab of the
// remaining axis.
ScalarField3 cauchy_axis_aligned(const ScalarField3& f, int axis_a, double sign_a, int axis_b,
                                 double sign_b) {
  const Grid3& g = f.grid;
  const int axis_c = 3 - axis_a - axis_b;
  const double ha = g.spacing(axis_a), hb = g.spacing(axis_b), hc = g.spacing(axis_c);

  PeriodicBox pad;
  pad.origin = {0.0, 0.0, 0.0};
  for (int d = 0; d < 3; ++d) {
    const std::size_t nd = (d == axis_c) ? g.n[std::size_t(d)] : 2 * g.n[std::size_t(d)];
    pad.n[std::size_t(d)] = nd;
    pad.length[std::size_t(d)] = double(nd) * g.spacing(d);
  }

  CField fin(pad.size(), cplx(0.0));
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) fin[pad.index(i, j, k)] = f.at(i, j, k);

  CField ker(pad.size(), cplx(0.0));
  std::array<std::size_t, 3> idx{0, 0, 0};
  for (std::size_t ib = 0; ib < pad.n[std::size_t(axis_b)]; ++ib)
    for (std::size_t ia = 0; ia < pad.n[std::size_t(axis_a)]; ++ia) {
      const auto na = pad.n[std::size_t(axis_a)], nb = pad.n[std::size_t(axis_b)];
      const double da = (ia <= na / 2) ? double(ia) : double(ia) - double(na);
      const double db = (ib <= nb / 2) ? double(ib) : double(ib) - double(nb);
      idx[std::size_t(axis_a)] = ia;
      idx[std::size_t(axis_b)] = ib;
      idx[std::size_t(axis_c)] = 0;
      ker[pad.index(idx[0], idx[1], idx[2])] =
          kernel_value(sign_a * da * ha, sign_b * db * hb, ha, hb) / hc;
    }

  const CField out = convolve_periodic(pad, fin, ker);

  ScalarField3 result(g);
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) result.at(i, j, k) = out[pad.index(i, j, k)];
  return result;
}

cplx trilinear(const ScalarField3& f, const Vec3& x) {
  const Grid3& g = f.grid;
  double fi[3];
  for (int d = 0; d < 3; ++d) {
    fi[d] = (x[d] - g.origin[std::size_t(d)]) / g.spacing(d);
    if (fi[d] < 0.0 || fi[d] > double(g.n[std::size_t(d)] - 1)) return cplx(0.0);
  }
  std::size_t i0[3];
  double t[3];
  for (int d = 0; d < 3; ++d) {
    i0[d] = std::min(std::size_t(fi[d]), g.n[std::size_t(d)] - 2);
    t[d] = fi[d] - double(i0[d]);
  }
  cplx acc(0.0);
  for (int dk = 0; dk < 2; ++dk)
    for (int dj = 0; dj < 2; ++dj)
      for (int di = 0; di < 2; ++di) {
        const double w = (di ? t[0] : 1.0 - t[0]) * (dj ? t[1] : 1.0 - t[1]) *
                         (dk ? t[2] : 1.0 - t[2]);
        acc += w * f.at(i0[0] + std::size_t(di), i0[1] + std::size_t(dj), i0[2] + std::size_t(dk));
      }
  return acc;
}

// General frame: resample f onto a lattice aligned with (rho1, rho2, rho1 x
// rho2), convolve slab-by-slab (as one 3-D convolution with the kernel on the
// zero-displacement slab), and interpolate back. Both resampling steps are
// trilinear, so this path is second-order accurate.
ScalarField3 cauchy_rotated(const ScalarField3& f, const Vec3& rho1, const Vec3& rho2) {
  const Grid3& g = f.grid;
  const Vec3 rho3 = cross(rho1, rho2);
  const Vec3 c0{g.origin[0] + 0.5 * g.extent[0], g.origin[1] + 0.5 * g.extent[1],
                g.origin[2] + 0.5 * g.extent[2]};
  const double hr = std::min({g.spacing(0), g.spacing(1), g.spacing(2)});
  const double D = 0.5 * std::sqrt(dot(g.extent, g.extent)) + 2.0 * hr;

  const std::size_t nside = 2 * std::size_t(std::ceil(D / hr)) + 1;  // odd, covers [-D, D]
  const std::size_t M = 2 * nside + 8;                               // in-plane padding
  const std::size_t half = M / 2;
  const std::size_t mid_w = (nside - 1) / 2;

  PeriodicBox rot;
  rot.origin = {0.0, 0.0, 0.0};
  rot.n = {M, M, nside};
  rot.length = {double(M) * hr, double(M) * hr, double(nside) * hr};

  CField fin(rot.size(), cplx(0.0));
  for (std::size_t k = 0; k < nside; ++k) {
    const double w = (double(k) - double(mid_w)) * hr;
    for (std::size_t j = 0; j < M; ++j) {
      const double v = (double(j) - double(half)) * hr;
      for (std::size_t i = 0; i < M; ++i) {
        const double u = (double(i) - double(half)) * hr;
        const Vec3 x = c0 + u * rho1 + v * rho2 + w * rho3;
        fin[rot.index(i, j, k)] = trilinear(f, x);
      }
    }
  }

  CField ker(rot.size(), cplx(0.0));
  for (std::size_t j = 0; j < M; ++j) {
    const double db = (j <= half) ? double(j) : double(j) - double(M);
    for (std::size_t i = 0; i < M; ++i) {
      const double da = (i <= half) ? double(i) : double(i) - double(M);
      ker[rot.index(i, j, 0)] = kernel_value(da * hr, db * hr, hr, hr) / hr;
    }
  }

  const CField conv = convolve_periodic(rot, fin, ker);

  // view of the rotated result as a field for interpolation
  ScalarField3 rfield(view_grid(rot));
  rfield.data = conv;

  ScalarField3 result(g);
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) {
        const Vec3 x = g.point(i, j, k) - c0;
        const Vec3 uvw{dot(x, rho1), dot(x, rho2), dot(x, rho3)};
        const Vec3 lattice{(uvw[0] / hr + double(half)) * hr,
                           (uvw[1] / hr + double(half)) * hr,
                           (uvw[2] / hr + double(mid_w)) * hr};
        result.at(i, j, k) = trilinear(rfield, lattice);
      }
  return result;
}

}  // namespace

ScalarField3 cauchy_transform(const ScalarField3& f, const Vec3& rho1, const Vec3& rho2) {
  if (std::abs(norm2(rho1) - 1.0) > 1e-12 || std::abs(norm2(rho2) - 1.0) > 1e-12 ||
      std::abs(dot(rho1, rho2)) > 1e-12)
    throw std::invalid_argument("cauchy_transform: rho1, rho2 must be orthonormal");

  std::array<std::size_t, 3> lo{}, hi{};
  if (!support_bounds(f, lo, hi)) return ScalarField3(f.grid);  // zero in, zero out
  for (int d = 0; d < 3; ++d)
    if (lo[std::size_t(d)] < 1 || hi[std::size_t(d)] + 1 >= f.grid.n[std::size_t(d)])
      throw std::runtime_error(
          "cauchy_transform: support touches the grid boundary (domain too small)");

  int axis_a = -1, axis_b = -1;
  double sign_a = 1.0, sign_b = 1.0;
  if (axis_direction(rho1, axis_a, sign_a) && axis_direction(rho2, axis_b, sign_b) &&
      axis_a != axis_b)
    return cauchy_axis_aligned(f, axis_a, sign_a, axis_b, sign_b);
  return cauchy_rotated(f, rho1, rho2);
}

ScalarField3 transport_phase(const ScalarField3& alpha_sharp, const ScalarField3& beta_sharp,
                             const Vec3& rho1, const Vec3& rho2) {
  check_same_grid(alpha_sharp.grid, beta_sharp.grid, "transport_phase");
  ScalarField3 sum(alpha_sharp.grid);
  for (std::size_t idx = 0; idx < sum.data.size(); ++idx)
    sum.data[idx] = alpha_sharp.data[idx] + beta_sharp.data[idx];

  const VectorField3 gsum = grad(sum);
  ScalarField3 data(alpha_sharp.grid);
  for (int c = 0; c < 3; ++c) {
    const cplx rb(rho1[c], -rho2[c]);  // conjugate of rho = rho1 + i rho2
    for (std::size_t idx = 0; idx < data.data.size(); ++idx)
      data.data[idx] += rb * gsum.comp[std::size_t(c)][idx];
  }

  ScalarField3 psi = cauchy_transform(data, rho1, rho2);
  for (auto& v : psi.data) v *= -0.5;
  return psi;
}

}  // namespace mtlab::cgo
