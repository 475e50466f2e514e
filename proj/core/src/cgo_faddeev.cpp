#include <atomic>
#include <cmath>
#include <stdexcept>

#include "cgo_internal.hpp"
#include "mtlab/norms.hpp"

namespace mtlab::cgo {

namespace detail {

CField conj_inverse_w(const PeriodicBox& box, const CVec3& zeta, const CField& w, double floor_abs,
                      std::size_t* hits) {
  std::size_t local_hits = 0;
  const CField out = apply_multiplier(
      box, w,
      [&](const Vec3& kappa) {
        cplx p = conjugated_symbol(kappa, zeta);
        const double mod = std::abs(p);
        if (mod < floor_abs) {
          ++local_hits;
          p = (mod == 0.0) ? cplx(floor_abs) : p * (floor_abs / mod);
        }
        return 1.0 / p;
      },
      half_shift(box));
  if (hits) *hits += local_hits;
  return out;
}

CField conj_forward_w(const PeriodicBox& box, const CVec3& zeta, const CField& w) {
  return apply_multiplier(
      box, w, [&](const Vec3& kappa) { return conjugated_symbol(kappa, zeta); }, half_shift(box));
}

CField dzeta_w(const PeriodicBox& box, const CVec3& zeta, const CField& w, int axis) {
  CField out = spectral_partial(box, w, axis, half_shift(box));
  const cplx iz = cplx(0.0, 1.0) * zeta[axis];
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += iz * w[i];
  return out;
}

CField3 curl_zeta_w(const PeriodicBox& box, const CVec3& zeta, const CField3& w) {
  std::array<std::array<CField, 3>, 3> d;  // d[c][comp] = (d/dx_c + i zeta_c) w_comp
  for (int c = 0; c < 3; ++c)
    for (int comp = 0; comp < 3; ++comp)
      d[std::size_t(c)][std::size_t(comp)] = dzeta_w(box, zeta, w[std::size_t(comp)], c);
  CField3 out;
  for (int c = 0; c < 3; ++c) {
    const int a = (c + 1) % 3, b = (c + 2) % 3;
    out[std::size_t(c)].resize(box.size());
    for (std::size_t i = 0; i < box.size(); ++i)
      out[std::size_t(c)][i] =
          d[std::size_t(a)][std::size_t(b)][i] - d[std::size_t(b)][std::size_t(a)][i];
  }
  return out;
}

double box_weighted_norm(const PeriodicBox& box, const CField& f, double delta, bool shifted) {
  const double expo = shifted ? delta + 1.0 : delta;
  double acc = 0.0;
  for (std::size_t k = 0; k < box.n[2]; ++k)
    for (std::size_t j = 0; j < box.n[1]; ++j)
      for (std::size_t i = 0; i < box.n[0]; ++i) {
        const Vec3 x = box.point(i, j, k);
        acc += std::pow(1.0 + dot(x, x), expo) * std::norm(f[box.index(i, j, k)]);
      }
  return std::sqrt(acc * box.cell_volume());
}

double box_weighted_norm(const PeriodicBox& box, const CField3& f, double delta, bool shifted) {
  double acc = 0.0;
  for (const auto& comp : f) {
    const double v = box_weighted_norm(box, comp, delta, shifted);
    acc += v * v;
  }
  return std::sqrt(acc);
}

}  // namespace detail

ScalarField3 faddeev_solve(const ScalarField3& gamma, const CVec3& zeta, const ScalarField3& f,
                           double delta, FaddeevReport* report, const FaddeevOptions& opts) {
  check_same_grid(gamma.grid, f.grid, "faddeev_solve");
  const PeriodicBox box = box_of_grid(gamma.grid);
  const std::size_t N = box.size();
  const Vec3 shift = half_shift(box);
  const double znorm = detail::zeta_norm(zeta);
  if (!(znorm > 0.0)) throw std::invalid_argument("faddeev_solve: zeta must be nonzero");
  const double floor_abs = opts.floor_scale * znorm * znorm;

  // gamma^{1/2} and the reduction potential q = gamma^{-1/2} Lap gamma^{1/2};
  // the Laplacian acts on the physical (unshifted) field since gamma is an
  // ordinary coefficient, constant near the wrap.
  CField sqrt_gamma(N), inv_sqrt_gamma(N);
  for (std::size_t i = 0; i < N; ++i) {
    const cplx gv = gamma.data[i];
    if (!(gv.real() > 0.0) || std::abs(gv.imag()) > 1e-14 * (1.0 + std::abs(gv.real())))
      throw std::invalid_argument("faddeev_solve: gamma must be real and positive");
    const double root = std::sqrt(gv.real());
    sqrt_gamma[i] = root;
    inv_sqrt_gamma[i] = 1.0 / root;
  }
  CField q = apply_multiplier(box, sqrt_gamma, [](const Vec3& k) { return cplx(-dot(k, k)); });
  for (std::size_t i = 0; i < N; ++i) q[i] *= inv_sqrt_gamma[i];

  // demodulated right-hand side of the reduced equation
  CField rhs_w(N);
  for (std::size_t i = 0; i < N; ++i) rhs_w[i] = sqrt_gamma[i] * f.data[i];
  rhs_w = modulated(box, rhs_w, shift, -1.0);

  std::size_t floor_hits = 0;
  CField b = detail::conj_inverse_w(box, zeta, rhs_w, floor_abs, &floor_hits);

  const LinOp op = [&](const CField& x, CField& y) {
    CField qx(N);
    for (std::size_t i = 0; i < N; ++i) qx[i] = q[i] * x[i];
    y = detail::conj_inverse_w(box, zeta, qx, floor_abs, nullptr);
    for (std::size_t i = 0; i < N; ++i) y[i] += x[i];
  };

  CField v_w(N, cplx(0.0));
  KrylovStats stats = bicgstab(op, b, v_w, opts.tol, opts.max_iterations);
  if (!stats.converged) {
    stats = richardson(op, b, v_w, opts.tol, opts.max_iterations);
    if (!stats.converged)
      throw std::runtime_error(
          "faddeev_solve: potential iteration did not converge (tau too small)");
  }

  // u = gamma^{-1/2} v; the modulus is modulation-invariant so the pointwise
  // scaling commutes with the representation change.
  CField u_w(N);
  for (std::size_t i = 0; i < N; ++i) u_w[i] = inv_sqrt_gamma[i] * v_w[i];

  ScalarField3 u(gamma.grid);
  u.data = modulated(box, u_w, shift, +1.0);

  if (report) {
    report->krylov = stats;
    report->floor_hits = floor_hits;

    // direct residual of (-Lap_zeta - grad log gamma . grad_zeta) u = f,
    // assembled in the demodulated representation
    CField log_gamma(N);
    for (std::size_t i = 0; i < N; ++i) log_gamma[i] = std::log(sqrt_gamma[i].real()) * 2.0;
    CField resid = detail::conj_forward_w(box, zeta, u_w);
    for (int axis = 0; axis < 3; ++axis) {
      const CField dlg = spectral_partial(box, log_gamma, axis);
      const CField du = detail::dzeta_w(box, zeta, u_w, axis);
      for (std::size_t i = 0; i < N; ++i) resid[i] -= dlg[i] * du[i];
    }
    const CField f_w = modulated(box, f.data, shift, -1.0);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      num += std::norm(resid[i] - f_w[i]);
      den += std::norm(f_w[i]);
    }
    report->residual_rel = (den > 0.0) ? std::sqrt(num / den) : 0.0;

    const double nu = detail::box_weighted_norm(box, u.data, delta, false);
    const double nf = detail::box_weighted_norm(box, f.data, delta, true);
    report->decay_ratio = (nf > 0.0) ? nu * znorm / nf : 0.0;
  }
  return u;
}

}  // namespace mtlab::cgo
