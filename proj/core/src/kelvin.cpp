#include "mtlab/kelvin.hpp"

#include <cmath>
#include <stdexcept>

#include "mtlab/diff_ops.hpp"
#include "mtlab/norms.hpp"

namespace mtlab::kelvin {

namespace {

constexpr double kSingularTol = 1e-12;

void require_regular(const Vec3& x, const char* who) {
  if (norm2(x) < kSingularTol) throw std::invalid_argument(std::string(who) + ": map singularity");
}

// +-(|p|^{-2} I - 2 |p|^{-4} p p^T): the common Jacobian of both inversion
// maps, sign +1 for K(x) = |x|^{-2} x and -1 for F(y) = K(2 x0 - y), where
// p is the offset from the map's own inversion centre.
Mat3 inversion_jacobian(const Vec3& p, double sign) {
  const double r2 = dot(p, p);
  const double a = sign / r2;
  const double b = -2.0 * sign / (r2 * r2);
  Mat3 J{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) J[std::size_t(3 * r + c)] = b * p[std::size_t(r)] * p[std::size_t(c)];
  J[0] += a;
  J[4] += a;
  J[8] += a;
  return J;
}

// Jacobian of the inverse of an inversion-kind map, evaluated at a point of
// its own domain. Needed by the composite map and the composition check.
// The halfspace inverse F^{-1}(x) = 2 x0 - K(x) inverts about the origin,
// the one point of the sphere that the hypotheses exclude from the domain.
Mat3 inverse_map_jacobian(const ConformalMap& map, const Vec3& x) {
  if (map.kind == MapKind::Kelvin) {
    require_regular(x, "kelvin jacobian");
    return inversion_jacobian(x, +1.0);
  }
  require_regular(x, "halfspace map jacobian");
  return inversion_jacobian(x, -1.0);
}

// Offset from the inversion centre as seen from the halfspace side; every
// closed-form identity and conformal factor is a power of its norm. Plain
// Kelvin is centred at the origin, so only the norm matters there and the
// shared 2 x0 - y formula (with x0 = 0) is still correct.
Vec3 centre_offset(const ConformalMap& map, const Vec3& y) {
  return 2.0 * map.x0 - y;
}

const Mat3 kReflect = {1, 0, 0, 0, 1, 0, 0, 0, -1};

bool is_inversion_kind(const ConformalMap& map) {
  return map.kind == MapKind::Kelvin || map.kind == MapKind::SphereToHalfspace;
}

// Trilinear read of one complex component; the fractional coordinate is
// clamped only within a hair of the boundary so genuine overshoots still
// fail loudly.
cplx trilinear(const Grid3& g, const std::vector<cplx>& data, const Vec3& x) {
  double t[3];
  std::size_t i0[3];
  for (int d = 0; d < 3; ++d) {
    const double h = g.spacing(d);
    double s = (x[std::size_t(d)] - g.origin[std::size_t(d)]) / h;
    const double hi = double(g.n[std::size_t(d)] - 1);
    if (s < -1e-9 || s > hi + 1e-9)
      throw std::invalid_argument("pullback point leaves the source grid");
    s = std::min(std::max(s, 0.0), hi);
    double fl = std::floor(s);
    if (fl > hi - 1.0) fl = hi - 1.0;
    i0[d] = std::size_t(fl);
    t[d] = s - fl;
  }
  cplx out(0.0);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 2; ++c) {
        const double w = (a ? t[0] : 1.0 - t[0]) * (b ? t[1] : 1.0 - t[1]) * (c ? t[2] : 1.0 - t[2]);
        out += w * data[g.index(i0[0] + a, i0[1] + b, i0[2] + c)];
      }
  return out;
}

CVec3 trilinear_vec(const VectorField3& u, const Vec3& x) {
  return {trilinear(u.grid, u.comp[0], x), trilinear(u.grid, u.comp[1], x),
          trilinear(u.grid, u.comp[2], x)};
}

VectorField3 pullback_common(const ConformalMap& map, const std::function<CVec3(const Vec3&)>& eval,
                             const Grid3& target) {
  VectorField3 out(target);
  for (std::size_t i = 0; i < target.n[0]; ++i)
    for (std::size_t j = 0; j < target.n[1]; ++j)
      for (std::size_t k = 0; k < target.n[2]; ++k) {
        const Vec3 y = target.point(i, j, k);
        const Mat3 At = mat_transpose(map.jacobian_at(y));
        out.set(i, j, k, mat_vec(At, eval(map.forward(y))));
      }
  return out;
}

}  // namespace

Vec3 kelvin_point(const Vec3& x) {
  require_regular(x, "kelvin_point");
  return (1.0 / dot(x, x)) * x;
}

ConformalMap kelvin_map() {
  ConformalMap m;
  m.kind = MapKind::Kelvin;
  m.x0 = {0.0, 0.0, 0.0};
  m.forward = [](const Vec3& x) { return kelvin_point(x); };
  m.inverse = [](const Vec3& x) { return kelvin_point(x); };
  m.jacobian_at = [](const Vec3& x) {
    require_regular(x, "kelvin jacobian");
    return inversion_jacobian(x, +1.0);
  };
  return m;
}

ConformalMap sphere_to_halfspace_map(const Vec3& x0) {
  ConformalMap m;
  m.kind = MapKind::SphereToHalfspace;
  m.x0 = x0;
  m.forward = [x0](const Vec3& y) {
    require_regular(y, "halfspace map");
    return x0 - (1.0 / dot(y, y)) * y;
  };
  m.inverse = [x0](const Vec3& x) {
    const Vec3 d = x - x0;
    require_regular(d, "halfspace map inverse");
    return (-1.0 / dot(d, d)) * d;
  };
  m.jacobian_at = [](const Vec3& y) {
    require_regular(y, "halfspace map jacobian");
    return inversion_jacobian(y, -1.0);
  };
  return m;
}

ConformalMap reflection_composite_map(const Vec3& x0) {
  const ConformalMap F = sphere_to_halfspace_map(x0);
  ConformalMap m;
  m.kind = MapKind::ReflectionComposite;
  m.x0 = x0;
  auto apply = [F](const Vec3& x) {
    Vec3 y = F.inverse(x);
    y[2] = -y[2];
    return F.forward(y);
  };
  // F o R o F^{-1} is its own inverse: R is an involution and conjugation
  // preserves that.
  m.forward = apply;
  m.inverse = apply;
  m.jacobian_at = [F](const Vec3& x) {
    const Mat3 Dinv = inverse_map_jacobian(F, x);
    Vec3 y = F.inverse(x);
    y[2] = -y[2];
    return mat_mul(F.jacobian_at(y), mat_mul(kReflect, Dinv));
  };
  return m;
}

Mat3 jacobian(const ConformalMap& map, const Vec3& y) { return map.jacobian_at(y); }

JacobianChecks jacobian_identity_checks(const ConformalMap& map, const Vec3& y) {
  if (!is_inversion_kind(map))
    throw std::invalid_argument("jacobian identity checks apply to the inversion maps only");
  const Mat3 A = map.jacobian_at(y);
  const double r2 = dot(y, y);
  JacobianChecks out;

  Mat3 diff = A;
  const Mat3 At = mat_transpose(A);
  for (std::size_t i = 0; i < 9; ++i) diff[i] -= At[i];
  out.symmetry_gap = frobenius(diff);

  Mat3 ortho = mat_mul(A, At);
  const double scale = 1.0 / (r2 * r2);
  ortho[0] -= scale;
  ortho[4] -= scale;
  ortho[8] -= scale;
  out.orthogonality_gap = frobenius(ortho);

  const double expected_det = (map.kind == MapKind::Kelvin ? -1.0 : 1.0) / (r2 * r2 * r2);
  out.det_gap = std::abs(det3(A) - expected_det);

  Mat3 comp = inverse_map_jacobian(map, map.forward(y));
  for (std::size_t i = 0; i < 9; ++i) comp[i] -= r2 * r2 * A[i];
  out.inverse_composition_gap = frobenius(comp);
  return out;
}

VectorField3 pullback_vector(const ConformalMap& map, const VectorField3& u, const Grid3& target) {
  return pullback_common(map, [&u](const Vec3& x) { return trilinear_vec(u, x); }, target);
}

VectorField3 pullback_vector(const ConformalMap& map, const std::function<CVec3(const Vec3&)>& u,
                             const Grid3& target) {
  return pullback_common(map, u, target);
}

TransformedMaterial transform_material(const MaterialModel& m, const ConformalMap& map) {
  if (!is_inversion_kind(map))
    throw std::invalid_argument("material transport is defined for the inversion maps only");
  auto fwd = map.forward;
  TransformedMaterial out;
  out.sigma = [m, fwd](const Vec3& y) { return m.sigma(fwd(y)) / dot(y, y); };
  out.mu = [m, fwd](const Vec3& y) { return m.mu(fwd(y)) / dot(y, y); };
  return out;
}

ResidualLawReport residual_transform_check(const ConformalMap& map, const MaterialModel& m,
                                           const std::function<CVec3(const Vec3&)>& E,
                                           const std::function<CVec3(const Vec3&)>& H, double omega,
                                           const Grid3& target, const Grid3& source) {
  const cplx iw(0.0, omega);

  // Left side: Faraday residual of the pulled-back pair against the
  // conformally weighted material.
  const VectorField3 Et = pullback_vector(map, E, target);
  const VectorField3 Ht = pullback_vector(map, H, target);
  const TransformedMaterial tm = transform_material(m, map);
  VectorField3 lhs = mtlab::curl(Et);
  for (std::size_t i = 0; i < target.n[0]; ++i)
    for (std::size_t j = 0; j < target.n[1]; ++j)
      for (std::size_t k = 0; k < target.n[2]; ++k) {
        const Vec3 y = target.point(i, j, k);
        const cplx w = iw * tm.mu(y);
        lhs.set(i, j, k, lhs.vec(i, j, k) - w * Ht.vec(i, j, k));
      }

  // Right side: the source-side residual, stencil-differentiated where the
  // fields live, then carried over pointwise with the |y|^{-2} DF weight.
  const VectorField3 Es = VectorField3::sample(source, E);
  const VectorField3 Hs = VectorField3::sample(source, H);
  VectorField3 res = mtlab::curl(Es);
  for (std::size_t i = 0; i < source.n[0]; ++i)
    for (std::size_t j = 0; j < source.n[1]; ++j)
      for (std::size_t k = 0; k < source.n[2]; ++k) {
        const cplx w = iw * m.mu(source.point(i, j, k));
        res.set(i, j, k, res.vec(i, j, k) - w * Hs.vec(i, j, k));
      }

  VectorField3 rhs(target);
  for (std::size_t i = 0; i < target.n[0]; ++i)
    for (std::size_t j = 0; j < target.n[1]; ++j)
      for (std::size_t k = 0; k < target.n[2]; ++k) {
        const Vec3 y = target.point(i, j, k);
        const Mat3 A = map.jacobian_at(y);
        const CVec3 rv = trilinear_vec(res, map.forward(y));
        rhs.set(i, j, k, (1.0 / dot(y, y)) * mat_vec(A, rv));
      }

  ResidualLawReport rep;
  rep.lhs_norm = l2_norm(lhs);
  rep.rhs_norm = l2_norm(rhs);
  VectorField3 gap = lhs;
  for (int c = 0; c < 3; ++c)
    for (std::size_t q = 0; q < gap.comp[std::size_t(c)].size(); ++q)
      gap.comp[std::size_t(c)][q] -= rhs.comp[std::size_t(c)][q];
  rep.gap_norm = l2_norm(gap);
  rep.rel_gap = rep.gap_norm / std::max(rep.rhs_norm, 1e-300);
  return rep;
}

Vec3 transformed_normal(const ConformalMap& map, const Vec3& y, const Vec3& nu_source) {
  if (!is_inversion_kind(map))
    throw std::invalid_argument("normal transport is defined for the inversion maps only");
  const Mat3 At = mat_transpose(map.jacobian_at(y));
  return dot(y, y) * mat_vec(At, nu_source);
}

TraceTransformSample transform_trace(const ConformalMap& map, const Vec3& y,
                                     const Vec3& nu_source, const CVec3& H_source) {
  const Mat3 At = mat_transpose(map.jacobian_at(y));
  const Vec3 nu_t = transformed_normal(map, y, nu_source);
  const CVec3 H_t = mat_vec(At, H_source);
  TraceTransformSample out;
  out.lhs = cross(to_cvec(nu_t), H_t);
  out.rhs = mat_vec(At, cross(to_cvec(nu_source), H_source));
  out.gap = cnorm2(out.lhs - out.rhs);
  return out;
}

}  // namespace mtlab::kelvin
