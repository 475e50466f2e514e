#pragma once

#include <functional>

#include "mtlab/field.hpp"
#include "mtlab/material.hpp"

namespace mtlab::kelvin {

// Row-major 3x3 real matrices; all the Jacobians here are real-symmetric or
// products of such, so a small fixed-size kit beats pulling in a matrix
// library.
using Mat3 = std::array<double, 9>;

inline Vec3 mat_vec(const Mat3& A, const Vec3& v) {
  return {A[0] * v[0] + A[1] * v[1] + A[2] * v[2], A[3] * v[0] + A[4] * v[1] + A[5] * v[2],
          A[6] * v[0] + A[7] * v[1] + A[8] * v[2]};
}
inline CVec3 mat_vec(const Mat3& A, const CVec3& v) {
  return {A[0] * v[0] + A[1] * v[1] + A[2] * v[2], A[3] * v[0] + A[4] * v[1] + A[5] * v[2],
          A[6] * v[0] + A[7] * v[1] + A[8] * v[2]};
}
inline Mat3 mat_mul(const Mat3& A, const Mat3& B) {
  Mat3 C{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) C[std::size_t(3 * r + c)] += A[std::size_t(3 * r + k)] * B[std::size_t(3 * k + c)];
  return C;
}
inline Mat3 mat_transpose(const Mat3& A) {
  return {A[0], A[3], A[6], A[1], A[4], A[7], A[2], A[5], A[8]};
}
inline double det3(const Mat3& A) {
  return A[0] * (A[4] * A[8] - A[5] * A[7]) - A[1] * (A[3] * A[8] - A[5] * A[6]) +
         A[2] * (A[3] * A[7] - A[4] * A[6]);
}
inline double frobenius(const Mat3& A) {
  double s = 0.0;
  for (double a : A) s += a * a;
  return std::sqrt(s);
}
inline Mat3 identity_mat() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

// Inversion in the unit sphere, an involution on R^3 minus the origin.
Vec3 kelvin_point(const Vec3& x);

// ---------------------------------------------------------------------------
// The three maps of the sphere-to-halfspace reduction, packaged as closures:
//   Kelvin               K(x)  = |x|^{-2} x
//   SphereToHalfspace    F(y)  = -|y|^{-2} y + x0,  F^{-1}(x) = -K(x - x0)
//   ReflectionComposite  F o R o F^{-1} with R(y) = (y1, y2, -y3), the
//                        reflection across the sphere that F straightens
// with x0 = (0, 0, 1/2) so the ball of radius 1/2 at x0 maps to {x3 < 0}.
// Jacobians are analytic: DF = -|y|^{-2} I + 2|y|^{-4} y y^T and its Kelvin
// sibling with the opposite sign, composites by the chain rule.
// ---------------------------------------------------------------------------
enum class MapKind { Kelvin, SphereToHalfspace, ReflectionComposite };

struct ConformalMap {
  MapKind kind = MapKind::Kelvin;
  Vec3 x0{0.0, 0.0, 0.5};
  std::function<Vec3(const Vec3&)> forward;
  std::function<Vec3(const Vec3&)> inverse;
  std::function<Mat3(const Vec3&)> jacobian_at;
};

ConformalMap kelvin_map();
ConformalMap sphere_to_halfspace_map(const Vec3& x0 = {0.0, 0.0, 0.5});
ConformalMap reflection_composite_map(const Vec3& x0 = {0.0, 0.0, 0.5});

// Similarity carrying an arbitrary ball onto the reference ball of radius
// 1/2 at (0,0,1/2): S(x) = x0_ref + (x - center) / (2 radius). Pre-compose
// a reference-ball map with this to treat general balls.
struct Similarity {
  Vec3 center{0.0, 0.0, 0.0};
  double radius = 1.0;
  double scale() const { return 1.0 / (2.0 * radius); }
  Vec3 apply(const Vec3& x) const { return Vec3{0.0, 0.0, 0.5} + scale() * (x - center); }
  Vec3 invert(const Vec3& y) const { return center + (2.0 * radius) * (y - Vec3{0.0, 0.0, 0.5}); }
};

// Jacobian with the singularity guard applied.
Mat3 jacobian(const ConformalMap& map, const Vec3& y);

// Residuals of the closed-form Jacobian identities of the inversion maps:
//   DF = (DF)^T,  DF (DF)^T = |y|^{-4} I,  det(DF) = +-|y|^{-6},
//   (DF^{-1} o F) = |y|^4 DF
// (determinant sign: + for the halfspace map, - for plain Kelvin, whose
// Jacobian is the negative of the other's). Rejects the composite reflection,
// which obeys none of these.
struct JacobianChecks {
  double symmetry_gap = 0.0;
  double orthogonality_gap = 0.0;
  double det_gap = 0.0;
  double inverse_composition_gap = 0.0;
};
JacobianChecks jacobian_identity_checks(const ConformalMap& map, const Vec3& y);

// F* u = (DF)^T (u o F) sampled on the target grid; the source field is
// read by trilinear interpolation, so downstream comparisons inherit O(h^2).
VectorField3 pullback_vector(const ConformalMap& map, const VectorField3& u, const Grid3& target);

// Same pullback when the source field is available in closed form. Nodal
// values are then exact, which is what differentiated checks (curl law,
// residual law) need to converge at the stencil's own O(h^2).
VectorField3 pullback_vector(const ConformalMap& map, const std::function<CVec3(const Vec3&)>& u,
                             const Grid3& target);

// Materials transported by the halfspace map pick up the conformal factor:
// sigma~(y) = |y|^{-2} sigma(F(y)), likewise mu.
struct TransformedMaterial {
  std::function<double(const Vec3&)> sigma;
  std::function<double(const Vec3&)> mu;
};
TransformedMaterial transform_material(const MaterialModel& m, const ConformalMap& map);

// Both sides of the Faraday-residual transformation law
//   curl~ E~ - i omega |y|^{-2} mu~ H~  =  |y|^{-2} DF (Res o F),
//   Res = curl E - i omega mu H,
// computed independently (left: stencil curl of the pulled-back fields;
// right: stencil residual on the source grid, mapped pointwise). For exact
// Maxwell pairs both sides are zero; for arbitrary smooth pairs they agree
// at O(h^2), which is the content of the pullback-invariance lemma.
struct ResidualLawReport {
  double lhs_norm = 0.0;
  double rhs_norm = 0.0;
  double gap_norm = 0.0;
  double rel_gap = 0.0;
};
ResidualLawReport residual_transform_check(const ConformalMap& map, const MaterialModel& m,
                                           const std::function<CVec3(const Vec3&)>& E,
                                           const std::function<CVec3(const Vec3&)>& H, double omega,
                                           const Grid3& target, const Grid3& source);

// nu~ = |y|^2 DF(y) nu(F(y)): unit by the orthogonality identity.
Vec3 transformed_normal(const ConformalMap& map, const Vec3& y, const Vec3& nu_source);

// Pointwise trace transformation nu~ x H~ = F*(nu x H) evaluated from both
// ends of the proof chain.
struct TraceTransformSample {
  CVec3 lhs{};
  CVec3 rhs{};
  double gap = 0.0;
};
TraceTransformSample transform_trace(const ConformalMap& map, const Vec3& y,
                                     const Vec3& nu_source, const CVec3& H_source);

}  // namespace mtlab::kelvin
