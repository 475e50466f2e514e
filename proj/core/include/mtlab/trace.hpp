#pragma once

#include "mtlab/field.hpp"

namespace mtlab {

// Tangential trace t(u) = nu x u restricted to one box face. The cross
// product of the outward normal with any vector lies in the face plane, so
// only the two in-plane components (in increasing axis order) are stored.
struct TangentialTrace {
  Face face = Face::ZMinus;
  Grid3 grid;                            // the volume grid this trace belongs to
  std::array<std::vector<cplx>, 2> values;  // in-plane components, a-fastest

  TangentialTrace() = default;
  TangentialTrace(Face f, const Grid3& g);

  std::array<std::size_t, 2> shape() const;
  std::size_t index(std::size_t ia, std::size_t ib) const;
  std::size_t size() const { return values[0].size(); }
  Vec3 normal() const { return face_normal(face); }
  Vec3 point(std::size_t ia, std::size_t ib) const;

  // Full 3-vector at a face node; the face-normal component is zero.
  CVec3 vec3(std::size_t ia, std::size_t ib) const;
  void set_vec3(std::size_t ia, std::size_t ib, const CVec3& t);

  double max_abs() const;
};

// t(u) = nu x u on the given face of u's grid.
TangentialTrace tangential_trace(const VectorField3& u, Face face);

// Surface divergence of the stored tangential components: d_a t_a + d_b t_b
// with the same second-order stencils as the volume operators.
std::vector<cplx> surface_divergence(const TangentialTrace& t);

}  // namespace mtlab
