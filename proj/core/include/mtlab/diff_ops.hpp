#pragma once

#include "mtlab/field.hpp"

namespace mtlab {

// Second-order differentiation on the collocated grid: central differences in
// the interior, one-sided three-point stencils on the faces. Exact on
// quadratics everywhere, including boundary nodes.

ScalarField3 partial(const ScalarField3& f, int axis);
ScalarField3 partial2(const ScalarField3& f, int axis);  // second derivative, same order

VectorField3 grad(const ScalarField3& f);
VectorField3 curl(const VectorField3& u);
ScalarField3 divergence(const VectorField3& u);
ScalarField3 laplacian(const ScalarField3& f);

}  // namespace mtlab
