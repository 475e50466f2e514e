#pragma once

#include "mtlab/field.hpp"

namespace mtlab {

// Parameters of the weighted L² norm  ||f||² = ∫ (1+|x|²)^δ |f|² dx,
// quadrature by the tensor-product trapezoid rule on the field's grid.
// The admissible window is -1 < δ < 0; shifted=true evaluates the companion
// norm with weight exponent δ+1 that appears on source terms.
struct WeightedNormParams {
  double delta = -0.5;
  bool shifted = false;

  void validate() const {
    if (!(delta > -1.0 && delta < 0.0))
      throw std::invalid_argument(
          "WeightedNormParams: delta must lie in (-1, 0), got " + std::to_string(delta));
  }
};

double trapezoid_weight(const Grid3& g, std::size_t i, std::size_t j, std::size_t k);

double weighted_norm(const ScalarField3& f, const WeightedNormParams& p);
double weighted_norm(const VectorField3& f, const WeightedNormParams& p);

// Unweighted discrete L² norm (trapezoid), and the plain integral.
double l2_norm(const ScalarField3& f);
double l2_norm(const VectorField3& f);
cplx integrate(const ScalarField3& f);

}  // namespace mtlab
