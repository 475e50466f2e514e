#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mtlab/field.hpp"

namespace mtlab {

// Matrix-free complex linear-operator solvers on flat coefficient vectors.
// Used for the fixed-point systems whose operators are FFT pipelines rather
// than assembled matrices.

using LinOp = std::function<void(const std::vector<cplx>& in, std::vector<cplx>& out)>;

struct KrylovStats {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  std::string method;
};

KrylovStats bicgstab(const LinOp& A, const std::vector<cplx>& b, std::vector<cplx>& x,
                     double tol = 1e-8, int max_iterations = 200);

// Richardson iteration x <- x - (A x - b); for A = I - K this sums the
// Neumann series of K. Fallback when the stronger solver stagnates.
KrylovStats richardson(const LinOp& A, const std::vector<cplx>& b, std::vector<cplx>& x,
                       double tol = 1e-8, int max_iterations = 400);

}  // namespace mtlab
