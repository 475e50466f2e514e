#pragma once

#include <Eigen/Sparse>
#include <optional>

#include "mtlab/material.hpp"
#include "mtlab/trace.hpp"

namespace mtlab {

// Discretization of curl(sigma^{-1} curl H) - i omega mu H on the collocated
// grid, written in the expanded form s*grad(div H) - s*lap H + grad(s) x curl H
// - i omega mu H with s = 1/sigma and analytic coefficient derivatives.
// Row layout, interleaved by component (dof = 3*node + comp):
//   interior nodes   : PDE rows for all three components
//   face nodes       : Dirichlet rows for the two in-plane components of H,
//                      a one-sided div(mu H) = g closure row for the normal one
//   edge/corner nodes: Dirichlet rows for all three components
// The closure row is the divergence consequence of Faraday's law; g = 0 for
// the homogeneous problem and -div(J_m)/(i omega) when magnetic sources act.

enum class RowKind : unsigned char { Interior, Dirichlet, DivClosure };

struct ForwardOperator {
  Grid3 grid;
  MaterialModel material;
  double omega = 1.0;
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> A;
  std::vector<RowKind> row_kind;  // per dof

  std::size_t dofs() const { return 3 * grid.size(); }
  VectorField3 apply(const VectorField3& u) const;
};

ForwardOperator assemble_curlcurl(const MaterialModel& m, double omega, const Grid3& grid);

// Boundary data: one tangential trace t(H) = nu x H per face. Edge and corner
// nodes take H values reconstructed from adjacent faces in enum order (first
// claim per component wins, so consistent data reconstructs exactly).
struct BoundaryData {
  std::array<TangentialTrace, 6> faces;

  static BoundaryData zero(const Grid3& g);
  // Sample t(H) from an analytic field on every face.
  static BoundaryData from_field(const Grid3& g, const std::function<CVec3(const Vec3&)>& H);
  double max_abs() const;
};

struct SolveStats {
  std::string method;     // "sparse-lu" or "bicgstab-jacobi"
  int iterations = 0;     // 0 for direct solves
  double rel_residual = 0.0;
};

struct MaxwellSolution {
  VectorField3 H;
  VectorField3 E;  // sigma^{-1} (curl H - J_e)
  double faraday_residual = 0.0;       // ||curl E - i omega mu H - J_m|| (discrete L2)
  double faraday_residual_rel = 0.0;   // relative to ||i omega mu H||
  double ampere_residual = 0.0;        // ||curl H - sigma E - J_e||
  SolveStats stats;
};

struct SolveOptions {
  double tol = 1e-10;           // Krylov relative tolerance
  int max_iterations = 4000;
  std::size_t direct_dof_limit = 16000;  // use sparse LU at or below this size
};

MaxwellSolution solve_forward(const ForwardOperator& op, const BoundaryData& bc,
                              const SolveOptions& opts = {});
MaxwellSolution solve_forward(const MaterialModel& m, double omega, const Grid3& grid,
                              const BoundaryData& bc, const SolveOptions& opts = {});

// Interior sources: curl(sigma^{-1} curl H) - i omega mu H = J_m + curl(sigma^{-1} J_e),
// homogeneous tangential trace. E recovers as sigma^{-1}(curl H - J_e).
MaxwellSolution solve_forward_sources(const MaterialModel& m, double omega, const Grid3& grid,
                                      const VectorField3& J_e, const VectorField3& J_m,
                                      const SolveOptions& opts = {});

// Resonance screen: 1-norm condition estimates of the assembled operator over
// an omega sweep (direct factorization + Hager-style inverse-norm estimate).
struct ResonanceProbePoint {
  double omega = 0.0;
  double cond_estimate = 0.0;
  bool flagged = false;
};
std::vector<ResonanceProbePoint> resonance_probe(const MaterialModel& m, const Grid3& grid,
                                                 const std::vector<double>& omegas,
                                                 double flag_threshold = 1e10);

}  // namespace mtlab
