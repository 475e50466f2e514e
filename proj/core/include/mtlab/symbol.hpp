#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mtlab/impedance.hpp"
#include "mtlab/material.hpp"

namespace mtlab::symbol {

// Boundary calculus for the impedance map in adapted coordinates: the
// boundary is flat, the domain sits in {x3 > 0}, and the outward normal is
// nu = (0,0,-1). Everything below is phrased in that frame; callers on other
// box faces translate via the face helpers.

// First-order tangential part M(x, xi') and the d3-coefficient N(x) of the
// rewritten second-order system. M is linear in xi' = (xi1, xi2); it is
// stored as the pair of coefficient matrices so M(xi') = xi1 M1 + xi2 M2.
struct BoundaryMatrices {
  std::array<double, 9> M1{};
  std::array<double, 9> M2{};
  std::array<double, 9> N{};
  Vec3 point{};

  std::array<double, 9> M(double xi1, double xi2) const {
    std::array<double, 9> out{};
    for (std::size_t i = 0; i < 9; ++i) out[i] = xi1 * M1[i] + xi2 * M2[i];
    return out;
  }
};
BoundaryMatrices boundary_matrices(const MaterialModel& m, const Vec3& boundary_point);

// Principal symbol of the impedance map,
//   (1 / (sigma |xi'|)) [ xi1 xi2   xi2^2 ;  -xi1^2   -xi1 xi2 ],
// acting on the (e1, e2) coefficients of nu x H. Nilpotent, traceless,
// rank <= 1, homogeneous of degree one.
Eigen::Matrix2cd principal_symbol_Z(double sigma_boundary, double xi1, double xi2);

// Numerical check of the leading factorization coefficient: solve the full
// three-component second-order system along the inward normal line for a
// tangential mode e^{i xi' . x'}, then compare the logarithmic derivative of
// the solution at the boundary with -|xi'|. The system keeps M, N, the
// Hessian of log mu and the i omega sigma mu term, so the measured deviation
// carries the genuine O(1/|xi'|) remainder.
struct ProbeOptions {
  double omega = 1.0;
  int nodes = 4001;          // resolution of the normal-line solve
  double depth_factor = 24;  // domain depth in units of 1/|xi'|
};
struct ProbeRung {
  double xi_norm = 0.0;
  std::array<cplx, 3> ratio{};     // d3 H_j / H_j at the boundary
  double max_rel_deviation = 0.0;  // max_j |ratio_j + |xi'|| / |xi'|
};
std::vector<ProbeRung> factorization_probe(const MaterialModel& m, const Vec3& boundary_point,
                                           const std::vector<std::array<double, 2>>& xi_ladder,
                                           const ProbeOptions& opts = {});

// Boundary conductivity read off an assembled impedance matrix by entrywise
// inversion of the principal-symbol relation, per tangential mode. Entries
// of the symbol below a quarter of its largest magnitude are masked.
struct SigmaRecovery {
  std::vector<double> xi_norms;
  std::vector<double> estimates;
  double sigma_estimate = 0.0;  // estimate at the last (highest) rung
};
SigmaRecovery recover_boundary_sigma(const ImpedanceMatrix& Z, const Grid3& g, Face face,
                                     const std::vector<std::array<int, 2>>& mode_ladder);

// Impedance matrix whose per-mode blocks are the principal symbol itself;
// recover_boundary_sigma on this is an exact round trip.
ImpedanceMatrix synthetic_symbol_impedance(double sigma, double omega, const Grid3& g,
                                           const BasisSpec& basis);

// Classical apparent resistivity of a 2x2 impedance block: the scalar
// impedance is the antisymmetric off-diagonal part, rho_a = |z|^2/(omega mu).
// Diagonal leakage above 20% of the off-diagonal scale only raises a flag;
// the numbers are still reported.
struct RhoA {
  cplx z_scalar{};
  double rho_a = 0.0;
  double phase_deg = 0.0;
  double diag_leakage = 0.0;
  bool structure_warning = false;
};
RhoA apparent_resistivity(const Eigen::Matrix2cd& Zblock, double omega, double mu_boundary);

}  // namespace mtlab::symbol
