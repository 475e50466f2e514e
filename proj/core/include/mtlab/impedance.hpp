#pragma once

#include <Eigen/Dense>

#include "mtlab/forward.hpp"

namespace mtlab {

// Impedance map Z: t(H) |-> t(E), assembled column by column against a
// per-face basis of tangential exponential modes
//   f_{face,dir,ka,kb}(x') = exp(2 pi i (ka*u + kb*v)) * e_dir,
// u,v in [0,1] normalized in-plane coordinates, e_dir one of the two in-plane
// axis directions. Mode order: faces as listed, then dir, then kb, then ka
// (each from -kmax to kmax); this order is the serialization order.

struct BasisSpec {
  std::vector<Face> faces{Face::ZPlus};
  int kmax = 1;

  std::size_t modes_per_face() const {
    const std::size_t m = 2 * std::size_t(kmax) + 1;
    return 2 * m * m;
  }
  std::size_t size() const { return faces.size() * modes_per_face(); }
};

struct BasisMode {
  Face face;
  int dir;  // 0 or 1: in-plane axis index within the face
  int ka, kb;
};

std::vector<BasisMode> basis_modes(const BasisSpec& spec);
TangentialTrace basis_trace(const Grid3& g, const BasisMode& mode);

struct ImpedanceMatrix {
  BasisSpec basis;
  double omega = 0.0;
  std::array<std::size_t, 3> n{0, 0, 0};  // grid shape Z was assembled on
  Eigen::MatrixXcd Z;
};

ImpedanceMatrix impedance_map(const MaterialModel& m, double omega, const Grid3& grid,
                              const BasisSpec& basis, const SolveOptions& opts = {});

// Expand a tangential field in the basis restricted to one face (trapezoid
// projection onto the modes).
Eigen::VectorXcd project_onto_basis(const TangentialTrace& t, const BasisSpec& spec);

// CSV: one matrix row per line, each entry as "re,im" (two cells per entry).
void write_impedance_csv(const std::string& path, const ImpedanceMatrix& Z);
ImpedanceMatrix read_impedance_csv(const std::string& path, const ImpedanceMatrix& like);
// Binary: f64 (re,im) pairs row-major, JSON sidecar {basis, omega, n}.
void write_impedance_binary(const std::string& path_base, const ImpedanceMatrix& Z);
ImpedanceMatrix read_impedance_binary(const std::string& path_base);

}  // namespace mtlab
