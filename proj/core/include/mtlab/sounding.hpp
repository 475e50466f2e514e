#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mtlab/field.hpp"

namespace mtlab::sounding {

// One-dimensional magnetotelluric sounding: plane-wave fields over a
// conductivity profile sigma(z), z >= 0 pointing down, with constant mu.
// The scalar surface impedance Z = E1/H2 obeys the Riccati equation
//   dZ/dz = i omega mu + sigma(z) Z^2,
// integrated upward from a uniform basement where Z equals the intrinsic
// value sqrt(-i omega mu / sigma). Phase convention: a uniform half space
// gives arg Z = -45 degrees.

cplx halfspace_impedance(double sigma, double mu, double omega);

// Riccati integration over a smooth profile. The step count is chosen from
// the diffusive scale automatically when steps = 0.
cplx surface_impedance(const std::function<double(double)>& sigma_of_z, double mu, double omega,
                       double depth, int steps = 0);

struct LayeredModel {
  std::vector<double> sigma;      // top to bottom; last entry is the basement
  std::vector<double> thickness;  // one fewer than sigma
  double mu = 1.0;

  void validate() const;
  double total_thickness() const;
  double sigma_at(double z) const;
};

struct SoundingPoint {
  double omega = 0.0;
  cplx z{};
  double rho_a = 0.0;  // |Z|^2 / (omega mu)
  double phase_deg = 0.0;
};

// Impedance computed segment by segment so each RK4 run sees a smooth
// integrand; the basement closure sits below the last interface plus a few
// skin depths.
SoundingPoint sound_at(const LayeredModel& m, double omega);
std::vector<SoundingPoint> sounding_curve(const LayeredModel& m,
                                          const std::vector<double>& omegas);

// CSV: header omega,rho_a,phase_deg then one row per frequency.
void write_sounding_csv(const std::string& path, const std::vector<SoundingPoint>& curve);

}  // namespace mtlab::sounding
