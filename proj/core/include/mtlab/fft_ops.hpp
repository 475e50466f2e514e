#pragma once

#include <array>
#include <functional>
#include <vector>

#include "mtlab/field.hpp"

namespace mtlab {

// Uniform periodic box: n[d] samples per axis at spacing length[d]/n[d], no
// duplicated endpoint. Every FFT-based operator in the library samples on
// this convention (the node-centered Grid3 is for boundary-value work).
struct PeriodicBox {
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  std::array<double, 3> length{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> n{8, 8, 8};

  void validate() const;
  double spacing(int d) const { return length[std::size_t(d)] / double(n[std::size_t(d)]); }
  std::size_t size() const { return n[0] * n[1] * n[2]; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + n[0] * (j + n[1] * k);
  }
  Vec3 point(std::size_t i, std::size_t j, std::size_t k) const {
    return {origin[0] + double(i) * spacing(0), origin[1] + double(j) * spacing(1),
            origin[2] + double(k) * spacing(2)};
  }
  double cell_volume() const { return spacing(0) * spacing(1) * spacing(2); }

  // Cube centered at c with side L.
  static PeriodicBox cube(const Vec3& c, double L, std::size_t nside);
};

using CField = std::vector<cplx>;
using CField3 = std::array<std::vector<cplx>, 3>;

CField sample_box(const PeriodicBox& b, const std::function<cplx(const Vec3&)>& f);
CField3 sample_box3(const PeriodicBox& b, const std::function<CVec3(const Vec3&)>& f);

// Plain-integral quadrature h^3 * sum (spectrally accurate for periodic or
// compactly supported integrands).
cplx box_integral(const PeriodicBox& b, const CField& f);
double box_l2_norm(const PeriodicBox& b, const CField& f);
double box_l2_norm(const PeriodicBox& b, const CField3& f);

// Frequency of bin m on the given axis: 2 pi m'/L with m' wrapped to
// [-n/2, n/2).
double fft_freq(const PeriodicBox& b, int axis, std::size_t m);

// Half-bin lattice offset pi/L per axis. Derivative and inverse-symbol
// multipliers evaluated at k + half_shift() live on the half-integer lattice,
// which never contains k = 0 (fields are then stored demodulated, i.e. as
// u(x) exp(-i shift.x)).
Vec3 half_shift(const PeriodicBox& b);

// In-place unnormalized forward / 1/N-normalized inverse 3-D FFT. Plans are
// created once per shape with FFTW_ESTIMATE under a global mutex, so repeated
// runs are bit-reproducible and plan creation is thread-safe.
void fft3(const PeriodicBox& b, CField& data, bool inverse);

// out = F^{-1}[ m(k + delta) F[in] ].
CField apply_multiplier(const PeriodicBox& b, const CField& in,
                        const std::function<cplx(const Vec3&)>& m, const Vec3& delta = {0, 0, 0});

// Spectral d/dx_axis on the shifted lattice: multiplier i (k_axis + delta_axis).
CField spectral_partial(const PeriodicBox& b, const CField& in, int axis,
                        const Vec3& delta = {0, 0, 0});

// Periodic grid convolution u(x) = h^3 sum_y f(y) g(x - y), the discrete
// surrogate of integral convolution against a sampled kernel.
CField convolve_periodic(const PeriodicBox& b, const CField& f, const CField& g);

// Node-compatible conversions between the two grid conventions. box_of_grid
// keeps every node of g and wraps one spacing past the last one, so field
// data moves between the representations as a plain copy.
PeriodicBox box_of_grid(const Grid3& g);
Grid3 view_grid(const PeriodicBox& b);

// u(x) * exp(i sign delta.x), the modulation that moves fields between the
// integer and half-shifted spectral lattices.
CField modulated(const PeriodicBox& b, const CField& u, const Vec3& delta, double sign);

}  // namespace mtlab
