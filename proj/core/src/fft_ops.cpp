#include "mtlab/fft_ops.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace mtlab {

void PeriodicBox::validate() const {
  for (int d = 0; d < 3; ++d) {
    if (n[std::size_t(d)] < 4) throw std::invalid_argument("PeriodicBox: need at least 4 samples per axis");
    if (!(length[std::size_t(d)] > 0.0)) throw std::invalid_argument("PeriodicBox: length must be positive");
  }
}

PeriodicBox PeriodicBox::cube(const Vec3& c, double L, std::size_t nside) {
  PeriodicBox b;
  b.origin = {c[0] - L / 2, c[1] - L / 2, c[2] - L / 2};
  b.length = {L, L, L};
  b.n = {nside, nside, nside};
  b.validate();
  return b;
}

CField sample_box(const PeriodicBox& b, const std::function<cplx(const Vec3&)>& f) {
  CField out(b.size());
  for (std::size_t k = 0; k < b.n[2]; ++k)
    for (std::size_t j = 0; j < b.n[1]; ++j)
      for (std::size_t i = 0; i < b.n[0]; ++i) out[b.index(i, j, k)] = f(b.point(i, j, k));
  return out;
}

CField3 sample_box3(const PeriodicBox& b, const std::function<CVec3(const Vec3&)>& f) {
  CField3 out{CField(b.size()), CField(b.size()), CField(b.size())};
  for (std::size_t k = 0; k < b.n[2]; ++k)
    for (std::size_t j = 0; j < b.n[1]; ++j)
      for (std::size_t i = 0; i < b.n[0]; ++i) {
        const CVec3 v = f(b.point(i, j, k));
        const std::size_t m = b.index(i, j, k);
        for (int c = 0; c < 3; ++c) out[std::size_t(c)][m] = v[std::size_t(c)];
      }
  return out;
}

cplx box_integral(const PeriodicBox& b, const CField& f) {
  cplx s = 0.0;
  for (const cplx& v : f) s += v;
  return s * b.cell_volume();
}

double box_l2_norm(const PeriodicBox& b, const CField& f) {
  double s = 0.0;
  for (const cplx& v : f) s += std::norm(v);
  return std::sqrt(s * b.cell_volume());
}

double box_l2_norm(const PeriodicBox& b, const CField3& f) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    for (const cplx& v : f[std::size_t(c)]) s += std::norm(v);
  return std::sqrt(s * b.cell_volume());
}

double fft_freq(const PeriodicBox& b, int axis, std::size_t m) {
  const std::size_t nd = b.n[std::size_t(axis)];
  const long half = long(nd + 1) / 2;
  const long mp = (long(m) < half) ? long(m) : long(m) - long(nd);
  return 2.0 * M_PI * double(mp) / b.length[std::size_t(axis)];
}

Vec3 half_shift(const PeriodicBox& b) {
  return {M_PI / b.length[0], M_PI / b.length[1], M_PI / b.length[2]};
}

namespace {

// One ESTIMATE plan per (shape, direction), made against a scratch buffer
// with FFTW_UNALIGNED so it can be executed on any caller array.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }

  fftw_plan get(const std::array<std::size_t, 3>& n, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    const Key key{long(n[0]), long(n[1]), long(n[2]), long(sign)};
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    const std::size_t sz = n[0] * n[1] * n[2];
    fftw_complex* scratch = fftw_alloc_complex(sz);
    if (!scratch) throw std::bad_alloc();
    // fftw uses row-major order; our storage is x-fastest, so x is the last
    // fftw dimension.
    fftw_plan p = fftw_plan_dft_3d(int(n[2]), int(n[1]), int(n[0]), scratch, scratch, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (!p) throw std::runtime_error("fft3: fftw plan creation failed");
    plans_.emplace(key, p);
    return p;
  }

 private:
  using Key = std::array<long, 4>;
  PlanCache() = default;
  ~PlanCache() {
    for (auto& kv : plans_) fftw_destroy_plan(kv.second);
  }
  std::mutex mu_;
  std::map<Key, fftw_plan> plans_;
};

}  // namespace

void fft3(const PeriodicBox& b, CField& data, bool inverse) {
  if (data.size() != b.size()) throw std::invalid_argument("fft3: field size does not match box");
  fftw_plan p = PlanCache::instance().get(b.n, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, ptr, ptr);
  if (inverse) {
    const double inv = 1.0 / double(b.size());
    for (cplx& v : data) v *= inv;
  }
}

CField apply_multiplier(const PeriodicBox& b, const CField& in,
                        const std::function<cplx(const Vec3&)>& m, const Vec3& delta) {
  CField out = in;
  fft3(b, out, false);
  for (std::size_t k = 0; k < b.n[2]; ++k) {
    const double kz = fft_freq(b, 2, k) + delta[2];
    for (std::size_t j = 0; j < b.n[1]; ++j) {
      const double ky = fft_freq(b, 1, j) + delta[1];
      for (std::size_t i = 0; i < b.n[0]; ++i) {
        const double kx = fft_freq(b, 0, i) + delta[0];
        out[b.index(i, j, k)] *= m({kx, ky, kz});
      }
    }
  }
  fft3(b, out, true);
  return out;
}

CField spectral_partial(const PeriodicBox& b, const CField& in, int axis, const Vec3& delta) {
  return apply_multiplier(
      b, in, [axis](const Vec3& k) { return cplx(0.0, k[std::size_t(axis)]); }, delta);
}

CField convolve_periodic(const PeriodicBox& b, const CField& f, const CField& g) {
  if (f.size() != b.size() || g.size() != b.size())
    throw std::invalid_argument("convolve_periodic: field size does not match box");
  CField fh = f, gh = g;
  fft3(b, fh, false);
  fft3(b, gh, false);
  const double scale = b.cell_volume();
  for (std::size_t m = 0; m < fh.size(); ++m) fh[m] *= gh[m] * scale;
  fft3(b, fh, true);
  return fh;
}

}  // namespace mtlab

namespace mtlab {

PeriodicBox box_of_grid(const Grid3& g) {
  PeriodicBox b;
  b.origin = g.origin;
  for (int d = 0; d < 3; ++d)
    b.length[std::size_t(d)] = g.extent[std::size_t(d)] * double(g.n[std::size_t(d)]) /
                               double(g.n[std::size_t(d)] - 1);
  b.n = g.n;
  b.validate();
  return b;
}

Grid3 view_grid(const PeriodicBox& b) {
  Grid3 g;
  g.origin = b.origin;
  for (int d = 0; d < 3; ++d)
    g.extent[std::size_t(d)] = b.length[std::size_t(d)] * double(b.n[std::size_t(d)] - 1) /
                               double(b.n[std::size_t(d)]);
  g.n = b.n;
  g.validate();
  return g;
}

CField modulated(const PeriodicBox& b, const CField& u, const Vec3& delta, double sign) {
  if (u.size() != b.size()) throw std::invalid_argument("modulated: field size does not match box");
  CField out(u.size());
  for (std::size_t k = 0; k < b.n[2]; ++k)
    for (std::size_t j = 0; j < b.n[1]; ++j)
      for (std::size_t i = 0; i < b.n[0]; ++i) {
        const Vec3 x = b.point(i, j, k);
        const std::size_t idx = b.index(i, j, k);
        out[idx] = u[idx] * std::exp(cplx(0.0, sign * dot(delta, x)));
      }
  return out;
}

}  // namespace mtlab
