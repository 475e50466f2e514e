#include "mtlab/mirror.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mtlab/diff_ops.hpp"

namespace mtlab::mirror {

namespace {

void require_symmetric(const Grid3& g, const char* where) {
  const double center = g.origin[2] + 0.5 * g.extent[2];
  if (std::abs(center) > 1e-12 * std::max(1.0, g.extent[2]))
    throw std::invalid_argument(std::string(where) +
                                ": grid is not symmetric about the plane x3 = 0");
}

}  // namespace

ScalarField3 reflect(const ScalarField3& f) {
  require_symmetric(f.grid, "reflect");
  const Grid3& g = f.grid;
  ScalarField3 out(g);
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) out.at(i, j, k) = f.at(i, j, g.n[2] - 1 - k);
  return out;
}

VectorField3 reflect(const VectorField3& f) {
  require_symmetric(f.grid, "reflect");
  const Grid3& g = f.grid;
  VectorField3 out(g);
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) {
        const CVec3 v = f.vec(i, j, g.n[2] - 1 - k);
        out.set(i, j, k, {v[0], v[1], -v[2]});
      }
  return out;
}

std::size_t plane_layer(const Grid3& g) {
  require_symmetric(g, "plane_layer");
  if (g.n[2] % 2 == 0)
    throw std::invalid_argument("plane_layer: need an odd node count along x3 so a layer sits on "
                                "the plane");
  return (g.n[2] - 1) / 2;
}

double plane_tangential_sup(const VectorField3& f) {
  const std::size_t k = plane_layer(f.grid);
  const Grid3& g = f.grid;
  double sup = 0.0;
  for (std::size_t j = 0; j < g.n[1]; ++j)
    for (std::size_t i = 0; i < g.n[0]; ++i) {
      const CVec3 v = f.vec(i, j, k);
      sup = std::max(sup, std::sqrt(std::norm(v[0]) + std::norm(v[1])));
    }
  return sup;
}

MaterialModel even_extension(const MaterialModel& m) {
  std::vector<Bump> bumps;
  for (const Bump& b : m.bumps) {
    const double c3 = b.center[2];
    if (std::abs(c3) <= 1e-12) {
      bumps.push_back(b);  // centered on the plane: already its own mirror
      continue;
    }
    if (c3 > 0.0)
      throw std::invalid_argument(
          "even_extension: model must live in the lower half space x3 < 0");
    if (c3 + b.radius > 0.0)
      throw std::invalid_argument(
          "even_extension: bump crosses the plane and is not centered on it");
    bumps.push_back(b);
    Bump mirrored = b;
    mirrored.center[2] = -c3;
    bumps.push_back(mirrored);
  }
  return MaterialModel(m.sigma0, m.mu0, std::move(bumps));
}

namespace {

// Symmetric node grid from a periodic view: drop the wrap layer (index 0 on
// each axis), which leaves nodes at -w+h, ..., w-h. Even box counts give an
// odd node count with a layer exactly on each coordinate plane.
template <typename FieldLike>
Grid3 trimmed_grid(const FieldLike& f) {
  const Grid3& g = f.grid;
  std::array<std::size_t, 3> n{g.n[0] - 1, g.n[1] - 1, g.n[2] - 1};
  std::array<double, 3> origin, extent;
  for (int d = 0; d < 3; ++d) {
    const double h = g.spacing(d);
    origin[std::size_t(d)] = g.origin[std::size_t(d)] + h;
    extent[std::size_t(d)] = double(n[std::size_t(d)] - 1) * h;
  }
  return Grid3(origin, extent, n);
}

VectorField3 trim_wrap_layer(const VectorField3& f) {
  const Grid3 gt = trimmed_grid(f);
  VectorField3 out(gt);
  for (std::size_t k = 0; k < gt.n[2]; ++k)
    for (std::size_t j = 0; j < gt.n[1]; ++j)
      for (std::size_t i = 0; i < gt.n[0]; ++i) out.set(i, j, k, f.vec(i + 1, j + 1, k + 1));
  return out;
}

double sup_norm(const VectorField3& f) {
  double sup = 0.0;
  for (int c = 0; c < 3; ++c)
    for (const cplx& v : f.comp[std::size_t(c)]) sup = std::max(sup, std::abs(v));
  return sup;
}

double curlcurl_residual(const MaterialModel& m, const VectorField3& H, double omega) {
  const Grid3& g = H.grid;
  const VectorField3 cH = curl(H);
  VectorField3 E(g);
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) {
        const double s = m.sigma(g.point(i, j, k));
        const std::size_t idx = g.index(i, j, k);
        for (int c = 0; c < 3; ++c) E.comp[std::size_t(c)][idx] = cH.comp[std::size_t(c)][idx] / s;
      }
  const VectorField3 cE = curl(E);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) {
        const cplx iwmu = cplx(0.0, omega * m.mu(g.point(i, j, k)));
        const std::size_t idx = g.index(i, j, k);
        for (int c = 0; c < 3; ++c) {
          const cplx target = iwmu * H.comp[std::size_t(c)][idx];
          num += std::norm(cE.comp[std::size_t(c)][idx] - target);
          den += std::norm(target);
        }
      }
  return (den > 0.0) ? std::sqrt(num / den) : 0.0;
}

}  // namespace

ReflectedField build_reflected_cgo(const MaterialModel& m, const cgo::PhasePair& pair, int member,
                                   const cgo::CgoOptions& opts) {
  if (std::abs(pair.rho1[2]) < 1e-12)
    throw std::invalid_argument(
        "build_reflected_cgo: rho1 must have a nonzero third component (degenerate phase)");
  if (std::abs(pair.rho2[2]) > 1e-12)
    throw std::invalid_argument("build_reflected_cgo: rho2 must be tangent to the plane");
  if (opts.n % 2 != 0)
    throw std::invalid_argument("build_reflected_cgo: need an even box count so the trimmed node "
                                "grid has a plane layer");
  // evenness probe on a coarse lattice over the working box
  {
    const double w = opts.box_halfwidth;
    for (int a = -3; a <= 3; ++a)
      for (int b = -3; b <= 3; ++b)
        for (int c = 1; c <= 3; ++c) {
          const Vec3 x{w * a / 3.0, w * b / 3.0, w * c / 3.0};
          const Vec3 xs{x[0], x[1], -x[2]};
          if (std::abs(m.sigma(x) - m.sigma(xs)) > 1e-12 * m.sigma0 ||
              std::abs(m.mu(x) - m.mu(xs)) > 1e-12 * m.mu0)
            throw std::invalid_argument("build_reflected_cgo: material is not even in x3");
        }
  }

  const cgo::CgoSolution sol = cgo::build_cgo(m, pair, member, opts);
  if (sol.H.comp[0].empty())
    throw std::runtime_error(
        "build_reflected_cgo: phase not representable on this grid (guards failed), cannot "
        "materialize the field");

  ReflectedField out;
  out.original = trim_wrap_layer(sol.H);
  out.reflected = reflect(out.original);
  out.combined = VectorField3(out.original.grid);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < out.combined.comp[std::size_t(c)].size(); ++i)
      out.combined.comp[std::size_t(c)][i] =
          out.original.comp[std::size_t(c)][i] - out.reflected.comp[std::size_t(c)][i];

  out.trace_sup = plane_tangential_sup(out.combined);
  out.combined_sup = sup_norm(out.combined);
  out.curlcurl_residual = curlcurl_residual(m, out.combined, pair.omega);
  out.base_curlcurl_residual = curlcurl_residual(m, out.original, pair.omega);
  return out;
}

PhaseSplit phase_split(const cgo::PhasePair& pair) {
  if (std::abs(pair.rho1[2]) < 1e-12)
    throw std::invalid_argument(
        "phase_split: rho1 must have a nonzero third component (degenerate phase)");

  const double tau = pair.tau;
  const Vec3& xi = pair.xi;
  const double xi2 = dot(xi, xi);
  const double under = 1.0 - xi2 / (4.0 * tau * tau);
  if (!(under > 0.0)) throw std::invalid_argument("phase_split: tau too small, need |xi| < 2 tau");

  const double root0 = std::sqrt(under);
  const cplx root_full =
      std::sqrt(cplx(under, pair.omega * pair.sigma0 * pair.mu0 / (tau * tau)));

  PhaseSplit split;
  split.xi = xi;
  split.xi_star = {xi[0], xi[1], -xi[2]};
  split.xi_tilde_plus = {xi[0], xi[1], 2.0 * tau * root0 * pair.rho1[2]};
  split.xi_tilde_minus = {xi[0], xi[1], -2.0 * tau * root0 * pair.rho1[2]};

  const cplx denom = tau * (root_full + root0);
  const cplx coeff = 2.0 * pair.omega * pair.sigma0 * pair.mu0 * pair.rho1[2] / denom;
  split.eta_plus_coeff = coeff;
  split.eta_minus_coeff = -coeff;
  split.real_exponent_plus = -2.0 * tau * pair.rho2[2];
  split.real_exponent_minus = 2.0 * tau * pair.rho2[2];
  return split;
}

identity::IdentityReport local_integral_identity(const MaterialModel& m1, const MaterialModel& m2,
                                                 const VectorField3& H1, const VectorField3& H2,
                                                 double omega) {
  check_same_grid(H1.grid, H2.grid, "local_integral_identity");
  const std::size_t mid = plane_layer(H1.grid);

  const double leak1 = plane_tangential_sup(H1) / std::max(sup_norm(H1), 1e-300);
  const double leak2 = plane_tangential_sup(H2) / std::max(sup_norm(H2), 1e-300);
  if (leak1 > 1e-2 || leak2 > 1e-2)
    throw std::runtime_error(
        "local_integral_identity: tangential trace leaks on the plane (relative " +
        std::to_string(std::max(leak1, leak2)) + ", bound 1e-2)");

  // restrict to the lower half x3 <= 0, plane layer included as the top face
  const Grid3& g = H1.grid;
  const Grid3 low({g.origin[0], g.origin[1], g.origin[2]},
                  {g.extent[0], g.extent[1], double(mid) * g.spacing(2)},
                  {g.n[0], g.n[1], mid + 1});
  VectorField3 H1l(low), H2l(low);
  for (std::size_t k = 0; k <= mid; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) {
        H1l.set(i, j, k, H1.vec(i, j, k));
        H2l.set(i, j, k, H2.vec(i, j, k));
      }
  return identity::integral_identity(m1, m2, H1l, H2l, omega);
}

}  // namespace mtlab::mirror
