#include "mtlab/identity.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "mtlab/diff_ops.hpp"
#include "mtlab/fft_ops.hpp"
#include "mtlab/norms.hpp"

namespace mtlab::identity {

namespace {

// Trapezoid-rule error proxy: sum_d (h_d^2 / 12) Int |d^2 F / dx_d^2|.
// Deliberately pessimistic for smooth compactly supported integrands, where
// the rule superconverges, but it scales at the right O(h^2) rate.
double quadrature_error_estimate(const ScalarField3& F) {
  double est = 0.0;
  for (int d = 0; d < 3; ++d) {
    const ScalarField3 dd = partial2(F, d);
    double acc = 0.0;
    const Grid3& g = F.grid;
    for (std::size_t k = 0; k < g.n[2]; ++k)
      for (std::size_t j = 0; j < g.n[1]; ++j)
        for (std::size_t i = 0; i < g.n[0]; ++i)
          acc += trapezoid_weight(g, i, j, k) * std::abs(dd.at(i, j, k));
    const double h = g.spacing(d);
    est += h * h / 12.0 * acc;
  }
  return est;
}

cplx trapezoid_sum(const ScalarField3& F) { return integrate(F); }

}  // namespace

IdentityReport integral_identity(const MaterialModel& m1, const MaterialModel& m2,
                                 const VectorField3& H1, const VectorField3& H2, double omega) {
  check_same_grid(H1.grid, H2.grid, "integral_identity");
  if (!(omega > 0.0)) throw std::invalid_argument("integral_identity: omega must be positive");

  const Grid3& g = H1.grid;
  const VectorField3 c1 = curl(H1);
  const VectorField3 c2 = curl(H2);
  const cplx inv_iw = 1.0 / cplx(0.0, omega);

  ScalarField3 Fmu(g), Fsig(g), Ftot(g);
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) {
        const Vec3 x = g.point(i, j, k);
        const double s1 = m1.sigma(x), s2 = m2.sigma(x);
        const cplx mu_term = (m1.mu(x) - m2.mu(x)) * dot(H1.vec(i, j, k), H2.vec(i, j, k));
        const cplx sig_term =
            inv_iw * ((s1 - s2) / (s1 * s2)) * dot(c1.vec(i, j, k), c2.vec(i, j, k));
        Fmu.at(i, j, k) = mu_term;
        Fsig.at(i, j, k) = sig_term;
        Ftot.at(i, j, k) = mu_term + sig_term;
      }

  IdentityReport rep;
  const cplx vmu = trapezoid_sum(Fmu);
  const cplx vsig = trapezoid_sum(Fsig);
  rep.term_breakdown.emplace_back("mu_pairing", vmu);
  rep.term_breakdown.emplace_back("sigma_pairing", vsig);
  rep.value = vmu + vsig;
  rep.quadrature_error = quadrature_error_estimate(Ftot);
  return rep;
}

IbpReport integration_by_parts_check(const VectorField3& u, const VectorField3& v) {
  check_same_grid(u.grid, v.grid, "integration_by_parts_check");
  const Grid3& g = u.grid;
  const VectorField3 cu = curl(u);
  const VectorField3 cv = curl(v);

  ScalarField3 F(g);
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i)
        F.at(i, j, k) = dot(cu.vec(i, j, k), v.vec(i, j, k)) -
                        dot(u.vec(i, j, k), cv.vec(i, j, k));
  const cplx volume = trapezoid_sum(F);

  // surface term: per face, 2-D trapezoid of (nu x u).v
  cplx boundary(0.0);
  for (Face f : all_faces) {
    const int ax = face_axis(f);
    const auto [ta, tb] = face_tangent_axes(f);
    const std::size_t fixed = (face_sign(f) > 0) ? g.n[std::size_t(ax)] - 1 : 0;
    const CVec3 nu = to_cvec(face_normal(f));
    const double ha = g.spacing(ta), hb = g.spacing(tb);
    cplx acc(0.0);
    for (std::size_t b = 0; b < g.n[std::size_t(tb)]; ++b)
      for (std::size_t a = 0; a < g.n[std::size_t(ta)]; ++a) {
        std::size_t ijk[3];
        ijk[std::size_t(ax)] = fixed;
        ijk[std::size_t(ta)] = a;
        ijk[std::size_t(tb)] = b;
        double w = ha * hb;
        if (a == 0 || a + 1 == g.n[std::size_t(ta)]) w *= 0.5;
        if (b == 0 || b + 1 == g.n[std::size_t(tb)]) w *= 0.5;
        const CVec3 uv = u.vec(ijk[0], ijk[1], ijk[2]);
        const CVec3 vv = v.vec(ijk[0], ijk[1], ijk[2]);
        acc += w * dot(cross(nu, uv), vv);
      }
    boundary += acc;
  }

  IbpReport rep;
  rep.volume = volume;
  rep.boundary = boundary;
  rep.abs_gap = std::abs(volume - boundary);
  return rep;
}

namespace {

struct ScanWeights {
  ScalarField3 g_sigma;  // (s1 - s2) (s1 s2)^{-1/2} e^{Psi1+Psi2}
  ScalarField3 g_mu;     // (mu1 - mu2) e^{Psi2}
};

ScanWeights build_scan_weights(const MaterialModel& m1, const MaterialModel& m2, const Grid3& g,
                               const Vec3& rho1, const Vec3& rho2) {
  const auto logs = [&g](const MaterialModel& m, ScalarField3& a, ScalarField3& b) {
    a = ScalarField3::sample(g, [&m](const Vec3& x) { return cplx(m.alpha(x)); });
    b = ScalarField3::sample(g, [&m](const Vec3& x) { return cplx(m.beta(x)); });
  };
  ScalarField3 a1, b1, a2, b2;
  logs(m1, a1, b1);
  logs(m2, a2, b2);
  const ScalarField3 psi1 = cgo::transport_phase(a1, b1, rho1, rho2);
  const ScalarField3 psi2 = cgo::transport_phase(a2, b2, rho1, rho2);

  ScanWeights w{ScalarField3(g), ScalarField3(g)};
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) {
        const Vec3 x = g.point(i, j, k);
        const double s1 = m1.sigma(x), s2 = m2.sigma(x);
        w.g_sigma.at(i, j, k) =
            (s1 - s2) / std::sqrt(s1 * s2) * std::exp(psi1.at(i, j, k) + psi2.at(i, j, k));
        w.g_mu.at(i, j, k) = (m1.mu(x) - m2.mu(x)) * std::exp(psi2.at(i, j, k));
      }
  return w;
}

cplx modulated_integral(const ScalarField3& gfield, const Vec3& xi) {
  const Grid3& g = gfield.grid;
  cplx acc(0.0);
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) {
        const Vec3 x = g.point(i, j, k);
        const cplx phase = std::exp(cplx(0.0, dot(xi, x)));
        acc += trapezoid_weight(g, i, j, k) * phase * gfield.at(i, j, k);
      }
  return acc;
}

}  // namespace

FourierScan fourier_functional(const MaterialModel& m1, const MaterialModel& m2,
                               const std::vector<Vec3>& xi_grid, FourierTarget /*target*/,
                               const ScanOptions& opts) {
  if (xi_grid.empty()) throw std::invalid_argument("fourier_functional: empty xi grid");
  const Grid3 g = Grid3::cube(-opts.halfwidth, opts.halfwidth, opts.n);

  FourierScan scan;
  scan.xi_grid = xi_grid;
  scan.values_sigma.resize(xi_grid.size());
  scan.values_mu.resize(xi_grid.size());

  if (opts.fixed_frame) {
    Vec3 r1 = opts.rho1, r2 = opts.rho2;
    if (norm2(r1) == 0.0 || norm2(r2) == 0.0) {
      Vec3 seed{0.0, 0.0, 0.0};
      for (const Vec3& xi : xi_grid)
        if (norm2(xi) > 1e-14) {
          seed = xi;
          break;
        }
      cgo::frame_for_xi(seed, r1, r2);
    }
    scan.rho1 = r1;
    scan.rho2 = r2;
    scan.fixed_frame = true;

    const ScanWeights w = build_scan_weights(m1, m2, g, r1, r2);
    for (std::size_t q = 0; q < xi_grid.size(); ++q) {
      scan.values_sigma[q] = modulated_integral(w.g_sigma, xi_grid[q]);
      scan.values_mu[q] = modulated_integral(w.g_mu, xi_grid[q]);
    }
  } else {
    for (std::size_t q = 0; q < xi_grid.size(); ++q) {
      Vec3 r1, r2;
      cgo::frame_for_xi(xi_grid[q], r1, r2);
      const ScanWeights w = build_scan_weights(m1, m2, g, r1, r2);
      scan.values_sigma[q] = modulated_integral(w.g_sigma, xi_grid[q]);
      scan.values_mu[q] = modulated_integral(w.g_mu, xi_grid[q]);
    }
  }
  return scan;
}

ScalarField3 recover_sigma_difference(const FourierScan& scan, const MaterialModel& weight_model,
                                      const ScanOptions& opts) {
  if (!scan.fixed_frame)
    throw std::invalid_argument(
        "recover_sigma_difference: scan was built with per-xi frames; the recovery weight needs "
        "one fixed frame");
  if (scan.values_sigma.size() != scan.xi_grid.size())
    throw std::invalid_argument("recover_sigma_difference: scan arrays out of step with xi grid");

  const PeriodicBox box = PeriodicBox::cube({0.0, 0.0, 0.0}, 2.0 * opts.halfwidth, opts.n);
  const double L = box.length[0];
  const double dxi = 2.0 * M_PI / L;
  const std::size_t N = box.size();

  // place S(xi_m) e^{-i xi_m . origin} / L^3 at the bin of -m, so the
  // normalized inverse FFT synthesizes (1/L^3) sum_m S(xi_m) e^{-i xi_m . x}
  CField X(N, cplx(0.0));
  for (std::size_t q = 0; q < scan.xi_grid.size(); ++q) {
    const Vec3& xi = scan.xi_grid[q];
    long p[3];
    for (int d = 0; d < 3; ++d) {
      const double raw = xi[d] / dxi;
      p[d] = std::lround(raw);
      if (std::abs(raw - double(p[d])) > 1e-9)
        throw std::runtime_error(
            "recover_sigma_difference: xi point off the recovery box's frequency lattice");
      if (std::abs(p[d]) > long(box.n[std::size_t(d)]) / 2 - 1)
        throw std::runtime_error("recover_sigma_difference: xi lattice exceeds the Nyquist band");
    }
    std::size_t bin[3];
    for (int d = 0; d < 3; ++d) {
      long w = (-p[d]) % long(box.n[std::size_t(d)]);
      if (w < 0) w += long(box.n[std::size_t(d)]);
      bin[d] = std::size_t(w);
    }
    double xi_dot_o = 0.0;
    for (int d = 0; d < 3; ++d) xi_dot_o += xi[d] * box.origin[std::size_t(d)];
    X[box.index(bin[0], bin[1], bin[2])] +=
        double(N) / (L * L * L) * scan.values_sigma[q] * std::exp(cplx(0.0, -xi_dot_o));
  }
  fft3(box, X, true);

  const Grid3 g = view_grid(box);
  ScalarField3 a1 = ScalarField3::sample(
      g, [&weight_model](const Vec3& x) { return cplx(weight_model.alpha(x)); });
  ScalarField3 b1 = ScalarField3::sample(
      g, [&weight_model](const Vec3& x) { return cplx(weight_model.beta(x)); });
  const ScalarField3 psi1 = cgo::transport_phase(a1, b1, scan.rho1, scan.rho2);

  ScalarField3 out(g);
  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) {
        const std::size_t idx = g.index(i, j, k);
        const cplx w = std::exp(2.0 * psi1.at(i, j, k)) / weight_model.sigma(g.point(i, j, k));
        out.data[idx] = (std::abs(w) < 1e-8) ? cplx(0.0) : X[idx] / w;
      }
  return out;
}

IdentityReport cgo_pair_identity(const MaterialModel& m1, const MaterialModel& m2,
                                 const cgo::CgoSolution& sol1, const cgo::CgoSolution& sol2) {
  if (sol1.member != 1 || sol2.member != 2)
    throw std::invalid_argument("cgo_pair_identity: expects (member 1, member 2) in that order");
  check_same_grid(sol1.r.grid, sol2.r.grid, "cgo_pair_identity");

  const cgo::PhasePair& pair = sol1.phase;
  if (std::abs(pair.tau - sol2.phase.tau) > 1e-12 * pair.tau ||
      std::abs(pair.omega - sol2.phase.omega) > 1e-12)
    throw std::invalid_argument("cgo_pair_identity: solutions from different phase pairs");

  const Vec3 xi = pair.xi;
  {
    double gap = 0.0;
    for (int d = 0; d < 3; ++d) gap += std::abs(sol1.zeta[d] + sol2.zeta[d] - cplx(xi[d]));
    if (gap > 1e-9 * (1.0 + pair.tau))
      throw std::invalid_argument("cgo_pair_identity: phase members do not combine to e^{i xi.x}");
  }

  const Grid3& g = sol1.r.grid;
  const double omega = pair.omega;
  const cplx inv_iw = 1.0 / cplx(0.0, omega);
  const cplx I(0.0, 1.0);

  const VectorField3& a1 = sol1.ansatz.a;
  const VectorField3& a2 = sol2.ansatz.a;
  const VectorField3 ca1 = curl(a1), cr1 = curl(sol1.r);
  const VectorField3 ca2 = curl(a2), cr2 = curl(sol2.r);
  const CVec3 z1 = sol1.zeta, z2 = sol2.zeta;

  constexpr int kTerms = 8;
  const char* labels[kTerms] = {"mu_a1_a2",    "mu_a1_r2",    "mu_r1_a2",    "mu_r1_r2",
                                "sigma_A1_A2", "sigma_A1_R2", "sigma_R1_A2", "sigma_R1_R2"};
  cplx sums[kTerms] = {};
  ScalarField3 Ftot(g);

  for (std::size_t k = 0; k < g.n[2]; ++k)
    for (std::size_t j = 0; j < g.n[1]; ++j)
      for (std::size_t i = 0; i < g.n[0]; ++i) {
        const Vec3 x = g.point(i, j, k);
        const double w = trapezoid_weight(g, i, j, k);
        const cplx phase = std::exp(cplx(0.0, dot(xi, x)));
        const double s1 = m1.sigma(x), s2 = m2.sigma(x);
        const cplx dm = cplx(m1.mu(x) - m2.mu(x));
        const cplx fs = inv_iw * ((s1 - s2) / (s1 * s2));

        const CVec3 a1v = a1.vec(i, j, k), r1v = sol1.r.vec(i, j, k);
        const CVec3 a2v = a2.vec(i, j, k), r2v = sol2.r.vec(i, j, k);
        const CVec3 A1 = I * cross(z1, a1v) + ca1.vec(i, j, k);
        const CVec3 R1 = I * cross(z1, r1v) + cr1.vec(i, j, k);
        const CVec3 A2 = I * cross(z2, a2v) + ca2.vec(i, j, k);
        const CVec3 R2 = I * cross(z2, r2v) + cr2.vec(i, j, k);

        const cplx vals[kTerms] = {
            dm * phase * dot(a1v, a2v), dm * phase * dot(a1v, r2v),
            dm * phase * dot(r1v, a2v), dm * phase * dot(r1v, r2v),
            fs * phase * dot(A1, A2),   fs * phase * dot(A1, R2),
            fs * phase * dot(R1, A2),   fs * phase * dot(R1, R2)};
        cplx tot(0.0);
        for (int t = 0; t < kTerms; ++t) {
          sums[t] += w * vals[t];
          tot += vals[t];
        }
        Ftot.at(i, j, k) = tot;
      }

  IdentityReport rep;
  rep.tau = pair.tau;
  for (int t = 0; t < kTerms; ++t) {
    rep.term_breakdown.emplace_back(labels[t], sums[t]);
    rep.value += sums[t];
  }
  rep.quadrature_error = quadrature_error_estimate(Ftot);
  return rep;
}

void write_scan_csv(const std::string& path, const FourierScan& scan, FourierTarget target) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_scan_csv: cannot open " + path);
  const std::vector<cplx>& vals =
      (target == FourierTarget::Sigma) ? scan.values_sigma : scan.values_mu;
  if (vals.size() != scan.xi_grid.size())
    throw std::invalid_argument("write_scan_csv: scan arrays out of step with xi grid");
  out << std::setprecision(17);
  out << "xi1,xi2,xi3,re,im\n";
  for (std::size_t q = 0; q < scan.xi_grid.size(); ++q) {
    const Vec3& xi = scan.xi_grid[q];
    out << xi[0] << ',' << xi[1] << ',' << xi[2] << ',' << vals[q].real() << ','
        << vals[q].imag() << '\n';
  }
  if (!out) throw std::runtime_error("write_scan_csv: write failed for " + path);
}

}  // namespace mtlab::identity
