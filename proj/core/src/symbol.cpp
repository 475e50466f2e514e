#include "mtlab/symbol.hpp"

#include <cmath>
#include <stdexcept>

namespace mtlab::symbol {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Orientation of the face's (u, v) tangent pair against the inward normal.
// +1 means (e_u, e_v, inward) is right-handed, i.e. the face frame coincides
// with the adapted coordinates; -1 means u and v must be swapped first.
int face_orientation(Face f) {
  const auto ax = face_tangent_axes(f);
  Vec3 eu{0, 0, 0}, ev{0, 0, 0};
  eu[std::size_t(ax[0])] = 1.0;
  ev[std::size_t(ax[1])] = 1.0;
  const auto nu = face_normal(f);
  const Vec3 inward{-nu[0], -nu[1], -nu[2]};
  const double o = dot(cross(eu, ev), inward);
  return o > 0 ? +1 : -1;
}

std::size_t mode_index(const BasisSpec& spec, std::size_t face_pos, int dir, int ka, int kb) {
  const std::size_t m = 2 * std::size_t(spec.kmax) + 1;
  return face_pos * spec.modes_per_face() + std::size_t(dir) * m * m +
         std::size_t(kb + spec.kmax) * m + std::size_t(ka + spec.kmax);
}

}  // namespace

BoundaryMatrices boundary_matrices(const MaterialModel& m, const Vec3& boundary_point) {
  const Vec3 da = m.grad_alpha(boundary_point);
  const Vec3 db = m.grad_beta(boundary_point);
  BoundaryMatrices out;
  out.point = boundary_point;
  // Coefficient of xi1.
  out.M1 = {db[0], db[1] + da[1], db[2] + da[2],  //
            0.0, -da[0], 0.0,                     //
            0.0, 0.0, -da[0]};
  // Coefficient of xi2.
  out.M2 = {-da[1], 0.0, 0.0,                     //
            db[0] + da[0], db[1], db[2] + da[2],  //
            0.0, 0.0, -da[1]};
  out.N = {-da[2], 0.0, 0.0,  //
           0.0, -da[2], 0.0,  //
           db[0] + da[0], db[1] + da[1], -db[2]};
  return out;
}

Eigen::Matrix2cd principal_symbol_Z(double sigma_boundary, double xi1, double xi2) {
  if (!(sigma_boundary > 0.0)) throw std::invalid_argument("principal symbol needs sigma > 0");
  const double r = std::hypot(xi1, xi2);
  if (r < 1e-14) throw std::invalid_argument("principal symbol is singular at xi' = 0");
  const double c = 1.0 / (sigma_boundary * r);
  Eigen::Matrix2cd Z;
  Z(0, 0) = c * xi1 * xi2;
  Z(0, 1) = c * xi2 * xi2;
  Z(1, 0) = -c * xi1 * xi1;
  Z(1, 1) = -c * xi1 * xi2;
  return Z;
}

std::vector<ProbeRung> factorization_probe(const MaterialModel& m, const Vec3& boundary_point,
                                           const std::vector<std::array<double, 2>>& xi_ladder,
                                           const ProbeOptions& opts) {
  if (xi_ladder.empty()) throw std::invalid_argument("factorization probe needs a frequency ladder");
  if (opts.nodes < 16) throw std::invalid_argument("factorization probe needs at least 16 nodes");

  std::vector<ProbeRung> out;
  out.reserve(xi_ladder.size());
  const cplx iw(0.0, opts.omega);

  for (const auto& xi : xi_ladder) {
    const double r = std::hypot(xi[0], xi[1]);
    if (r < 1e-14) throw std::invalid_argument("factorization probe needs xi' != 0");
    const double depth = opts.depth_factor / r;
    const int n = opts.nodes;
    const double dz = depth / double(n - 1);
    const double diffusive =
        std::sqrt(opts.omega * m.sigma(boundary_point) * m.mu(boundary_point));
    if (dz * std::max(r, diffusive) > 0.05)
      throw std::invalid_argument("unresolved frequency in factorization probe");

    // Second-order system along the inward normal line,
    //   -H'' - N(z) H' + (|xi'|^2 I - i M(z, xi') - Hess(beta) - i w s mu) H = 0,
    // with H(0) = (1,1,1) and decay enforced by a deep homogeneous Dirichlet
    // cap. Block-tridiagonal Thomas solve over the interior nodes.
    const int inner = n - 2;
    const std::size_t ni = std::size_t(inner);
    std::vector<Eigen::Matrix3cd> diag(ni), upper(ni - 1), lower(ni - 1);
    std::vector<Eigen::Vector3cd> rhs(ni, Eigen::Vector3cd::Zero());

    for (int i = 0; i < inner; ++i) {
      const double z = dz * double(i + 1);
      const Vec3 x{boundary_point[0], boundary_point[1], boundary_point[2] + z};
      const BoundaryMatrices bm = boundary_matrices(m, x);
      const auto Mx = bm.M(xi[0], xi[1]);
      const auto hb = m.hess_beta(x);
      const cplx pot = r * r - iw * m.sigma(x) * m.mu(x);

      Eigen::Matrix3cd C;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          C(a, b) = -cplx(0.0, 1.0) * Mx[std::size_t(3 * a + b)] - hb[std::size_t(3 * a + b)];
      C(0, 0) += pot;
      C(1, 1) += pot;
      C(2, 2) += pot;

      Eigen::Matrix3cd Nm;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) Nm(a, b) = bm.N[std::size_t(3 * a + b)];

      const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
      diag[std::size_t(i)] = (2.0 / (dz * dz)) * id + C;
      if (i + 1 < inner) upper[std::size_t(i)] = (-1.0 / (dz * dz)) * id - Nm / (2.0 * dz);
      if (i > 0) lower[std::size_t(i - 1)] = (-1.0 / (dz * dz)) * id + Nm / (2.0 * dz);
      if (i == 0) {
        // Known boundary value H(0) = (1,1,1) moves to the right side.
        const Eigen::Matrix3cd sub = (-1.0 / (dz * dz)) * id + Nm / (2.0 * dz);
        rhs[0] = -sub * Eigen::Vector3cd::Ones();
      }
    }

    for (int i = 1; i < inner; ++i) {
      const Eigen::Matrix3cd f =
          lower[std::size_t(i - 1)] * diag[std::size_t(i - 1)].inverse();
      diag[std::size_t(i)] -= f * upper[std::size_t(i - 1)];
      rhs[std::size_t(i)] -= f * rhs[std::size_t(i - 1)];
    }
    std::vector<Eigen::Vector3cd> H(ni);
    H[std::size_t(inner - 1)] =
        diag[std::size_t(inner - 1)].partialPivLu().solve(rhs[std::size_t(inner - 1)]);
    for (int i = inner - 2; i >= 0; --i)
      H[std::size_t(i)] = diag[std::size_t(i)].partialPivLu().solve(
          rhs[std::size_t(i)] - upper[std::size_t(i)] * H[std::size_t(i + 1)]);

    ProbeRung rung;
    rung.xi_norm = r;
    for (int j = 0; j < 3; ++j) {
      // One-sided second-order derivative at z = 0 with H0_j = 1.
      const cplx d = (-3.0 + 4.0 * H[0](j) - H[1](j)) / (2.0 * dz);
      rung.ratio[std::size_t(j)] = d;
      rung.max_rel_deviation = std::max(rung.max_rel_deviation, std::abs(d + r) / r);
    }
    out.push_back(rung);
  }
  return out;
}

SigmaRecovery recover_boundary_sigma(const ImpedanceMatrix& Z, const Grid3& g, Face face,
                                     const std::vector<std::array<int, 2>>& mode_ladder) {
  std::size_t face_pos = Z.basis.faces.size();
  for (std::size_t i = 0; i < Z.basis.faces.size(); ++i)
    if (Z.basis.faces[i] == face) face_pos = i;
  if (face_pos == Z.basis.faces.size())
    throw std::invalid_argument("face not present in the impedance basis");
  for (int d = 0; d < 3; ++d)
    if (std::size_t(g.n[std::size_t(d)]) != Z.n[std::size_t(d)])
      throw std::invalid_argument("grid shape does not match the assembled impedance matrix");
  if (mode_ladder.empty()) throw std::invalid_argument("sigma recovery needs a mode ladder");

  const auto ax = face_tangent_axes(face);
  const double Lu = g.extent[std::size_t(ax[0])];
  const double Lv = g.extent[std::size_t(ax[1])];
  const int orient = face_orientation(face);

  SigmaRecovery rec;
  for (const auto& mode : mode_ladder) {
    const int ka = mode[0], kb = mode[1];
    if (std::abs(ka) > Z.basis.kmax || std::abs(kb) > Z.basis.kmax)
      throw std::invalid_argument("mode outside the assembled basis band");
    if (ka == 0 && kb == 0)
      throw std::invalid_argument("sigma recovery is singular at the zero mode");

    Eigen::Matrix2cd B;
    for (int dr = 0; dr < 2; ++dr)
      for (int dc = 0; dc < 2; ++dc)
        B(dr, dc) = Z.Z(Eigen::Index(mode_index(Z.basis, face_pos, dr, ka, kb)),
                        Eigen::Index(mode_index(Z.basis, face_pos, dc, ka, kb)));

    double xi1 = 2.0 * kPi * double(ka) / Lu;
    double xi2 = 2.0 * kPi * double(kb) / Lv;
    if (orient < 0) {
      std::swap(xi1, xi2);
      B = Eigen::Matrix2cd{{B(1, 1), B(1, 0)}, {B(0, 1), B(0, 0)}};
    }

    const Eigen::Matrix2cd P = principal_symbol_Z(1.0, xi1, xi2);
    const double pmax = P.cwiseAbs().maxCoeff();
    double sum = 0.0;
    int kept = 0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        if (std::abs(P(a, b)) < 0.25 * pmax) continue;  // masked: near-zero symbol entry
        if (std::abs(B(a, b)) < 1e-300) continue;
        sum += std::abs(P(a, b)) / std::abs(B(a, b));
        ++kept;
      }
    if (kept == 0) throw std::invalid_argument("all symbol entries masked for this mode");
    rec.xi_norms.push_back(std::hypot(xi1, xi2));
    rec.estimates.push_back(sum / double(kept));
  }
  rec.sigma_estimate = rec.estimates.back();
  return rec;
}

ImpedanceMatrix synthetic_symbol_impedance(double sigma, double omega, const Grid3& g,
                                           const BasisSpec& basis) {
  ImpedanceMatrix out;
  out.basis = basis;
  out.omega = omega;
  out.n = {std::size_t(g.n[0]), std::size_t(g.n[1]), std::size_t(g.n[2])};
  out.Z = Eigen::MatrixXcd::Zero(Eigen::Index(basis.size()), Eigen::Index(basis.size()));

  for (std::size_t fp = 0; fp < basis.faces.size(); ++fp) {
    const Face f = basis.faces[fp];
    const auto ax = face_tangent_axes(f);
    const double Lu = g.extent[std::size_t(ax[0])];
    const double Lv = g.extent[std::size_t(ax[1])];
    const int orient = face_orientation(f);
    for (int kb = -basis.kmax; kb <= basis.kmax; ++kb)
      for (int ka = -basis.kmax; ka <= basis.kmax; ++ka) {
        if (ka == 0 && kb == 0) continue;
        double xi1 = 2.0 * kPi * double(ka) / Lu;
        double xi2 = 2.0 * kPi * double(kb) / Lv;
        if (orient < 0) std::swap(xi1, xi2);
        Eigen::Matrix2cd P = principal_symbol_Z(sigma, xi1, xi2);
        if (orient < 0) P = Eigen::Matrix2cd{{P(1, 1), P(1, 0)}, {P(0, 1), P(0, 0)}};
        for (int dr = 0; dr < 2; ++dr)
          for (int dc = 0; dc < 2; ++dc)
            out.Z(Eigen::Index(mode_index(basis, fp, dr, ka, kb)),
                  Eigen::Index(mode_index(basis, fp, dc, ka, kb))) = P(dr, dc);
      }
  }
  return out;
}

RhoA apparent_resistivity(const Eigen::Matrix2cd& Zblock, double omega, double mu_boundary) {
  if (!(omega > 0.0) || !(mu_boundary > 0.0))
    throw std::invalid_argument("apparent resistivity needs omega > 0 and mu > 0");
  RhoA out;
  out.z_scalar = 0.5 * (Zblock(0, 1) - Zblock(1, 0));
  out.rho_a = std::norm(out.z_scalar) / (omega * mu_boundary);
  out.phase_deg = std::arg(out.z_scalar) * 180.0 / kPi;
  const double off = std::max(std::abs(Zblock(0, 1)), std::abs(Zblock(1, 0)));
  const double diag = std::max(std::abs(Zblock(0, 0)), std::abs(Zblock(1, 1)));
  out.diag_leakage = diag / std::max(off, 1e-300);
  out.structure_warning = out.diag_leakage > 0.2;
  return out;
}

}  // namespace mtlab::symbol
