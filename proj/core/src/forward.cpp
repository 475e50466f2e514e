#include "mtlab/forward.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "mtlab/diff_ops.hpp"
#include "mtlab/norms.hpp"

namespace mtlab {
namespace {

inline std::size_t dof_of(const Grid3& g, std::size_t i, std::size_t j, std::size_t k, int c) {
  return 3 * g.index(i, j, k) + std::size_t(c);
}

inline int boundary_count(const Grid3& g, std::size_t i, std::size_t j, std::size_t k) {
  int cnt = 0;
  cnt += (i == 0 || i == g.n[0] - 1);
  cnt += (j == 0 || j == g.n[1] - 1);
  cnt += (k == 0 || k == g.n[2] - 1);
  return cnt;
}

Eigen::VectorXcd flatten(const VectorField3& u) {
  Eigen::VectorXcd v(3 * u.grid.size());
  for (std::size_t m = 0; m < u.grid.size(); ++m)
    for (int c = 0; c < 3; ++c) v[3 * m + c] = u.comp[c][m];
  return v;
}

VectorField3 unflatten(const Grid3& g, const Eigen::VectorXcd& v) {
  VectorField3 u(g);
  for (std::size_t m = 0; m < g.size(); ++m)
    for (int c = 0; c < 3; ++c) u.comp[c][m] = v[3 * m + c];
  return u;
}

}  // namespace

ForwardOperator assemble_curlcurl(const MaterialModel& m, double omega, const Grid3& grid) {
  grid.validate();
  ForwardOperator op;
  op.grid = grid;
  op.material = m;
  op.omega = omega;

  const std::size_t N = 3 * grid.size();
  op.row_kind.assign(N, RowKind::Interior);
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(N * 22);

  const double h[3] = {grid.spacing(0), grid.spacing(1), grid.spacing(2)};
  const std::size_t stride[3] = {1, grid.n[0], grid.n[0] * grid.n[1]};
  const cplx iw(0.0, omega);

  for (std::size_t k = 0; k < grid.n[2]; ++k)
    for (std::size_t j = 0; j < grid.n[1]; ++j)
      for (std::size_t i = 0; i < grid.n[0]; ++i) {
        const std::size_t node = grid.index(i, j, k);
        const Vec3 x = grid.point(i, j, k);
        const int bc = boundary_count(grid, i, j, k);
        const std::size_t ijk[3] = {i, j, k};

        if (bc == 0) {
          const double sig = m.sigma(x);
          const double s = 1.0 / sig;
          const Vec3 gs = (-s * s) * m.grad_sigma(x);  // grad(1/sigma)
          const double mu = m.mu(x);
          for (int c = 0; c < 3; ++c) {
            const std::size_t row = 3 * node + std::size_t(c);
            auto add = [&](std::size_t col_node, int col_c, cplx v) {
              trip.emplace_back(int(row), int(3 * col_node + std::size_t(col_c)), v);
            };
            // -s * laplacian on component c
            for (int d = 0; d < 3; ++d) {
              add(node + stride[d], c, -s / (h[d] * h[d]));
              add(node - stride[d], c, -s / (h[d] * h[d]));
              add(node, c, 2.0 * s / (h[d] * h[d]));
            }
            // + s * d_c d_d H_d
            for (int d = 0; d < 3; ++d) {
              if (d == c) {
                add(node + stride[c], c, s / (h[c] * h[c]));
                add(node - stride[c], c, s / (h[c] * h[c]));
                add(node, c, -2.0 * s / (h[c] * h[c]));
              } else {
                const double w4 = s / (4.0 * h[c] * h[d]);
                add(node + stride[c] + stride[d], d, w4);
                add(node + stride[c] - stride[d], d, -w4);
                add(node - stride[c] + stride[d], d, -w4);
                add(node - stride[c] - stride[d], d, w4);
              }
            }
            // + (grad s x curl H)_c, (c,a,b) cyclic:
            //   ga*d_c H_a - ga*d_a H_c - gb*d_b H_c + gb*d_c H_b
            const int a = (c + 1) % 3, b = (c + 2) % 3;
            const double ga = gs[a], gb = gs[b];
            if (ga != 0.0) {
              add(node + stride[c], a, ga / (2.0 * h[c]));
              add(node - stride[c], a, -ga / (2.0 * h[c]));
              add(node + stride[a], c, -ga / (2.0 * h[a]));
              add(node - stride[a], c, ga / (2.0 * h[a]));
            }
            if (gb != 0.0) {
              add(node + stride[b], c, -gb / (2.0 * h[b]));
              add(node - stride[b], c, gb / (2.0 * h[b]));
              add(node + stride[c], b, gb / (2.0 * h[c]));
              add(node - stride[c], b, -gb / (2.0 * h[c]));
            }
            // - i omega mu
            add(node, c, -iw * mu);
          }
        } else if (bc == 1) {
          // which axis is normal
          int na = (i == 0 || i == grid.n[0] - 1) ? 0 : (j == 0 || j == grid.n[1] - 1) ? 1 : 2;
          const bool at_low = (ijk[na] == 0);
          const double mu = m.mu(x);
          const Vec3 gmu = m.grad_mu(x);
          for (int c = 0; c < 3; ++c) {
            const std::size_t row = 3 * node + std::size_t(c);
            if (c != na) {
              op.row_kind[row] = RowKind::Dirichlet;
              trip.emplace_back(int(row), int(row), cplx(1.0));
              continue;
            }
            op.row_kind[row] = RowKind::DivClosure;
            auto add = [&](std::size_t col_node, int col_c, cplx v) {
              trip.emplace_back(int(row), int(3 * col_node + std::size_t(col_c)), v);
            };
            for (int d = 0; d < 3; ++d) {
              if (d == na) {
                const double sgn = at_low ? 1.0 : -1.0;
                const std::size_t sd = stride[d];
                add(node, d, sgn * -3.0 * mu / (2.0 * h[d]));
                add(at_low ? node + sd : node - sd, d, sgn * 4.0 * mu / (2.0 * h[d]));
                add(at_low ? node + 2 * sd : node - 2 * sd, d, sgn * -mu / (2.0 * h[d]));
              } else {
                add(node + stride[d], d, mu / (2.0 * h[d]));
                add(node - stride[d], d, -mu / (2.0 * h[d]));
              }
              add(node, d, cplx(gmu[d]));
            }
          }
        } else {
          for (int c = 0; c < 3; ++c) {
            const std::size_t row = 3 * node + std::size_t(c);
            op.row_kind[row] = RowKind::Dirichlet;
            trip.emplace_back(int(row), int(row), cplx(1.0));
          }
        }
      }

  op.A.resize(int(N), int(N));
  op.A.setFromTriplets(trip.begin(), trip.end());
  op.A.makeCompressed();
  return op;
}

VectorField3 ForwardOperator::apply(const VectorField3& u) const {
  check_same_grid(grid, u.grid, "ForwardOperator::apply");
  return unflatten(grid, A * flatten(u));
}

BoundaryData BoundaryData::zero(const Grid3& g) {
  BoundaryData bd;
  for (Face f : all_faces) bd.faces[int(f)] = TangentialTrace(f, g);
  return bd;
}

BoundaryData BoundaryData::from_field(const Grid3& g, const std::function<CVec3(const Vec3&)>& H) {
  BoundaryData bd;
  for (Face f : all_faces) {
    TangentialTrace t(f, g);
    const CVec3 nu = to_cvec(face_normal(f));
    auto sh = t.shape();
    for (std::size_t ib = 0; ib < sh[1]; ++ib)
      for (std::size_t ia = 0; ia < sh[0]; ++ia)
        t.set_vec3(ia, ib, cross(nu, H(t.point(ia, ib))));
    bd.faces[int(f)] = std::move(t);
  }
  return bd;
}

double BoundaryData::max_abs() const {
  double m = 0.0;
  for (const auto& t : faces) m = std::max(m, t.max_abs());
  return m;
}

namespace {

// Dirichlet values of H on boundary nodes from the stored traces:
// H_t = f x nu on each face; edge/corner components filled face-by-face in
// enum order, first claim wins.
void dirichlet_values(const Grid3& g, const BoundaryData& bc, Eigen::VectorXcd& rhs,
                      const std::vector<RowKind>& kind) {
  std::vector<bool> claimed(3 * g.size(), false);
  for (Face f : all_faces) {
    const TangentialTrace& t = bc.faces[int(f)];
    if (t.grid.n != g.n) throw std::invalid_argument("BoundaryData trace grid mismatch");
    const CVec3 nu = to_cvec(face_normal(f));
    auto sh = t.shape();
    auto tx = face_tangent_axes(f);
    const int a = face_axis(f);
    std::size_t ijk[3];
    ijk[a] = (face_sign(f) < 0) ? 0 : g.n[a] - 1;
    for (std::size_t ib = 0; ib < sh[1]; ++ib)
      for (std::size_t ia = 0; ia < sh[0]; ++ia) {
        ijk[tx[0]] = ia;
        ijk[tx[1]] = ib;
        const std::size_t node = g.index(ijk[0], ijk[1], ijk[2]);
        const CVec3 Ht = cross(t.vec3(ia, ib), nu);
        for (int c : {tx[0], tx[1]}) {
          const std::size_t row = 3 * node + std::size_t(c);
          if (kind[row] == RowKind::Dirichlet && !claimed[row]) {
            rhs[Eigen::Index(row)] = Ht[c];
            claimed[row] = true;
          }
        }
      }
  }
}

struct LinearSolveResult {
  Eigen::VectorXcd x;
  SolveStats stats;
};

LinearSolveResult solve_linear(const ForwardOperator& op, const Eigen::VectorXcd& rhs,
                               const SolveOptions& opts) {
  LinearSolveResult out;
  const std::size_t N = op.dofs();
  if (N <= opts.direct_dof_limit) {
    Eigen::SparseMatrix<cplx> Acol = op.A;
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
    lu.compute(Acol);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("solve_forward: sparse LU factorization failed (resonant or singular operator?)");
    out.x = lu.solve(rhs);
    out.stats.method = "sparse-lu";
    double rn = (op.A * out.x - rhs).norm();
    double bn = rhs.norm();
    out.stats.rel_residual = bn > 0 ? rn / bn : rn;
    return out;
  }

  // Jacobi row equilibration, then BiCGSTAB on the scaled system. Keeps the
  // convergence test meaningful when PDE rows (~1/h²) sit next to unit
  // Dirichlet rows.
  Eigen::VectorXcd dinv(N);
  for (std::size_t r = 0; r < N; ++r) {
    cplx d = op.A.coeff(int(r), int(r));
    if (d == cplx(0.0)) throw std::runtime_error("solve_forward: zero diagonal during equilibration");
    dinv[Eigen::Index(r)] = 1.0 / d;
  }
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> As = dinv.asDiagonal() * op.A;
  Eigen::VectorXcd bs = dinv.asDiagonal() * rhs;

  Eigen::BiCGSTAB<Eigen::SparseMatrix<cplx, Eigen::RowMajor>, Eigen::IdentityPreconditioner> solver;
  solver.setTolerance(opts.tol);
  solver.setMaxIterations(opts.max_iterations);
  solver.compute(As);
  out.x = solver.solve(bs);
  out.stats.method = "bicgstab-jacobi";
  out.stats.iterations = int(solver.iterations());
  out.stats.rel_residual = solver.error();
  if (solver.info() != Eigen::Success && solver.error() > 1e-7)
    throw std::runtime_error("solve_forward: BiCGSTAB stalled at relative residual " +
                             std::to_string(solver.error()));
  return out;
}

MaxwellSolution finish_solution(const ForwardOperator& op, const Eigen::VectorXcd& x,
                                SolveStats stats, const VectorField3* J_e,
                                const VectorField3* J_m) {
  const Grid3& g = op.grid;
  MaxwellSolution sol;
  sol.H = unflatten(g, x);
  sol.stats = std::move(stats);

  VectorField3 curlH = curl(sol.H);
  sol.E = VectorField3(g);
  for (std::size_t m = 0; m < g.size(); ++m) {
    // point lookup: sigma is analytic, cheap
    std::size_t rem = m;
    const std::size_t i = rem % g.n[0];
    rem /= g.n[0];
    const std::size_t j = rem % g.n[1];
    const std::size_t k = rem / g.n[1];
    const double s = 1.0 / op.material.sigma(g.point(i, j, k));
    for (int c = 0; c < 3; ++c) {
      cplx je = J_e ? J_e->comp[c][m] : cplx(0.0);
      sol.E.comp[c][m] = s * (curlH.comp[c][m] - je);
    }
  }
  sol.ampere_residual = 0.0;  // by construction of E; kept in the report for symmetry

  // Interior discrete Faraday residual: curl E - i omega mu H - J_m.
  VectorField3 curlE = curl(sol.E);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 1; k + 1 < g.n[2]; ++k)
    for (std::size_t j = 1; j + 1 < g.n[1]; ++j)
      for (std::size_t i = 1; i + 1 < g.n[0]; ++i) {
        const std::size_t m = g.index(i, j, k);
        const double mu = op.material.mu(g.point(i, j, k));
        const cplx iwmu(0.0, op.omega * mu);
        const double w = trapezoid_weight(g, i, j, k);
        for (int c = 0; c < 3; ++c) {
          cplx jm = J_m ? J_m->comp[c][m] : cplx(0.0);
          num += w * std::norm(curlE.comp[c][m] - iwmu * sol.H.comp[c][m] - jm);
          den += w * std::norm(iwmu * sol.H.comp[c][m] + jm);
        }
      }
  sol.faraday_residual = std::sqrt(num);
  sol.faraday_residual_rel = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  return sol;
}

}  // namespace

MaxwellSolution solve_forward(const ForwardOperator& op, const BoundaryData& bc,
                              const SolveOptions& opts) {
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(Eigen::Index(op.dofs()));
  dirichlet_values(op.grid, bc, rhs, op.row_kind);
  auto lin = solve_linear(op, rhs, opts);
  return finish_solution(op, lin.x, lin.stats, nullptr, nullptr);
}

MaxwellSolution solve_forward(const MaterialModel& m, double omega, const Grid3& grid,
                              const BoundaryData& bc, const SolveOptions& opts) {
  return solve_forward(assemble_curlcurl(m, omega, grid), bc, opts);
}

MaxwellSolution solve_forward_sources(const MaterialModel& m, double omega, const Grid3& grid,
                                      const VectorField3& J_e, const VectorField3& J_m,
                                      const SolveOptions& opts) {
  check_same_grid(grid, J_e.grid, "solve_forward_sources");
  check_same_grid(grid, J_m.grid, "solve_forward_sources");
  ForwardOperator op = assemble_curlcurl(m, omega, grid);

  // RHS = J_m + curl(sigma^{-1} J_e) on interior rows; the closure rows get
  // g = -div(J_m)/(i omega), which is what taking the divergence of
  // Faraday's law with a magnetic source forces on div(mu H).
  VectorField3 sJe(grid);
  for (std::size_t k = 0; k < grid.n[2]; ++k)
    for (std::size_t j = 0; j < grid.n[1]; ++j)
      for (std::size_t i = 0; i < grid.n[0]; ++i) {
        const double s = 1.0 / m.sigma(grid.point(i, j, k));
        const std::size_t idx = grid.index(i, j, k);
        for (int c = 0; c < 3; ++c) sJe.comp[c][idx] = s * J_e.comp[c][idx];
      }
  VectorField3 curl_sJe = curl(sJe);
  ScalarField3 divJm = divergence(J_m);

  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(Eigen::Index(op.dofs()));
  const cplx iw(0.0, omega);
  for (std::size_t m2 = 0; m2 < grid.size(); ++m2)
    for (int c = 0; c < 3; ++c) {
      const std::size_t row = 3 * m2 + std::size_t(c);
      if (op.row_kind[row] == RowKind::Interior)
        rhs[Eigen::Index(row)] = J_m.comp[c][m2] + curl_sJe.comp[c][m2];
      else if (op.row_kind[row] == RowKind::DivClosure)
        rhs[Eigen::Index(row)] = -divJm.data[m2] / iw;
    }

  auto lin = solve_linear(op, rhs, opts);
  return finish_solution(op, lin.x, lin.stats, &J_e, &J_m);
}

namespace {

// Hager/Higham 1-norm estimate of the inverse, given factorizations of A and
// its transpose.
double inverse_one_norm_estimate(const Eigen::SparseLU<Eigen::SparseMatrix<cplx>>& luA,
                                 const Eigen::SparseLU<Eigen::SparseMatrix<cplx>>& luAT,
                                 Eigen::Index n) {
  Eigen::VectorXcd x = Eigen::VectorXcd::Constant(n, cplx(1.0 / double(n)));
  double est = 0.0;
  for (int iter = 0; iter < 6; ++iter) {
    Eigen::VectorXcd y = luA.solve(x);
    est = y.lpNorm<1>();
    Eigen::VectorXcd xi(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const double a = std::abs(y[r]);
      xi[r] = a > 0 ? y[r] / a : cplx(1.0);
    }
    Eigen::VectorXcd z = luAT.solve(xi);
    Eigen::Index jmax = 0;
    double zmax = 0.0;
    for (Eigen::Index r = 0; r < n; ++r)
      if (std::abs(z[r]) > zmax) {
        zmax = std::abs(z[r]);
        jmax = r;
      }
    if (zmax <= std::real(z.dot(x)) + 1e-14) break;  // z.dot conjugates; fine for the stopping test
    x.setZero();
    x[jmax] = cplx(1.0);
  }
  return est;
}

}  // namespace

std::vector<ResonanceProbePoint> resonance_probe(const MaterialModel& m, const Grid3& grid,
                                                 const std::vector<double>& omegas,
                                                 double flag_threshold) {
  if (3 * grid.size() > 64000)
    throw std::invalid_argument(
        "resonance_probe: grid too large for the direct condition estimator; use n <= 27 per axis");
  std::vector<ResonanceProbePoint> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    ForwardOperator op = assemble_curlcurl(m, w, grid);
    Eigen::SparseMatrix<cplx> A = op.A;
    Eigen::SparseMatrix<cplx> AT = Eigen::SparseMatrix<cplx>(op.A.transpose());

    double a1 = 0.0;  // exact 1-norm: max column sum
    {
      Eigen::VectorXd colsum = Eigen::VectorXd::Zero(A.cols());
      for (int c = 0; c < A.outerSize(); ++c)
        for (Eigen::SparseMatrix<cplx>::InnerIterator it(A, c); it; ++it)
          colsum[c] += std::abs(it.value());
      a1 = colsum.maxCoeff();
    }

    ResonanceProbePoint pt;
    pt.omega = w;
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> luA, luAT;
    luA.compute(A);
    luAT.compute(AT);
    if (luA.info() != Eigen::Success || luAT.info() != Eigen::Success) {
      pt.cond_estimate = std::numeric_limits<double>::infinity();
      pt.flagged = true;
    } else {
      pt.cond_estimate = a1 * inverse_one_norm_estimate(luA, luAT, A.rows());
      pt.flagged = pt.cond_estimate > flag_threshold;
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace mtlab
