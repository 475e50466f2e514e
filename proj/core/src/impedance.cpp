#include "mtlab/impedance.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mtlab/diff_ops.hpp"
#include "mtlab/field_io.hpp"

namespace mtlab {

std::vector<BasisMode> basis_modes(const BasisSpec& spec) {
  std::vector<BasisMode> modes;
  modes.reserve(spec.size());
  for (Face f : spec.faces)
    for (int dir = 0; dir < 2; ++dir)
      for (int kb = -spec.kmax; kb <= spec.kmax; ++kb)
        for (int ka = -spec.kmax; ka <= spec.kmax; ++ka)
          modes.push_back(BasisMode{f, dir, ka, kb});
  return modes;
}

namespace {

cplx mode_value(const BasisMode& m, double u, double v) {
  const double ph = 2.0 * M_PI * (m.ka * u + m.kb * v);
  return cplx(std::cos(ph), std::sin(ph));
}

}  // namespace

TangentialTrace basis_trace(const Grid3& g, const BasisMode& mode) {
  TangentialTrace t(mode.face, g);
  const auto sh = t.shape();
  for (std::size_t ib = 0; ib < sh[1]; ++ib)
    for (std::size_t ia = 0; ia < sh[0]; ++ia) {
      const double u = double(ia) / double(sh[0] - 1);
      const double v = double(ib) / double(sh[1] - 1);
      t.values[mode.dir][t.index(ia, ib)] = mode_value(mode, u, v);
    }
  return t;
}

Eigen::VectorXcd project_onto_basis(const TangentialTrace& t, const BasisSpec& spec) {
  const auto sh = t.shape();
  const auto tx = face_tangent_axes(t.face);
  const double ha = t.grid.spacing(tx[0]);
  const double hb = t.grid.spacing(tx[1]);

  std::vector<BasisMode> modes;
  for (const BasisMode& m : basis_modes(spec))
    if (m.face == t.face) modes.push_back(m);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(Eigen::Index(modes.size()));

  double area = 0.0;
  for (std::size_t ib = 0; ib < sh[1]; ++ib)
    for (std::size_t ia = 0; ia < sh[0]; ++ia) {
      const double wa = (ia == 0 || ia == sh[0] - 1) ? 0.5 : 1.0;
      const double wb = (ib == 0 || ib == sh[1] - 1) ? 0.5 : 1.0;
      const double w = wa * wb * ha * hb;
      area += w;
      const double u = double(ia) / double(sh[0] - 1);
      const double v = double(ib) / double(sh[1] - 1);
      for (std::size_t q = 0; q < modes.size(); ++q)
        c[Eigen::Index(q)] +=
            w * std::conj(mode_value(modes[q], u, v)) * t.values[modes[q].dir][t.index(ia, ib)];
    }
  if (area <= 0.0) throw std::runtime_error("project_onto_basis: degenerate face");
  return c / area;
}

ImpedanceMatrix impedance_map(const MaterialModel& m, double omega, const Grid3& grid,
                              const BasisSpec& basis, const SolveOptions& opts) {
  if (basis.faces.empty()) throw std::invalid_argument("impedance_map: empty face list");
  ForwardOperator op = assemble_curlcurl(m, omega, grid);
  const std::size_t N = op.dofs();
  const std::vector<BasisMode> modes = basis_modes(basis);

  ImpedanceMatrix out;
  out.basis = basis;
  out.omega = omega;
  out.n = grid.n;
  out.Z.resize(Eigen::Index(modes.size()), Eigen::Index(modes.size()));

  // Factor or precondition once; the operator is shared by every column.
  const bool direct = N <= opts.direct_dof_limit;
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  Eigen::BiCGSTAB<Eigen::SparseMatrix<cplx, Eigen::RowMajor>, Eigen::IdentityPreconditioner> iter;
  Eigen::VectorXcd dinv;
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> As;
  if (direct) {
    Eigen::SparseMatrix<cplx> Acol = op.A;
    lu.compute(Acol);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("impedance_map: sparse LU factorization failed");
  } else {
    dinv.resize(Eigen::Index(N));
    for (std::size_t r = 0; r < N; ++r) {
      cplx d = op.A.coeff(int(r), int(r));
      if (d == cplx(0.0)) throw std::runtime_error("impedance_map: zero diagonal");
      dinv[Eigen::Index(r)] = 1.0 / d;
    }
    As = dinv.asDiagonal() * op.A;
    iter.setTolerance(opts.tol);
    iter.setMaxIterations(opts.max_iterations);
    iter.compute(As);
  }

  for (std::size_t jc = 0; jc < modes.size(); ++jc) {
    BoundaryData bd = BoundaryData::zero(grid);
    bd.faces[int(modes[jc].face)] = basis_trace(grid, modes[jc]);

    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(Eigen::Index(N));
    {
      // Dirichlet fill identical to the forward solver path.
      std::vector<bool> claimed(N, false);
      for (Face f : all_faces) {
        const TangentialTrace& t = bd.faces[int(f)];
        const CVec3 nu = to_cvec(face_normal(f));
        const auto sh = t.shape();
        const auto tx = face_tangent_axes(f);
        const int a = face_axis(f);
        std::size_t ijk[3];
        ijk[a] = (face_sign(f) < 0) ? 0 : grid.n[a] - 1;
        for (std::size_t ib = 0; ib < sh[1]; ++ib)
          for (std::size_t ia = 0; ia < sh[0]; ++ia) {
            ijk[tx[0]] = ia;
            ijk[tx[1]] = ib;
            const std::size_t node = grid.index(ijk[0], ijk[1], ijk[2]);
            const CVec3 Ht = cross(t.vec3(ia, ib), nu);
            for (int c : {tx[0], tx[1]}) {
              const std::size_t row = 3 * node + std::size_t(c);
              if (op.row_kind[row] == RowKind::Dirichlet && !claimed[row]) {
                rhs[Eigen::Index(row)] = Ht[c];
                claimed[row] = true;
              }
            }
          }
      }
    }

    Eigen::VectorXcd x;
    if (direct) {
      x = lu.solve(rhs);
    } else {
      x = iter.solve(dinv.asDiagonal() * rhs);
      if (iter.info() != Eigen::Success && iter.error() > 1e-7)
        throw std::runtime_error("impedance_map: BiCGSTAB stalled at column " + std::to_string(jc));
    }

    VectorField3 H(grid);
    for (std::size_t q = 0; q < grid.size(); ++q)
      for (int c = 0; c < 3; ++c) H.comp[c][q] = x[Eigen::Index(3 * q + std::size_t(c))];
    VectorField3 curlH = curl(H);
    VectorField3 E(grid);
    for (std::size_t k = 0; k < grid.n[2]; ++k)
      for (std::size_t j = 0; j < grid.n[1]; ++j)
        for (std::size_t i = 0; i < grid.n[0]; ++i) {
          const double s = 1.0 / m.sigma(grid.point(i, j, k));
          const std::size_t q = grid.index(i, j, k);
          for (int c = 0; c < 3; ++c) E.comp[c][q] = s * curlH.comp[c][q];
        }

    std::size_t row0 = 0;
    for (Face f : basis.faces) {
      TangentialTrace tE = tangential_trace(E, f);
      Eigen::VectorXcd cf = project_onto_basis(tE, basis);
      out.Z.block(Eigen::Index(row0), Eigen::Index(jc), cf.size(), 1) = cf;
      row0 += std::size_t(cf.size());
    }
  }
  return out;
}

void write_impedance_csv(const std::string& path, const ImpedanceMatrix& Z) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_impedance_csv: cannot open " + path);
  os.precision(17);
  for (Eigen::Index r = 0; r < Z.Z.rows(); ++r) {
    for (Eigen::Index c = 0; c < Z.Z.cols(); ++c) {
      if (c) os << ',';
      os << std::real(Z.Z(r, c)) << ',' << std::imag(Z.Z(r, c));
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("write_impedance_csv: write failed for " + path);
}

ImpedanceMatrix read_impedance_csv(const std::string& path, const ImpedanceMatrix& like) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_impedance_csv: cannot open " + path);
  ImpedanceMatrix out = like;
  out.Z.setZero(like.Z.rows(), like.Z.cols());
  std::string line;
  Eigen::Index r = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (r >= out.Z.rows()) throw std::runtime_error("read_impedance_csv: too many rows in " + path);
    std::size_t pos = 0;
    for (Eigen::Index c = 0; c < out.Z.cols(); ++c) {
      auto next = [&]() {
        std::size_t end = line.find(',', pos);
        std::string tok = line.substr(pos, end == std::string::npos ? end : end - pos);
        pos = (end == std::string::npos) ? line.size() : end + 1;
        return std::stod(tok);
      };
      const double re = next(), im = next();
      out.Z(r, c) = cplx(re, im);
    }
    ++r;
  }
  if (r != out.Z.rows()) throw std::runtime_error("read_impedance_csv: row count mismatch in " + path);
  return out;
}

void write_impedance_binary(const std::string& path_base, const ImpedanceMatrix& Z) {
  {
    std::ofstream os(path_base + ".bin", std::ios::binary);
    if (!os) throw std::runtime_error("write_impedance_binary: cannot open " + path_base + ".bin");
    for (Eigen::Index r = 0; r < Z.Z.rows(); ++r)
      for (Eigen::Index c = 0; c < Z.Z.cols(); ++c) {
        const double re = std::real(Z.Z(r, c)), im = std::imag(Z.Z(r, c));
        os.write(reinterpret_cast<const char*>(&re), sizeof(double));
        os.write(reinterpret_cast<const char*>(&im), sizeof(double));
      }
  }
  nlohmann::json meta;
  std::vector<std::string> fnames;
  for (Face f : Z.basis.faces) fnames.push_back(face_name(f));
  meta["basis"] = {{"faces", fnames}, {"kmax", Z.basis.kmax}};
  meta["omega"] = Z.omega;
  meta["n"] = Z.n;
  std::ofstream js(path_base + ".json");
  if (!js) throw std::runtime_error("write_impedance_binary: cannot open " + path_base + ".json");
  js << meta.dump(2) << '\n';
}

ImpedanceMatrix read_impedance_binary(const std::string& path_base) {
  nlohmann::json meta;
  {
    std::ifstream js(path_base + ".json");
    if (!js) throw std::runtime_error("read_impedance_binary: cannot open " + path_base + ".json");
    js >> meta;
  }
  ImpedanceMatrix out;
  out.basis.kmax = meta.at("basis").at("kmax").get<int>();
  out.basis.faces.clear();
  for (const auto& s : meta.at("basis").at("faces")) {
    const std::string name = s.get<std::string>();
    bool found = false;
    for (Face f : all_faces)
      if (name == face_name(f)) {
        out.basis.faces.push_back(f);
        found = true;
      }
    if (!found) throw std::runtime_error("read_impedance_binary: unknown face name " + name);
  }
  out.omega = meta.at("omega").get<double>();
  const auto nv = meta.at("n").get<std::vector<std::size_t>>();
  if (nv.size() != 3) throw std::runtime_error("read_impedance_binary: bad grid shape");
  out.n = {nv[0], nv[1], nv[2]};

  const Eigen::Index sz = Eigen::Index(out.basis.size());
  out.Z.resize(sz, sz);
  std::ifstream is(path_base + ".bin", std::ios::binary);
  if (!is) throw std::runtime_error("read_impedance_binary: cannot open " + path_base + ".bin");
  for (Eigen::Index r = 0; r < sz; ++r)
    for (Eigen::Index c = 0; c < sz; ++c) {
      double re = 0.0, im = 0.0;
      is.read(reinterpret_cast<char*>(&re), sizeof(double));
      is.read(reinterpret_cast<char*>(&im), sizeof(double));
      out.Z(r, c) = cplx(re, im);
    }
  if (!is) throw std::runtime_error("read_impedance_binary: truncated " + path_base + ".bin");
  return out;
}

}  // namespace mtlab
