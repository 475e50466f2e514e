#include "mtlab/krylov.hpp"

#include <cmath>
#include <stdexcept>

namespace mtlab {
namespace {

cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double nrm(const std::vector<cplx>& a) {
  double s = 0.0;
  for (const cplx& v : a) s += std::norm(v);
  return std::sqrt(s);
}

void axpy(cplx alpha, const std::vector<cplx>& x, std::vector<cplx>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

KrylovStats bicgstab(const LinOp& A, const std::vector<cplx>& b, std::vector<cplx>& x,
                     double tol, int max_iterations) {
  const std::size_t n = b.size();
  if (x.size() != n) x.assign(n, cplx(0.0));
  KrylovStats st;
  st.method = "bicgstab";

  std::vector<cplx> r(n), rhat, p(n, 0.0), v(n, 0.0), s(n), t(n), tmp(n);
  A(x, tmp);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
  rhat = r;

  const double bnorm = std::max(nrm(b), 1e-300);
  double rnorm = nrm(r);
  cplx rho = 1.0, alpha = 1.0, omega = 1.0;

  for (int it = 0; it < max_iterations; ++it) {
    st.iterations = it + 1;
    const cplx rho1 = dot(rhat, r);
    if (std::abs(rho1) < 1e-300) break;  // breakdown
    if (it == 0) {
      p = r;
    } else {
      const cplx beta = (rho1 / rho) * (alpha / omega);
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    rho = rho1;
    A(p, v);
    const cplx rhv = dot(rhat, v);
    if (std::abs(rhv) < 1e-300) break;
    alpha = rho1 / rhv;
    s = r;
    axpy(-alpha, v, s);
    if (nrm(s) / bnorm < tol) {
      axpy(alpha, p, x);
      st.rel_residual = nrm(s) / bnorm;
      st.converged = true;
      return st;
    }
    A(s, t);
    const cplx tt = dot(t, t);
    if (std::abs(tt) < 1e-300) break;
    omega = dot(t, s) / tt;
    axpy(alpha, p, x);
    axpy(omega, s, x);
    r = s;
    axpy(-omega, t, r);
    rnorm = nrm(r);
    st.rel_residual = rnorm / bnorm;
    if (st.rel_residual < tol) {
      st.converged = true;
      return st;
    }
    if (std::abs(omega) < 1e-300) break;
  }
  st.rel_residual = rnorm / bnorm;
  st.converged = st.rel_residual < tol;
  return st;
}

KrylovStats richardson(const LinOp& A, const std::vector<cplx>& b, std::vector<cplx>& x,
                       double tol, int max_iterations) {
  const std::size_t n = b.size();
  if (x.size() != n) x.assign(n, cplx(0.0));
  KrylovStats st;
  st.method = "richardson";
  std::vector<cplx> Ax(n);
  const double bnorm = std::max(nrm(b), 1e-300);
  for (int it = 0; it < max_iterations; ++it) {
    st.iterations = it + 1;
    A(x, Ax);
    double rn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx res = Ax[i] - b[i];
      rn += std::norm(res);
      x[i] -= res;
    }
    st.rel_residual = std::sqrt(rn) / bnorm;
    if (st.rel_residual < tol) {
      st.converged = true;
      return st;
    }
  }
  return st;
}

}  // namespace mtlab
