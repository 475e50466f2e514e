#include <cmath>
#include <stdexcept>

#include "mtlab/cgo.hpp"
#include "mtlab/diff_ops.hpp"

namespace mtlab::cgo {

double smoothstep_cutoff(double s) {
  if (s <= 0.5) return 1.0;
  if (s >= 1.0) return 0.0;
  const double t = (s - 0.5) / 0.5;
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

ScalarField3 sample_cutoff(const Grid3& g, double tau, double theta) {
  if (!(tau > 0.0)) throw std::invalid_argument("sample_cutoff: tau must be positive");
  if (!(theta > 0.0 && theta < 0.5))
    throw std::invalid_argument("sample_cutoff: theta must lie in (0, 1/2)");
  const double scale = std::pow(tau, -theta);
  return ScalarField3::sample(
      g, [&](const Vec3& x) { return cplx(smoothstep_cutoff(scale * norm2(x))); });
}

namespace {

void require_built(const CgoAnsatz& ansatz, const char* where) {
  const std::size_t n = ansatz.alpha_sharp.grid.size();
  if (n == 0 || ansatz.alpha_sharp.data.size() != n)
    throw std::invalid_argument(std::string(where) + ": ansatz has no alpha_sharp field");
  check_same_grid(ansatz.alpha_sharp.grid, ansatz.beta_sharp.grid, where);
  check_same_grid(ansatz.alpha_sharp.grid, ansatz.psi_sharp.grid, where);
  check_same_grid(ansatz.alpha_sharp.grid, ansatz.chi_tau.grid, where);
}

}  // namespace

const VectorField3& build_amplitude(CgoAnsatz& ansatz) {
  require_built(ansatz, "build_amplitude");
  const Grid3& g = ansatz.alpha_sharp.grid;
  ansatz.a = VectorField3(g);
  const CVec3 rho = ansatz.rho;
  const CVec3 rho_bar = mtlab::conj(rho);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const cplx al = ansatz.alpha_sharp.data[idx];
    const cplx decay = std::exp(-0.5 * al);
    const cplx grow =
        ansatz.s0 * std::exp(0.5 * al) *
        std::exp(ansatz.chi_tau.data[idx] * ansatz.psi_sharp.data[idx]);
    for (int c = 0; c < 3; ++c)
      ansatz.a.comp[std::size_t(c)][idx] = decay * rho[c] + grow * rho_bar[c];
  }
  return ansatz.a;
}

TransportReport transport_report(const CgoAnsatz& ansatz, const WeightedNormParams& params) {
  require_built(ansatz, "transport_report");
  const Grid3& g = ansatz.alpha_sharp.grid;
  if (ansatz.a.comp[0].size() != g.size())
    throw std::invalid_argument("transport_report: call build_amplitude first");

  const CVec3 rho = ansatz.rho;
  const CVec3 rho_bar = mtlab::conj(rho);

  const VectorField3 galpha = grad(ansatz.alpha_sharp);
  const VectorField3 gbeta = grad(ansatz.beta_sharp);
  const VectorField3 gchi = grad(ansatz.chi_tau);
  const VectorField3 gpsi = grad(ansatz.psi_sharp);

  std::array<VectorField3, 3> da;  // da[c] = d a / d x_c
  for (int c = 0; c < 3; ++c) {
    da[std::size_t(c)] = VectorField3(g);
    for (int comp = 0; comp < 3; ++comp) {
      ScalarField3 tmp(g);
      tmp.data = ansatz.a.comp[std::size_t(comp)];
      da[std::size_t(c)].comp[std::size_t(comp)] = partial(tmp, c).data;
    }
  }

  VectorField3 combination(g), vs_cutoff(g), vs_full(g), cutoff(g);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const CVec3 a{ansatz.a.comp[0][idx], ansatz.a.comp[1][idx], ansatz.a.comp[2][idx]};
    const CVec3 ga{galpha.comp[0][idx], galpha.comp[1][idx], galpha.comp[2][idx]};
    const CVec3 gb{gbeta.comp[0][idx], gbeta.comp[1][idx], gbeta.comp[2][idx]};
    const CVec3 gc{gchi.comp[0][idx], gchi.comp[1][idx], gchi.comp[2][idx]};
    const CVec3 gp{gpsi.comp[0][idx], gpsi.comp[1][idx], gpsi.comp[2][idx]};

    CVec3 rho_dot_grad_a{};
    for (int comp = 0; comp < 3; ++comp)
      for (int c = 0; c < 3; ++c)
        rho_dot_grad_a[comp] += rho[c] * da[std::size_t(c)].comp[std::size_t(comp)][idx];

    // T[a] = 2 rho.grad a + (grad beta . a) rho + grad alpha x (rho x a)
    const cplx gb_dot_a = dot(gb, a);
    const CVec3 curl_part = cross(ga, cross(rho, a));
    CVec3 T;
    for (int c = 0; c < 3; ++c)
      T[c] = 2.0 * rho_dot_grad_a[c] + gb_dot_a * rho[c] + curl_part[c];

    const cplx al = ansatz.alpha_sharp.data[idx];
    const cplx chi = ansatz.chi_tau.data[idx];
    const cplx psi = ansatz.psi_sharp.data[idx];
    const cplx h = std::exp(0.5 * al) * std::exp(chi * psi);
    const cplx rho_dchi = dot(rho, gc);

    // the cutoff-gradient target: s0 h 2 Psi (rho.grad chi) rho_bar
    const cplx cut = ansatz.s0 * h * 2.0 * psi * rho_dchi;

    // full product-rule expansion of T[a]
    const cplx slot_rho =
        std::exp(-0.5 * al) * dot(rho, gb - ga) + ansatz.s0 * h * dot(rho_bar, ga + gb);
    const cplx slot_rho_bar = ansatz.s0 * h * (2.0 * psi * rho_dchi + 2.0 * chi * dot(rho, gp));

    for (int c = 0; c < 3; ++c) {
      combination.comp[std::size_t(c)][idx] = T[c];
      cutoff.comp[std::size_t(c)][idx] = cut * rho_bar[c];
      vs_cutoff.comp[std::size_t(c)][idx] = T[c] - cut * rho_bar[c];
      vs_full.comp[std::size_t(c)][idx] =
          T[c] - slot_rho * rho[c] - slot_rho_bar * rho_bar[c];
    }
  }

  WeightedNormParams shifted = params;
  shifted.shifted = true;  // these are source-side quantities, weight exponent delta+1

  TransportReport rep;
  rep.combination_norm = weighted_norm(combination, shifted);
  rep.cutoff_term_norm = weighted_norm(cutoff, shifted);
  rep.vs_cutoff_term = weighted_norm(vs_cutoff, shifted);
  rep.vs_full_expansion = weighted_norm(vs_full, shifted);
  return rep;
}

}  // namespace mtlab::cgo
