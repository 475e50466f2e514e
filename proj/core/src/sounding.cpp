#include "mtlab/sounding.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace mtlab::sounding {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

// One RK4 sweep of the impedance Riccati equation from z = z1 down to z = z0
// (z1 > z0), i.e. against the depth axis, starting from the value at z1.
cplx riccati_up(const std::function<double(double)>& sigma_of_z, double mu, double omega,
                double z0, double z1, int steps, cplx z_start) {
  const cplx iwm(0.0, omega * mu);
  auto f = [&](double z, cplx Z) { return iwm + sigma_of_z(z) * Z * Z; };
  const double h = (z0 - z1) / double(steps);  // negative
  cplx Z = z_start;
  double z = z1;
  for (int s = 0; s < steps; ++s) {
    const cplx k1 = f(z, Z);
    const cplx k2 = f(z + 0.5 * h, Z + 0.5 * h * k1);
    const cplx k3 = f(z + 0.5 * h, Z + 0.5 * h * k2);
    const cplx k4 = f(z + h, Z + h * k3);
    Z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    z += h;
  }
  return Z;
}

int auto_steps(double length, double sigma_max, double mu, double omega) {
  const double lam = std::sqrt(omega * mu * sigma_max);
  const int n = int(40.0 * length * lam) + 64;
  return std::min(n, 2000000);
}

}  // namespace

cplx halfspace_impedance(double sigma, double mu, double omega) {
  require_positive(sigma, "sigma");
  require_positive(mu, "mu");
  require_positive(omega, "omega");
  return std::sqrt(cplx(0.0, -omega * mu / sigma));
}

cplx surface_impedance(const std::function<double(double)>& sigma_of_z, double mu, double omega,
                       double depth, int steps) {
  require_positive(mu, "mu");
  require_positive(omega, "omega");
  require_positive(depth, "depth");
  double sigma_max = 0.0;
  for (int i = 0; i <= 512; ++i) {
    const double s = sigma_of_z(depth * double(i) / 512.0);
    if (!(s > 0.0)) throw std::invalid_argument("sigma profile must be positive");
    sigma_max = std::max(sigma_max, s);
  }
  if (steps <= 0) steps = auto_steps(depth, sigma_max, mu, omega);
  const cplx z_deep = halfspace_impedance(sigma_of_z(depth), mu, omega);
  return riccati_up(sigma_of_z, mu, omega, 0.0, depth, steps, z_deep);
}

void LayeredModel::validate() const {
  if (sigma.empty() || sigma.size() != thickness.size() + 1)
    throw std::invalid_argument("layered model needs n conductivities and n-1 thicknesses");
  for (double s : sigma) require_positive(s, "layer sigma");
  for (double t : thickness) require_positive(t, "layer thickness");
  require_positive(mu, "mu");
}

double LayeredModel::total_thickness() const {
  double t = 0.0;
  for (double d : thickness) t += d;
  return t;
}

double LayeredModel::sigma_at(double z) const {
  double top = 0.0;
  for (std::size_t j = 0; j < thickness.size(); ++j) {
    if (z < top + thickness[j]) return sigma[j];
    top += thickness[j];
  }
  return sigma.back();
}

SoundingPoint sound_at(const LayeredModel& m, double omega) {
  m.validate();
  require_positive(omega, "omega");

  // Basement closure a few skin depths below the last interface.
  const double skin = std::sqrt(2.0 / (omega * m.mu * m.sigma.back()));
  const double basement_top = m.total_thickness();

  cplx Z = halfspace_impedance(m.sigma.back(), m.mu, omega);
  const double pad = 8.0 * skin;
  if (pad > 0.0) {
    auto s = [&](double) { return m.sigma.back(); };
    Z = riccati_up(s, m.mu, omega, basement_top, basement_top + pad,
                   auto_steps(pad, m.sigma.back(), m.mu, omega), Z);
  }
  double top = basement_top;
  for (std::size_t j = m.thickness.size(); j-- > 0;) {
    const double bottom = top;
    top -= m.thickness[j];
    auto s = [&](double) { return m.sigma[j]; };
    Z = riccati_up(s, m.mu, omega, top, bottom, auto_steps(m.thickness[j], m.sigma[j], m.mu, omega),
                   Z);
  }

  SoundingPoint p;
  p.omega = omega;
  p.z = Z;
  p.rho_a = std::norm(Z) / (omega * m.mu);
  p.phase_deg = std::arg(Z) * 180.0 / 3.14159265358979323846;
  return p;
}

std::vector<SoundingPoint> sounding_curve(const LayeredModel& m,
                                          const std::vector<double>& omegas) {
  std::vector<SoundingPoint> out;
  out.reserve(omegas.size());
  for (double w : omegas) out.push_back(sound_at(m, w));
  return out;
}

void write_sounding_csv(const std::string& path, const std::vector<SoundingPoint>& curve) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "omega,rho_a,phase_deg\n" << std::setprecision(17);
  for (const auto& p : curve) f << p.omega << "," << p.rho_a << "," << p.phase_deg << "\n";
  if (!f) throw std::runtime_error("write failed for " + path);
}

}  // namespace mtlab::sounding
