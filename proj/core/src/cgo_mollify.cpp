#include <cmath>
#include <stdexcept>

#include "mtlab/cgo.hpp"

namespace mtlab::cgo {

double mollifier_width(double tau, double epsilon) { return std::pow(tau, -epsilon); }

// Support radii chosen so that the profile has unit mass with peak value 1:
// for (1 - |x|^2/r^2)^p the mass is 4 pi r^3 I_p with I_3 = 16/315 and
// I_5 = 256/9009.
double mollifier_radius(MollifierKind kind) {
  switch (kind) {
    case MollifierKind::Bump3: return std::cbrt(315.0 / (64.0 * M_PI));
    default: return std::cbrt(9009.0 / (1024.0 * M_PI));
  }
}

double mollifier_value(const Vec3& x, MollifierKind kind) {
  const double r = mollifier_radius(kind);
  const double u2 = dot(x, x) / (r * r);
  if (u2 >= 1.0) return 0.0;
  const double base = 1.0 - u2;
  const int p = (kind == MollifierKind::Bump3) ? 3 : 5;
  return std::pow(base, p);
}

ScalarField3 mollify(const ScalarField3& field, double tau, double epsilon, MollifierKind kind) {
  if (!(tau > 0.0)) throw std::invalid_argument("mollify: tau must be positive");
  if (!(epsilon > 0.0 && epsilon < 0.125))
    throw std::invalid_argument("mollify: epsilon must lie in (0, 1/8), got " +
                                std::to_string(epsilon));

  const PeriodicBox box = box_of_grid(field.grid);
  const double scale = std::pow(tau, epsilon);  // kernel is tau^{3 eps} Phi(tau^eps x)

  // Sample the kernel at minimum-image displacements from the box origin and
  // renormalize its discrete mass, so constants pass through unchanged.
  CField kernel(box.size());
  double mass = 0.0;
  for (std::size_t k = 0; k < box.n[2]; ++k)
    for (std::size_t j = 0; j < box.n[1]; ++j)
      for (std::size_t i = 0; i < box.n[0]; ++i) {
        Vec3 d{double(i) * box.spacing(0), double(j) * box.spacing(1), double(k) * box.spacing(2)};
        for (int axis = 0; axis < 3; ++axis) {
          const double L = box.length[std::size_t(axis)];
          if (d[axis] > 0.5 * L) d[axis] -= L;
        }
        const double v = mollifier_value({scale * d[0], scale * d[1], scale * d[2]}, kind);
        kernel[box.index(i, j, k)] = v;
        mass += v;
      }
  mass *= box.cell_volume();
  if (!(mass > 0.0)) throw std::runtime_error("mollify: sampled kernel has zero mass");
  for (auto& v : kernel) v /= mass;

  CField data = field.data;
  data = convolve_periodic(box, data, kernel);

  ScalarField3 out(field.grid);
  out.data = std::move(data);
  return out;
}

}  // namespace mtlab::cgo
