#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtlab {

// Collocated uniform grid on an axis-aligned box. Spacing along each axis is
// extent/(n-1), so both endpoints are grid points. Linear storage is
// x-fastest: idx = i + n0*(j + n1*k).
struct Grid3 {
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  std::array<double, 3> extent{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> n{2, 2, 2};

  Grid3() = default;
  Grid3(std::array<double, 3> o, std::array<double, 3> e, std::array<std::size_t, 3> nn)
      : origin(o), extent(e), n(nn) {
    validate();
  }
  static Grid3 cube(double lo, double hi, std::size_t nn) {
    return Grid3({lo, lo, lo}, {hi - lo, hi - lo, hi - lo}, {nn, nn, nn});
  }

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (n[a] < 4)
        throw std::invalid_argument("Grid3: need at least 4 points per axis, got n[" +
                                    std::to_string(a) + "] = " + std::to_string(n[a]));
      if (!(extent[a] > 0.0))
        throw std::invalid_argument("Grid3: extent must be positive along every axis");
    }
  }

  double spacing(int axis) const { return extent[axis] / double(n[axis] - 1); }
  std::size_t size() const { return n[0] * n[1] * n[2]; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + n[0] * (j + n[1] * k);
  }
  std::array<double, 3> point(std::size_t i, std::size_t j, std::size_t k) const {
    return {origin[0] + double(i) * spacing(0), origin[1] + double(j) * spacing(1),
            origin[2] + double(k) * spacing(2)};
  }

  bool operator==(const Grid3& o) const {
    return origin == o.origin && extent == o.extent && n == o.n;
  }
};

// Box faces, named by outward normal. Order is the serialization order.
enum class Face : int { XMinus = 0, XPlus, YMinus, YPlus, ZMinus, ZPlus };

inline int face_axis(Face f) { return int(f) / 2; }
inline int face_sign(Face f) { return (int(f) % 2 == 0) ? -1 : +1; }  // sign of outward normal
inline std::array<double, 3> face_normal(Face f) {
  std::array<double, 3> nu{0.0, 0.0, 0.0};
  nu[face_axis(f)] = double(face_sign(f));
  return nu;
}
// In-plane axes of a face in increasing order (e.g. a z-face has {0,1}).
inline std::array<int, 2> face_tangent_axes(Face f) {
  switch (face_axis(f)) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}
inline const char* face_name(Face f) {
  static const char* names[6] = {"x-", "x+", "y-", "y+", "z-", "z+"};
  return names[int(f)];
}
constexpr std::array<Face, 6> all_faces{Face::XMinus, Face::XPlus, Face::YMinus,
                                        Face::YPlus,  Face::ZMinus, Face::ZPlus};

}  // namespace mtlab
