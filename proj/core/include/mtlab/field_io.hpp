#pragma once

#include <string>

#include "mtlab/field.hpp"

namespace mtlab {

// On-disk format: <name>.bin holds little-endian float64 (re,im) pairs in
// x-fastest order (components concatenated for vector fields, x then y then
// z); <name>.json is the sidecar {origin, extent, n, components}.
void write_field(const std::string& path_base, const ScalarField3& f);
void write_field(const std::string& path_base, const VectorField3& f);
ScalarField3 read_scalar_field(const std::string& path_base);
VectorField3 read_vector_field(const std::string& path_base);

}  // namespace mtlab
