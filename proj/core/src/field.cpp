#include "mtlab/field.hpp"

#include <sstream>

namespace mtlab {

void check_same_grid(const Grid3& a, const Grid3& b, const char* where) {
  if (a == b) return;
  std::ostringstream msg;
  msg << where << ": fields live on different grids (n = " << a.n[0] << "x" << a.n[1] << "x"
      << a.n[2] << " vs " << b.n[0] << "x" << b.n[1] << "x" << b.n[2] << ")";
  throw std::invalid_argument(msg.str());
}

}  // namespace mtlab
