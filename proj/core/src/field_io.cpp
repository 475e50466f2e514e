#include "mtlab/field_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

#include <nlohmann/json.hpp>

namespace mtlab {

static_assert(std::endian::native == std::endian::little,
              "field blobs are little-endian; big-endian hosts are not supported");

namespace {

using nlohmann::json;

json sidecar(const Grid3& g, int components) {
  json j;
  j["origin"] = g.origin;
  j["extent"] = g.extent;
  j["n"] = g.n;
  j["components"] = components;
  return j;
}

void write_blob(const std::string& path, const std::vector<const std::vector<cplx>*>& arrays) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto* a : arrays)
    os.write(reinterpret_cast<const char*>(a->data()),
             std::streamsize(a->size() * sizeof(cplx)));
  if (!os) throw std::runtime_error("short write: " + path);
}

std::pair<Grid3, int> read_sidecar(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open sidecar: " + path);
  json j = json::parse(is);
  Grid3 g;
  j.at("origin").get_to(g.origin);
  j.at("extent").get_to(g.extent);
  j.at("n").get_to(g.n);
  g.validate();
  return {g, j.at("components").get<int>()};
}

void read_blob(const std::string& path, std::vector<std::vector<cplx>*> arrays) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open blob: " + path);
  for (auto* a : arrays) {
    is.read(reinterpret_cast<char*>(a->data()), std::streamsize(a->size() * sizeof(cplx)));
    if (std::size_t(is.gcount()) != a->size() * sizeof(cplx))
      throw std::runtime_error("blob truncated: " + path);
  }
}

}  // namespace

void write_field(const std::string& base, const ScalarField3& f) {
  std::ofstream js(base + ".json");
  js << sidecar(f.grid, 1).dump(2) << "\n";
  write_blob(base + ".bin", {&f.data});
}

void write_field(const std::string& base, const VectorField3& f) {
  std::ofstream js(base + ".json");
  js << sidecar(f.grid, 3).dump(2) << "\n";
  write_blob(base + ".bin", {&f.comp[0], &f.comp[1], &f.comp[2]});
}

ScalarField3 read_scalar_field(const std::string& base) {
  auto [g, comps] = read_sidecar(base + ".json");
  if (comps != 1) throw std::runtime_error(base + ": expected 1 component, got " + std::to_string(comps));
  ScalarField3 f(g);
  read_blob(base + ".bin", {&f.data});
  return f;
}

VectorField3 read_vector_field(const std::string& base) {
  auto [g, comps] = read_sidecar(base + ".json");
  if (comps != 3) throw std::runtime_error(base + ": expected 3 components, got " + std::to_string(comps));
  VectorField3 f(g);
  read_blob(base + ".bin", {&f.comp[0], &f.comp[1], &f.comp[2]});
  return f;
}

}  // namespace mtlab
