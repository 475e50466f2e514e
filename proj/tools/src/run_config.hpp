#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtlab/impedance.hpp"
#include "mtlab/material.hpp"
#include "mtlab/sounding.hpp"

namespace mtool {

using json = nlohmann::ordered_json;
using mtlab::MaterialModel;
using mtlab::Vec3;

enum class Experiment {
  Forward,
  Impedance,
  CgoLadder,
  IdentityScan,
  Mirror,
  KelvinChecks,
  SymbolProbe,
  ApparentResistivity,
};

const char* experiment_name(Experiment e);

struct GridSpec {
  std::size_t n = 32;
  double halfwidth = 3.0;
};

// Boundary data for the forward run: either the zero trace or the trace of
// an exact constant-material plane wave (which doubles as the oracle).
struct BcSpec {
  std::string kind = "zero";
  Vec3 khat{1.0, 1.0, 1.0};
  Vec3 p{1.0, -1.0, 0.0};
};

struct CgoSpec {
  double epsilon = 1.0 / 16;
  double theta = 0.25;
  double s0 = 0.5;
  double delta = -0.5;
  int member = 1;
  bool materialize = false;
};

struct RunConfig {
  Experiment experiment = Experiment::Forward;
  std::string out = "mtlab_out";
  std::uint64_t seed = 0;
  int threads = 1;
  json echo;  // parsed config, repeated verbatim in the summary

  GridSpec grid;
  MaterialModel material{1.0, 1.0, {}};
  MaterialModel material2{1.0, 1.0, {}};
  double omega = 1.0;
  std::vector<double> omegas;
  std::vector<double> tau_ladder{2.0, 4.0};
  Vec3 xi{1.0, 0.5, -0.3};
  BcSpec bc;
  CgoSpec cgo;
  bool dump_fields = false;

  // identity scan
  int xi_kmax = 8;                // lattice [-kmax, kmax) per axis on the box bins
  std::vector<Vec3> xi_list;      // explicit override of the lattice
  std::string target = "sigma";   // sigma | mu | both
  bool recover = false;
  bool fixed_frame = false;
  Vec3 rho1{};
  Vec3 rho2{};

  bool even_extend = false;  // mirror: reflect the bump list across the plane

  mtlab::BasisSpec basis;

  // kelvin
  std::string map_kind = "sphere_to_halfspace";
  int points = 100;

  // symbol probe
  std::vector<std::array<double, 2>> xi_ladder{{1.0, 0.0}, {2.0, 0.0}, {4.0, 0.0}, {8.0, 0.0}};
  Vec3 boundary_point{0.0, 0.0, 0.0};
  int probe_nodes = 4001;
  double probe_depth_factor = 24.0;

  mtlab::sounding::LayeredModel layers;

  std::map<std::string, double> tolerances;
};

// Parses and validates against the subcommand's experiment family. Throws
// std::invalid_argument naming the offending key for unknown keys, type
// mismatches, and precondition violations.
RunConfig parse_config(const json& j, const std::string& subcommand);

// Built-in config used when --config is not given.
json default_config(const std::string& subcommand);

double tolerance_or(const RunConfig& cfg, const std::string& name, double fallback);

}  // namespace mtool
