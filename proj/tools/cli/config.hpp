#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qeflab/mc.hpp"
#include "qeflab/model.hpp"

namespace qeflab::cli {

struct GridConfig {
  int panels = 8;
  int nodes_per_panel = 16;
};

struct EigenConfig {
  std::optional<double> omega_min;
  std::optional<double> omega_max;
  int samples = 2000;
  double capture_fraction = 0.99;
};

struct QefConfig {
  std::vector<double> theta_list;
};

struct McRunConfig {
  McConfig base;
  std::vector<double> theta_fractions{0.2, 0.5};
};

struct FockConfig {
  std::vector<int> n_list{40};
  std::vector<double> omega_list{0.2};
  int quad_order = 40;
  double corner_tolerance = 1e-6;
};

struct RunConfig {
  OscillatorSpec oscillator;
  GridConfig grid;
  EigenConfig eigen;
  QefConfig qef;
  McRunConfig mc;
  FockConfig fock;
  std::filesystem::path output_dir = ".";
};

/// Checks the document against the published schema and converts it.
/// Structural problems throw SchemaViolation; the oscillator itself is then
/// checked by qeflab::validate (SingularTheta, NotAntisymmetric, ...).
RunConfig parse_config(const nlohmann::json& doc);

RunConfig load_config(const std::filesystem::path& path);

}  // namespace qeflab::cli
