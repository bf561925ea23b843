#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "qeflab/error.hpp"

namespace qeflab::cli {
namespace {

using nlohmann::json;

[[noreturn]] void violation(const std::string& where, const std::string& what) {
  fail(ErrorCode::SchemaViolation, where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) violation(where, "expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) violation(where, "unknown key '" + key + "'");
}

const json& required(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) violation(where, "missing required key '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) violation(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) violation(where, "expected a finite number");
  return x;
}

long long integer(const json& v, const std::string& where, long long lo) {
  if (!v.is_number_integer()) violation(where, "expected an integer");
  const long long x = v.get<long long>();
  if (x < lo) violation(where, "must be at least " + std::to_string(lo));
  return x;
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) violation(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) violation(where, "expected a non-empty array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array() || v[0].empty()) violation(where, "expected rows as arrays");
  const std::size_t cols = v[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row = where + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != cols) violation(row, "ragged matrix");
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(v[i][j], row);
  }
  return m;
}

void sorted(const std::vector<double>& xs, const std::string& where) {
  if (!std::is_sorted(xs.begin(), xs.end())) violation(where, "must be sorted ascending");
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  only_keys(doc, "config", {"oscillator", "grid", "eigen", "qef", "mc", "fock", "output_dir"});

  const json& osc = required(doc, "config", "oscillator");
  only_keys(osc, "oscillator", {"Theta", "R", "M", "T", "theta"});
  cfg.oscillator.ccr = matrix(required(osc, "oscillator", "Theta"), "oscillator.Theta");
  cfg.oscillator.energy = matrix(required(osc, "oscillator", "R"), "oscillator.R");
  cfg.oscillator.coupling = matrix(required(osc, "oscillator", "M"), "oscillator.M");
  cfg.oscillator.horizon = number(required(osc, "oscillator", "T"), "oscillator.T");
  if (osc.contains("theta")) cfg.oscillator.risk_sensitivity = number(osc["theta"], "oscillator.theta");

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    only_keys(g, "grid", {"panels", "nodes_per_panel"});
    if (g.contains("panels")) cfg.grid.panels = static_cast<int>(integer(g["panels"], "grid.panels", 1));
    if (g.contains("nodes_per_panel"))
      cfg.grid.nodes_per_panel = static_cast<int>(integer(g["nodes_per_panel"], "grid.nodes_per_panel", 1));
    if (static_cast<long long>(cfg.grid.panels) * cfg.grid.nodes_per_panel > 4096)
      violation("grid", "more than 4096 nodes");
  }

  if (doc.contains("eigen")) {
    const json& e = doc["eigen"];
    only_keys(e, "eigen", {"omega_min", "omega_max", "samples", "capture_fraction"});
    if (e.contains("omega_min")) cfg.eigen.omega_min = number(e["omega_min"], "eigen.omega_min");
    if (e.contains("omega_max")) cfg.eigen.omega_max = number(e["omega_max"], "eigen.omega_max");
    if (e.contains("samples")) cfg.eigen.samples = static_cast<int>(integer(e["samples"], "eigen.samples", 16));
    if (e.contains("capture_fraction")) {
      cfg.eigen.capture_fraction = number(e["capture_fraction"], "eigen.capture_fraction");
      if (!(cfg.eigen.capture_fraction > 0.0 && cfg.eigen.capture_fraction < 1.0))
        violation("eigen.capture_fraction", "must lie in (0, 1)");
    }
    if (cfg.eigen.omega_min && !(*cfg.eigen.omega_min > 0.0)) violation("eigen.omega_min", "must be positive");
    if (cfg.eigen.omega_max && !(*cfg.eigen.omega_max > 0.0)) violation("eigen.omega_max", "must be positive");
    if (cfg.eigen.omega_min && cfg.eigen.omega_max && *cfg.eigen.omega_min >= *cfg.eigen.omega_max)
      violation("eigen", "omega_min must be below omega_max");
  }

  if (doc.contains("qef")) {
    const json& q = doc["qef"];
    only_keys(q, "qef", {"theta_list"});
    if (q.contains("theta_list")) cfg.qef.theta_list = numbers(q["theta_list"], "qef.theta_list");
    sorted(cfg.qef.theta_list, "qef.theta_list");
    for (double t : cfg.qef.theta_list)
      if (t < 0.0) violation("qef.theta_list", "entries must be nonnegative");
  }

  if (doc.contains("mc")) {
    const json& m = doc["mc"];
    only_keys(m, "mc", {"samples", "seed", "batch", "theta_fractions"});
    if (m.contains("samples")) cfg.mc.base.samples = static_cast<std::size_t>(integer(m["samples"], "mc.samples", 2));
    if (m.contains("batch")) cfg.mc.base.batch = static_cast<std::size_t>(integer(m["batch"], "mc.batch", 1));
    if (m.contains("seed")) {
      if (!m["seed"].is_number_unsigned() && !(m["seed"].is_number_integer() && m["seed"].get<long long>() >= 0))
        violation("mc.seed", "expected an unsigned 64-bit integer");
      cfg.mc.base.seed = m["seed"].get<std::uint64_t>();
    }
    if (m.contains("theta_fractions")) {
      cfg.mc.theta_fractions = numbers(m["theta_fractions"], "mc.theta_fractions");
      sorted(cfg.mc.theta_fractions, "mc.theta_fractions");
      for (double f : cfg.mc.theta_fractions)
        if (!(f >= 0.0 && f < 1.0)) violation("mc.theta_fractions", "entries must lie in [0, 1)");
    }
    if (cfg.mc.base.samples < 2 * cfg.mc.base.batch) violation("mc", "samples must be at least 2*batch");
  }

  if (doc.contains("fock")) {
    const json& f = doc["fock"];
    only_keys(f, "fock", {"N", "omega_list", "quad_order", "corner_tolerance"});
    if (f.contains("N")) {
      cfg.fock.n_list.clear();
      if (f["N"].is_array()) {
        for (std::size_t i = 0; i < f["N"].size(); ++i)
          cfg.fock.n_list.push_back(static_cast<int>(integer(f["N"][i], "fock.N", 4)));
      } else {
        cfg.fock.n_list.push_back(static_cast<int>(integer(f["N"], "fock.N", 4)));
      }
      for (int n : cfg.fock.n_list)
        if (n > 400) violation("fock.N", "at most 400");
    }
    if (f.contains("omega_list")) {
      cfg.fock.omega_list = numbers(f["omega_list"], "fock.omega_list");
      sorted(cfg.fock.omega_list, "fock.omega_list");
      for (double w : cfg.fock.omega_list)
        if (w < 0.0) violation("fock.omega_list", "entries must be nonnegative");
    }
    if (f.contains("quad_order")) cfg.fock.quad_order = static_cast<int>(integer(f["quad_order"], "fock.quad_order", 1));
    if (f.contains("corner_tolerance")) {
      cfg.fock.corner_tolerance = number(f["corner_tolerance"], "fock.corner_tolerance");
      if (!(cfg.fock.corner_tolerance > 0.0)) violation("fock.corner_tolerance", "must be positive");
    }
  }

  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) violation("output_dir", "expected a string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }

  validate(cfg.oscillator);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::SchemaViolation, "cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::SchemaViolation, std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace qeflab::cli
