#pragma once

// Run configuration: a strict JSON schema with unknown-key rejection and
// JSON-pointer error paths, plus the builders that turn a validated config
// into grid, metric, and field objects.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "heat_invariants.hpp"
#include "nc_fields.hpp"

namespace ncgeom {

inline constexpr const char* kToolVersion = "0.1.0";

using njson = nlohmann::json;

struct MetricConfig {
  std::string kind = "flat";             // flat | conformal | explicit
  std::vector<double> diagonal;          // flat: metric diagonal, defaults to ones
  std::vector<ScalarTerm> sigma_modes;   // conformal: cosine modes of the exponent
  std::vector<double> explicit_entries;  // explicit: row-major blocks, point-major
};

struct RunConfig {
  int n = 2;
  std::vector<int> sizes;
  std::vector<double> lengths;
  int n_clifford = 2;
  std::vector<double> twist;
  MetricConfig base_metric;
  DeformationSpec deformation;
  QuadratureSpec quadrature;
  int stencil_order = 4;
  njson command_params = njson::object();
  std::uint64_t seed = 1;
};

namespace detail {

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& msg) {
  throw SchemaError(msg + " at " + (path.empty() ? "/" : path));
}

inline const njson& expect_object(const njson& j, const std::string& path) {
  if (!j.is_object()) schema_fail(path, "expected an object");
  return j;
}

inline void check_keys(const njson& obj, std::initializer_list<const char*> allowed,
                       const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) schema_fail(path, "unknown key '" + it.key() + "'");
  }
}

inline int get_int(const njson& j, const std::string& path) {
  if (!j.is_number_integer()) schema_fail(path, "expected an integer");
  return j.get<int>();
}

inline double get_num(const njson& j, const std::string& path) {
  if (!j.is_number()) schema_fail(path, "expected a number");
  return j.get<double>();
}

inline bool get_bool(const njson& j, const std::string& path) {
  if (!j.is_boolean()) schema_fail(path, "expected a boolean");
  return j.get<bool>();
}

inline std::string get_str(const njson& j, const std::string& path) {
  if (!j.is_string()) schema_fail(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<int> get_int_array(const njson& j, const std::string& path) {
  if (!j.is_array()) schema_fail(path, "expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_int(j[i], path + "/" + std::to_string(i)));
  return out;
}

inline std::vector<double> get_num_array(const njson& j, const std::string& path) {
  if (!j.is_array()) schema_fail(path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_num(j[i], path + "/" + std::to_string(i)));
  return out;
}

// a cosine term {amplitude, mode, phase}; used for conformal exponents and
// density slots
inline ScalarTerm parse_scalar_term(const njson& j, int n, const std::string& path) {
  expect_object(j, path);
  check_keys(j, {"amplitude", "mode", "phase"}, path);
  if (!j.contains("amplitude")) schema_fail(path, "missing key 'amplitude'");
  if (!j.contains("mode")) schema_fail(path, "missing key 'mode'");
  ScalarTerm t;
  t.amplitude = get_num(j["amplitude"], path + "/amplitude");
  t.mode = get_int_array(j["mode"], path + "/mode");
  if (static_cast<int>(t.mode.size()) != n) schema_fail(path + "/mode", "mode needs one integer per axis");
  t.phase = j.contains("phase") ? get_num(j["phase"], path + "/phase") : 0.0;
  return t;
}

inline DeformationTerm parse_deformation_term(const njson& j, int n, int n_clifford,
                                              const std::string& path) {
  expect_object(j, path);
  check_keys(j, {"mu", "blade", "amplitude", "mode", "phase"}, path);
  for (const char* req : {"mu", "blade", "amplitude", "mode"})
    if (!j.contains(req)) schema_fail(path, std::string("missing key '") + req + "'");
  DeformationTerm t;
  t.mu = get_int(j["mu"], path + "/mu");
  if (t.mu < 0 || t.mu >= n) schema_fail(path + "/mu", "axis index out of range");
  t.blade = get_int_array(j["blade"], path + "/blade");
  for (std::size_t i = 0; i < t.blade.size(); ++i)
    if (t.blade[i] < 0 || t.blade[i] >= n_clifford)
      schema_fail(path + "/blade/" + std::to_string(i), "generator index out of range");
  t.amplitude = get_num(j["amplitude"], path + "/amplitude");
  t.mode = get_int_array(j["mode"], path + "/mode");
  if (static_cast<int>(t.mode.size()) != n) schema_fail(path + "/mode", "mode needs one integer per axis");
  t.phase = j.contains("phase") ? get_num(j["phase"], path + "/phase") : 0.0;
  return t;
}

}  // namespace detail

inline RunConfig parse_config_json(const njson& root) {
  using namespace detail;
  expect_object(root, "");
  check_keys(root,
             {"manifold", "representation", "base_metric", "deformation", "quadrature",
              "stencil_order", "command_params", "seed"},
             "");
  RunConfig cfg;

  if (!root.contains("manifold")) schema_fail("", "missing key 'manifold'");
  {
    const njson& m = expect_object(root["manifold"], "/manifold");
    check_keys(m, {"n", "sizes", "lengths"}, "/manifold");
    if (!m.contains("n")) schema_fail("/manifold", "missing key 'n'");
    cfg.n = get_int(m["n"], "/manifold/n");
    if (cfg.n < 1 || cfg.n > 6) schema_fail("/manifold/n", "dimension out of the supported range");
    if (!m.contains("sizes")) schema_fail("/manifold", "missing key 'sizes'");
    cfg.sizes = get_int_array(m["sizes"], "/manifold/sizes");
    if (static_cast<int>(cfg.sizes.size()) != cfg.n)
      schema_fail("/manifold/sizes", "need one size per axis");
    for (std::size_t i = 0; i < cfg.sizes.size(); ++i)
      if (cfg.sizes[i] < 2) schema_fail("/manifold/sizes/" + std::to_string(i), "grid size too small");
    cfg.lengths = m.contains("lengths") ? get_num_array(m["lengths"], "/manifold/lengths")
                                        : std::vector<double>(cfg.n, 1.0);
    if (static_cast<int>(cfg.lengths.size()) != cfg.n)
      schema_fail("/manifold/lengths", "need one length per axis");
    for (std::size_t i = 0; i < cfg.lengths.size(); ++i)
      if (!(cfg.lengths[i] > 0.0))
        schema_fail("/manifold/lengths/" + std::to_string(i), "length must be positive");
  }

  cfg.n_clifford = cfg.n;
  if (root.contains("representation")) {
    const njson& r = expect_object(root["representation"], "/representation");
    check_keys(r, {"n_clifford", "twist"}, "/representation");
    if (r.contains("n_clifford")) {
      cfg.n_clifford = get_int(r["n_clifford"], "/representation/n_clifford");
      if (cfg.n_clifford < 1 || cfg.n_clifford > 6)
        schema_fail("/representation/n_clifford", "dimension out of the supported range");
    }
    if (r.contains("twist")) {
      cfg.twist = get_num_array(r["twist"], "/representation/twist");
      // an empty array means untwisted; otherwise one phase per axis
      if (!cfg.twist.empty() && static_cast<int>(cfg.twist.size()) != cfg.n)
        schema_fail("/representation/twist", "need one phase per axis");
    }
  }

  if (root.contains("base_metric")) {
    const njson& b = expect_object(root["base_metric"], "/base_metric");
    check_keys(b, {"kind", "diagonal", "sigma_modes", "entries"}, "/base_metric");
    if (b.contains("kind")) cfg.base_metric.kind = get_str(b["kind"], "/base_metric/kind");
    if (cfg.base_metric.kind != "flat" && cfg.base_metric.kind != "conformal" &&
        cfg.base_metric.kind != "explicit")
      schema_fail("/base_metric/kind", "unsupported metric kind '" + cfg.base_metric.kind + "'");
    if (b.contains("diagonal")) {
      if (cfg.base_metric.kind != "flat")
        schema_fail("/base_metric/diagonal", "diagonal only applies to the flat kind");
      cfg.base_metric.diagonal = get_num_array(b["diagonal"], "/base_metric/diagonal");
      if (static_cast<int>(cfg.base_metric.diagonal.size()) != cfg.n)
        schema_fail("/base_metric/diagonal", "need one entry per axis");
      for (std::size_t i = 0; i < cfg.base_metric.diagonal.size(); ++i)
        if (!(cfg.base_metric.diagonal[i] > 0.0))
          schema_fail("/base_metric/diagonal/" + std::to_string(i), "entry must be positive");
    }
    if (b.contains("sigma_modes")) {
      if (cfg.base_metric.kind != "conformal")
        schema_fail("/base_metric/sigma_modes", "sigma_modes only applies to the conformal kind");
      const njson& arr = b["sigma_modes"];
      if (!arr.is_array()) schema_fail("/base_metric/sigma_modes", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i)
        cfg.base_metric.sigma_modes.push_back(
            parse_scalar_term(arr[i], cfg.n, "/base_metric/sigma_modes/" + std::to_string(i)));
    }
    if (b.contains("entries")) {
      if (cfg.base_metric.kind != "explicit")
        schema_fail("/base_metric/entries", "entries only applies to the explicit kind");
      cfg.base_metric.explicit_entries = get_num_array(b["entries"], "/base_metric/entries");
    }
  }

  if (root.contains("deformation")) {
    const njson& d = expect_object(root["deformation"], "/deformation");
    check_keys(d, {"kappa", "alpha", "phi", "b"}, "/deformation");
    if (d.contains("kappa")) cfg.deformation.kappa = get_num(d["kappa"], "/deformation/kappa");
    const auto parse_terms = [&](const char* key, std::vector<DeformationTerm>& out) {
      if (!d.contains(key)) return;
      const njson& arr = d[key];
      const std::string path = std::string("/deformation/") + key;
      if (!arr.is_array()) schema_fail(path, "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i)
        out.push_back(parse_deformation_term(arr[i], cfg.n, cfg.n_clifford,
                                             path + "/" + std::to_string(i)));
    };
    parse_terms("alpha", cfg.deformation.alpha);
    parse_terms("b", cfg.deformation.b);
    if (d.contains("phi")) {
      const njson& arr = d["phi"];
      if (!arr.is_array()) schema_fail("/deformation/phi", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i)
        cfg.deformation.phi.push_back(
            parse_scalar_term(arr[i], cfg.n, "/deformation/phi/" + std::to_string(i)));
    }
  }

  if (root.contains("quadrature")) {
    const njson& q = expect_object(root["quadrature"], "/quadrature");
    check_keys(q, {"hermite_order", "tau_outer", "tau_inner", "eig_degeneracy_tol", "use_fast_path"},
               "/quadrature");
    if (q.contains("hermite_order"))
      cfg.quadrature.hermite_order = get_int(q["hermite_order"], "/quadrature/hermite_order");
    if (q.contains("tau_outer"))
      cfg.quadrature.tau_outer = get_int(q["tau_outer"], "/quadrature/tau_outer");
    if (q.contains("tau_inner"))
      cfg.quadrature.tau_inner = get_int(q["tau_inner"], "/quadrature/tau_inner");
    if (q.contains("eig_degeneracy_tol"))
      cfg.quadrature.eig_degeneracy_tol =
          get_num(q["eig_degeneracy_tol"], "/quadrature/eig_degeneracy_tol");
    if (q.contains("use_fast_path"))
      cfg.quadrature.use_fast_path = get_bool(q["use_fast_path"], "/quadrature/use_fast_path");
    if (cfg.quadrature.hermite_order < 4 || cfg.quadrature.hermite_order % 2 != 0)
      schema_fail("/quadrature/hermite_order", "order must be even and at least 4");
  }

  if (root.contains("stencil_order")) {
    cfg.stencil_order = get_int(root["stencil_order"], "/stencil_order");
    if (cfg.stencil_order != 2 && cfg.stencil_order != 4 && cfg.stencil_order != 6)
      schema_fail("/stencil_order", "supported stencil orders are 2, 4, 6");
  }

  if (root.contains("command_params")) {
    expect_object(root["command_params"], "/command_params");
    cfg.command_params = root["command_params"];
  }

  if (root.contains("seed")) {
    const int s = get_int(root["seed"], "/seed");
    if (s < 0) schema_fail("/seed", "seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }

  return cfg;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read config file '" + path + "'");
  njson root;
  try {
    in >> root;
  } catch (const njson::exception& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config_json(root);
}

// fully normalised config with every default materialised; hashing and
// reproducibility statements refer to these bytes
inline njson canonical_config(const RunConfig& cfg) {
  njson j;
  j["manifold"] = {{"n", cfg.n}, {"sizes", cfg.sizes}, {"lengths", cfg.lengths}};
  j["representation"] = {{"n_clifford", cfg.n_clifford}, {"twist", cfg.twist}};
  njson metric;
  metric["kind"] = cfg.base_metric.kind;
  if (!cfg.base_metric.diagonal.empty()) metric["diagonal"] = cfg.base_metric.diagonal;
  if (!cfg.base_metric.sigma_modes.empty()) {
    njson arr = njson::array();
    for (const ScalarTerm& t : cfg.base_metric.sigma_modes)
      arr.push_back({{"amplitude", t.amplitude}, {"mode", t.mode}, {"phase", t.phase}});
    metric["sigma_modes"] = arr;
  }
  if (!cfg.base_metric.explicit_entries.empty())
    metric["entries"] = cfg.base_metric.explicit_entries;
  j["base_metric"] = metric;
  njson deform;
  deform["kappa"] = cfg.deformation.kappa;
  const auto dump_terms = [](const std::vector<DeformationTerm>& terms) {
    njson arr = njson::array();
    for (const DeformationTerm& t : terms)
      arr.push_back({{"mu", t.mu},
                     {"blade", t.blade},
                     {"amplitude", t.amplitude},
                     {"mode", t.mode},
                     {"phase", t.phase}});
    return arr;
  };
  deform["alpha"] = dump_terms(cfg.deformation.alpha);
  deform["b"] = dump_terms(cfg.deformation.b);
  njson phi = njson::array();
  for (const ScalarTerm& t : cfg.deformation.phi)
    phi.push_back({{"amplitude", t.amplitude}, {"mode", t.mode}, {"phase", t.phase}});
  deform["phi"] = phi;
  j["deformation"] = deform;
  j["quadrature"] = {{"hermite_order", cfg.quadrature.hermite_order},
                     {"tau_outer", cfg.quadrature.tau_outer},
                     {"tau_inner", cfg.quadrature.tau_inner},
                     {"eig_degeneracy_tol", cfg.quadrature.eig_degeneracy_tol},
                     {"use_fast_path", cfg.quadrature.use_fast_path}};
  j["stencil_order"] = cfg.stencil_order;
  j["command_params"] = cfg.command_params;
  j["seed"] = cfg.seed;
  return j;
}

inline TorusGrid build_grid(const RunConfig& cfg) { return TorusGrid(cfg.sizes, cfg.lengths); }

inline MetricField build_metric(const RunConfig& cfg) {
  const TorusGrid grid = build_grid(cfg);
  if (cfg.base_metric.kind == "flat") {
    RealMatrix d = RealMatrix::Identity(cfg.n, cfg.n);
    for (std::size_t i = 0; i < cfg.base_metric.diagonal.size(); ++i)
      d(static_cast<int>(i), static_cast<int>(i)) = cfg.base_metric.diagonal[i];
    return MetricField::flat(grid, d);
  }
  if (cfg.base_metric.kind == "conformal") {
    GridReal sigma(grid.npoints, 0.0);
    for (const ScalarTerm& t : cfg.base_metric.sigma_modes) {
      const GridReal m = mode_field(grid, t.amplitude, t.mode, t.phase);
      for (int pt = 0; pt < grid.npoints; ++pt) sigma[pt] += m[pt];
    }
    return MetricField::conformal(grid, sigma);
  }
  // explicit: point-major row-major blocks
  const std::size_t need =
      static_cast<std::size_t>(grid.npoints) * cfg.n * cfg.n;
  if (cfg.base_metric.explicit_entries.size() != need)
    throw ConfigError("explicit metric needs npoints * n * n entries");
  MetricField m;
  m.grid = grid;
  m.g.resize(static_cast<std::size_t>(grid.npoints));
  std::size_t k = 0;
  for (int pt = 0; pt < grid.npoints; ++pt) {
    RealMatrix blk(cfg.n, cfg.n);
    for (int i = 0; i < cfg.n; ++i)
      for (int jj = 0; jj < cfg.n; ++jj) blk(i, jj) = cfg.base_metric.explicit_entries[k++];
    m.g[pt] = blk;
  }
  m.validate();
  return m;
}

inline NCFields build_fields(const RunConfig& cfg) {
  NCFields f = commutative_fields(build_metric(cfg), build_gamma_rep(cfg.n_clifford),
                                  cfg.stencil_order);
  f.twist = cfg.twist;
  if (!cfg.deformation.alpha.empty() || !cfg.deformation.phi.empty() ||
      !cfg.deformation.b.empty())
    f = apply_deformation(f, cfg.deformation);
  require_elliptic(f);
  return f;
}

}  // namespace ncgeom
