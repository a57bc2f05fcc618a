// SPDX-License-Identifier: Apache-2.0

#ifndef PLASMHOM_CONFIG_HPP
#define PLASMHOM_CONFIG_HPP

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "plasmhom/core.hpp"

namespace plasmhom {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parsed run configuration. Unknown keys anywhere in the file are
/// errors; every diagnostic carries the offending field path.
struct RunConfig {
  // material
  std::string profile = "constant";
  Complex eps{2.0, 0.1};
  Complex eps2{4.0, 0.1};          // second phase (two_phase)
  double amplitude = 0.5;          // profile modulation amplitude
  Complex eps_x{1.0, 0.01};        // normal-axis entry (diag_profile)
  Complex eps_t{2.0, 0.01};        // tangential base entry (diag_profile)
  Complex sigma{0.01, 0.3};
  double omega = 1.0;
  double mu = 1.0;
  // geometry
  int resolution = 8;
  std::string sheet = "flat";
  int normal_axis = 3;
  double offset = 0.0;
  double graph_amplitude = 0.1;
  // solver
  double tol = 1e-10;
  long max_iterations = 20000;
  double eta_shift = 0.0;
  int residual_trials = 8;
  bool dump_system = false;
  bool dump_nodal = false;
  // sweeps
  std::vector<double> omega_sweep;
  std::vector<double> d_sweep;
  // finescale
  double half_length = 1.0;
  int sub_layers = 16;
  double window = 0.25;
  long samples = 4096;
  // enz
  Complex sigma_sheet{0.0, 0.3};
  Complex eps_host{2.0, 0.0};
  double f_mean = 1.0;
  double enz_loss = 0.01;
  std::vector<double> enz_factors{1.0, 1.15, 1.3, 1.45, 1.6, 1.75};
  // admissibility check
  long check_samples = 512;
  // output
  std::string out_dir = ".";

  std::string canonical;  // canonical dump used for the output hash
};

namespace detail {

using Json = nlohmann::json;

inline void require_keys(const Json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key: " + path + "." + it.key());
}

inline Complex get_complex(const Json& obj, const std::string& path,
                           const std::string& key, Complex fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Complex(v[0].get<double>(), v[1].get<double>());
  throw ConfigError("config field " + path + "." + key +
                    " must be a number or [re, im] pair");
}

template <typename T>
T get_scalar(const Json& obj, const std::string& path, const std::string& key,
             T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("config field " + path + "." + key + " has the wrong type");
  }
}

inline std::vector<double> get_list(const Json& obj, const std::string& path,
                                    const std::string& key,
                                    std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_array())
    throw ConfigError("config field " + path + "." + key + " must be a list");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ConfigError("config field " + path + "." + key +
                        " must contain numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  using detail::Json;
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  detail::require_keys(root, "config",
                       {"material", "geometry", "solver", "sweep", "finescale",
                        "enz", "check", "output"});
  RunConfig c;
  if (root.contains("material")) {
    const Json& m = root.at("material");
    detail::require_keys(m, "material",
                         {"profile", "eps", "eps2", "amplitude", "eps_x", "eps_t",
                          "sigma", "omega", "mu"});
    c.profile = detail::get_scalar<std::string>(m, "material", "profile", c.profile);
    static const std::set<std::string> profiles{"constant", "two_phase", "sine",
                                                "diag_profile"};
    if (!profiles.count(c.profile))
      throw ConfigError("material.profile: unknown profile '" + c.profile + "'");
    c.eps = detail::get_complex(m, "material", "eps", c.eps);
    c.eps2 = detail::get_complex(m, "material", "eps2", c.eps2);
    c.amplitude = detail::get_scalar<double>(m, "material", "amplitude", c.amplitude);
    c.eps_x = detail::get_complex(m, "material", "eps_x", c.eps_x);
    c.eps_t = detail::get_complex(m, "material", "eps_t", c.eps_t);
    c.sigma = detail::get_complex(m, "material", "sigma", c.sigma);
    c.omega = detail::get_scalar<double>(m, "material", "omega", c.omega);
    c.mu = detail::get_scalar<double>(m, "material", "mu", c.mu);
    if (!(c.omega > 0.0)) throw ConfigError("material.omega must be > 0");
  }
  if (root.contains("geometry")) {
    const Json& g = root.at("geometry");
    detail::require_keys(g, "geometry",
                         {"resolution", "sheet", "normal_axis", "offset",
                          "graph_amplitude"});
    c.resolution = detail::get_scalar<int>(g, "geometry", "resolution", c.resolution);
    c.sheet = detail::get_scalar<std::string>(g, "geometry", "sheet", c.sheet);
    if (c.sheet != "flat" && c.sheet != "graph")
      throw ConfigError("geometry.sheet must be 'flat' or 'graph'");
    c.normal_axis = detail::get_scalar<int>(g, "geometry", "normal_axis", c.normal_axis);
    c.offset = detail::get_scalar<double>(g, "geometry", "offset", c.offset);
    c.graph_amplitude =
        detail::get_scalar<double>(g, "geometry", "graph_amplitude", c.graph_amplitude);
  }
  if (root.contains("solver")) {
    const Json& s = root.at("solver");
    detail::require_keys(s, "solver",
                         {"tol", "max_iterations", "eta_shift", "residual_trials",
                          "dump_system", "dump_nodal"});
    c.tol = detail::get_scalar<double>(s, "solver", "tol", c.tol);
    c.max_iterations =
        detail::get_scalar<long>(s, "solver", "max_iterations", c.max_iterations);
    c.eta_shift = detail::get_scalar<double>(s, "solver", "eta_shift", c.eta_shift);
    c.residual_trials =
        detail::get_scalar<int>(s, "solver", "residual_trials", c.residual_trials);
    c.dump_system = detail::get_scalar<bool>(s, "solver", "dump_system", c.dump_system);
    c.dump_nodal = detail::get_scalar<bool>(s, "solver", "dump_nodal", c.dump_nodal);
    if (!(c.tol > 0.0)) throw ConfigError("solver.tol must be > 0");
  }
  if (root.contains("sweep")) {
    const Json& s = root.at("sweep");
    detail::require_keys(s, "sweep", {"omega", "d"});
    c.omega_sweep = detail::get_list(s, "sweep", "omega", {});
    c.d_sweep = detail::get_list(s, "sweep", "d", {});
    for (double w : c.omega_sweep)
      if (!(w > 0.0)) throw ConfigError("sweep.omega entries must be > 0");
  }
  if (root.contains("finescale")) {
    const Json& f = root.at("finescale");
    detail::require_keys(f, "finescale",
                         {"half_length", "sub_layers", "window", "samples"});
    c.half_length =
        detail::get_scalar<double>(f, "finescale", "half_length", c.half_length);
    c.sub_layers = detail::get_scalar<int>(f, "finescale", "sub_layers", c.sub_layers);
    c.window = detail::get_scalar<double>(f, "finescale", "window", c.window);
    c.samples = detail::get_scalar<long>(f, "finescale", "samples", c.samples);
  }
  if (root.contains("enz")) {
    const Json& e = root.at("enz");
    detail::require_keys(e, "enz",
                         {"sigma_sheet", "eps_host", "f_mean", "loss", "factors"});
    c.sigma_sheet = detail::get_complex(e, "enz", "sigma_sheet", c.sigma_sheet);
    c.eps_host = detail::get_complex(e, "enz", "eps_host", c.eps_host);
    c.f_mean = detail::get_scalar<double>(e, "enz", "f_mean", c.f_mean);
    c.enz_loss = detail::get_scalar<double>(e, "enz", "loss", c.enz_loss);
    c.enz_factors = detail::get_list(e, "enz", "factors", c.enz_factors);
  }
  if (root.contains("check")) {
    const Json& k = root.at("check");
    detail::require_keys(k, "check", {"samples"});
    c.check_samples = detail::get_scalar<long>(k, "check", "samples", c.check_samples);
  }
  if (root.contains("output")) {
    const Json& o = root.at("output");
    detail::require_keys(o, "output", {"directory"});
    c.out_dir = detail::get_scalar<std::string>(o, "output", "directory", c.out_dir);
  }
  c.canonical = root.dump();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

/// Instantiates the material model named by the config for a given
/// frequency. The layered profiles vary along the configured sheet
/// normal; diag_profile is the diagonal-tensor example with modulation
/// along the first tangential direction of a normal-axis-1 sheet.
inline MaterialModel make_material(const RunConfig& c, double omega) {
  int axis = c.normal_axis - 1;
  MaterialModel m;
  if (c.profile == "constant") {
    m = MaterialModel::constants(c.eps, c.sigma, omega, c.mu);
  } else if (c.profile == "two_phase") {
    Complex e1 = c.eps, e2 = c.eps2;
    m = MaterialModel::scalar_profile(
        [e1, e2, axis](const Vector3d& y) { return y[axis] < 0.5 ? e1 : e2; },
        c.sigma, omega);
  } else if (c.profile == "sine") {
    Complex e0 = c.eps;
    double amp = c.amplitude;
    m = MaterialModel::scalar_profile(
        [e0, amp, axis](const Vector3d& y) {
          return e0 + amp * std::sin(2.0 * M_PI * y[axis]);
        },
        c.sigma, omega);
  } else if (c.profile == "diag_profile") {
    Complex ex = c.eps_x, et = c.eps_t;
    double amp = c.amplitude;
    m.epsilon = [ex, et, amp, axis](const Vector3d&, const Vector3d& y) {
      Matrix3c e = Matrix3c::Zero();
      Complex f = et * (1.0 + amp * std::sin(2.0 * M_PI * y[axis]));
      for (int i = 0; i < 3; ++i) e(i, i) = (i == axis) ? ex : f;
      return e;
    };
    m.sigma = MaterialModel::scalar_sigma(c.sigma);
    m.omega = omega;
  } else {
    throw ConfigError("material.profile: unknown profile '" + c.profile + "'");
  }
  m.mu = c.mu;
  return m;
}

inline CellGeometry make_geometry(const RunConfig& c) {
  if (c.sheet == "flat")
    return CellGeometry::flat_sheet(c.resolution, c.normal_axis, c.offset);
  GraphSheet gs;
  double amp = c.graph_amplitude;
  gs.normal_axis = c.normal_axis;
  gs.h = [amp](const Eigen::Vector2d& yp) {
    return amp * std::sin(2.0 * M_PI * yp[0]);
  };
  gs.grad_h = [amp](const Eigen::Vector2d& yp) {
    return Eigen::Vector2d(2.0 * M_PI * amp * std::cos(2.0 * M_PI * yp[0]), 0.0);
  };
  return CellGeometry::graph_sheet(c.resolution, gs);
}

}  // namespace plasmhom

#endif  // PLASMHOM_CONFIG_HPP
