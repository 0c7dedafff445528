#include "sbc/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "sbc/dynamics.hpp"
#include "sbc/errors.hpp"

namespace sbc {

using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "x_samples",      "xp_samples",  "X_bounds",        "X_init",       "X_unsafe",
      "kernel",         "estimator",   "sigma_f",         "sigma_l",      "lambda",
      "set_scaling",    "num_frequencies", "lattice_resolution", "feature_sigma_l", "optimiser",
      "time_horizon",   "epsilon",     "b_bar",           "kappa",        "seed",
      "pad",            "system_dynamics", "noise_std",   "num_samples",  "verify"};
  return keys;
}

[[noreturn]] void type_error(const std::string& key, const char* expected) {
  throw ConfigError("key '" + key + "' must be " + expected);
}

double get_number(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (!v.is_number()) type_error(key, "a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (v.is_number_integer() || v.is_number_unsigned()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d) return static_cast<std::int64_t>(d);
  }
  type_error(key, "an integer");
}

std::string get_string(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (!v.is_string()) type_error(key, "a string");
  return v.get<std::string>();
}

/// A number broadcast to `dim` entries, or a list of exactly `dim` numbers.
Vector get_vector(const json& doc, const std::string& key, std::size_t dim) {
  const json& v = doc.at(key);
  if (v.is_number()) return Vector::Constant(static_cast<Eigen::Index>(dim), v.get<double>());
  if (!v.is_array()) type_error(key, "a number or a list of numbers");
  if (v.size() == 1) {
    if (!v[0].is_number()) type_error(key, "a number or a list of numbers");
    return Vector::Constant(static_cast<Eigen::Index>(dim), v[0].get<double>());
  }
  if (v.size() != dim) {
    throw ConfigError("key '" + key + "' has " + std::to_string(v.size()) + " entries, expected " +
                      std::to_string(dim));
  }
  Vector out(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    if (!v[i].is_number()) type_error(key, "a number or a list of numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

RegionSet get_set(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (v.is_string()) return parse_region_set(v.get<std::string>());
  if (v.is_array()) {
    if (v.empty()) throw ConfigError("key '" + key + "' must not be an empty list");
    std::vector<RegionSet> members;
    for (const auto& item : v) {
      if (!item.is_string()) type_error(key, "a set string or a list of set strings");
      members.push_back(parse_region_set(item.get<std::string>()));
    }
    if (members.size() == 1) return members.front();
    return RegionSet{std::move(members)};
  }
  type_error(key, "a set string or a list of set strings");
}

std::vector<std::vector<double>> get_rows(const json& v, const std::string& key) {
  if (!v.is_array()) type_error(key, "a list of rows or a CSV path");
  std::vector<std::vector<double>> rows;
  rows.reserve(v.size());
  for (const auto& row : v) {
    std::vector<double> r;
    if (row.is_number()) {
      r.push_back(row.get<double>());
    } else if (row.is_array()) {
      for (const auto& e : row) {
        if (!e.is_number()) type_error(key, "a list of numeric rows");
        r.push_back(e.get<double>());
      }
    } else {
      type_error(key, "a list of numeric rows");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

json set_to_json(const RegionSet& s) {
  if (!s.is_multi()) return s.to_string();
  json arr = json::array();
  for (const auto& m : s.leaves()) arr.push_back(m.to_string());
  return arr;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json matrix_to_json(const Matrix& m) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) arr.push_back(vector_to_json(m.row(i).transpose()));
  return arr;
}

json yaml_node_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_node_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_node_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar: {
      const std::string& s = node.Scalar();
      if (node.Tag() == "!") return s;  // quoted scalar
      if (s == "true" || s == "True" || s == "TRUE") return true;
      if (s == "false" || s == "False" || s == "FALSE") return false;
      if (s == "null" || s == "~") return nullptr;
      if (!s.empty()) {
        char* end = nullptr;
        const long long i = std::strtoll(s.c_str(), &end, 10);
        if (*end == '\0') return i;
        const double d = std::strtod(s.c_str(), &end);
        if (*end == '\0') return d;
      }
      return s;
    }
  }
  return nullptr;
}

}  // namespace

bool operator==(const Configuration& a, const Configuration& b) {
  auto same = [](const Vector& u, const Vector& v) { return u.size() == v.size() && u == v; };
  return a.samples == b.samples && a.spec.domain == b.spec.domain && a.spec.initial == b.spec.initial &&
         a.spec.unsafe == b.spec.unsafe && a.spec.horizon == b.spec.horizon && a.kernel == b.kernel &&
         a.estimator == b.estimator && a.sigma_f == b.sigma_f && same(a.sigma_l, b.sigma_l) && a.lambda == b.lambda &&
         a.set_scaling == b.set_scaling && a.num_frequencies == b.num_frequencies &&
         a.lattice_resolution == b.lattice_resolution && same(a.feature_sigma_l, b.feature_sigma_l) &&
         a.optimiser == b.optimiser && a.epsilon == b.epsilon && a.b_bar == b.b_bar && a.kappa == b.kappa &&
         a.seed == b.seed && a.pad == b.pad && a.system_dynamics == b.system_dynamics &&
         same(a.noise_std, b.noise_std) && a.num_samples == b.num_samples && a.verify == b.verify;
}

json yaml_to_json(const std::string& text) {
  try {
    return yaml_node_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML syntax error: ") + e.what());
  }
}

Configuration parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("configuration must be a mapping of keys to values");
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().contains(key)) throw ConfigError("unknown key '" + key + "'");
  }
  for (const char* key : {"X_bounds", "X_init", "X_unsafe"}) {
    if (!doc.contains(key)) throw ConfigError(std::string("missing required key '") + key + "'");
  }

  const RegionSet domain = get_set(doc, "X_bounds");
  if (!domain.is_rect()) throw ConfigError("X_bounds must be a single RectSet");
  const std::size_t n = domain.dimension();
  RegionSet initial = get_set(doc, "X_init");
  RegionSet unsafe = get_set(doc, "X_unsafe");
  if (initial.dimension() != n || unsafe.dimension() != n) {
    throw ConfigError("X_init and X_unsafe must have the dimension of X_bounds (" + std::to_string(n) + ")");
  }
  int horizon = 1;
  if (doc.contains("time_horizon")) {
    const auto t = get_integer(doc, "time_horizon");
    if (t < 1) throw ConfigError("time_horizon must be at least 1");
    horizon = static_cast<int>(t);
  }

  Configuration c(SafetySpec{domain, std::move(initial), std::move(unsafe), horizon});
  c.base_dir = base_dir;

  const bool has_x = doc.contains("x_samples");
  const bool has_xp = doc.contains("xp_samples");
  if (has_x != has_xp) throw ConfigError("x_samples and xp_samples must be given together");
  if (has_x) {
    const json& xs = doc.at("x_samples");
    const json& xps = doc.at("xp_samples");
    if (xs.is_string() != xps.is_string()) {
      throw ConfigError("x_samples and xp_samples must both be inline lists or both be CSV paths");
    }
    if (xs.is_string()) {
      c.samples.x_csv = xs.get<std::string>();
      c.samples.xp_csv = xps.get<std::string>();
    } else {
      try {
        c.samples.inline_samples = load_samples(get_rows(xs, "x_samples"), get_rows(xps, "xp_samples"));
      } catch (const DataError& e) {
        throw ConfigError(e.what());
      }
      if (static_cast<std::size_t>(c.samples.inline_samples->dimension()) != n) {
        throw ConfigError("samples have dimension " + std::to_string(c.samples.inline_samples->dimension()) +
                          " but X_bounds has dimension " + std::to_string(n));
      }
    }
  }

  if (doc.contains("system_dynamics")) {
    const json& dyn = doc.at("system_dynamics");
    if (!dyn.is_array()) type_error("system_dynamics", "a list of expression strings");
    for (const auto& e : dyn) {
      if (!e.is_string()) type_error("system_dynamics", "a list of expression strings");
      c.system_dynamics.push_back(e.get<std::string>());
    }
    if (c.system_dynamics.size() != n) {
      throw ConfigError("system_dynamics has " + std::to_string(c.system_dynamics.size()) +
                        " expressions, expected " + std::to_string(n));
    }
    try {
      (void)parse_dynamics(c.system_dynamics);
    } catch (const ExpressionError& e) {
      throw ConfigError(std::string("system_dynamics: ") + e.what());
    }
  }
  if (!has_x && c.system_dynamics.empty()) {
    throw ConfigError("missing required key: either x_samples/xp_samples or system_dynamics");
  }

  if (doc.contains("kernel")) c.kernel = get_string(doc, "kernel");
  if (c.kernel != "GaussianKernel") throw ConfigError("unsupported kernel '" + c.kernel + "'");
  if (doc.contains("estimator")) c.estimator = get_string(doc, "estimator");
  if (c.estimator != "KernelRidgeRegressor") throw ConfigError("unsupported estimator '" + c.estimator + "'");

  if (doc.contains("sigma_f")) c.sigma_f = get_number(doc, "sigma_f");
  if (!(c.sigma_f > 0.0)) throw ConfigError("sigma_f must be positive");
  if (!doc.contains("sigma_l")) throw ConfigError("missing required key 'sigma_l'");
  c.sigma_l = get_vector(doc, "sigma_l", n);
  if (!(c.sigma_l.array() > 0.0).all()) throw ConfigError("sigma_l must be positive");
  if (doc.contains("lambda")) c.lambda = get_number(doc, "lambda");
  if (!(c.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (doc.contains("set_scaling")) c.set_scaling = get_number(doc, "set_scaling");
  if (!(c.set_scaling >= 0.0)) throw ConfigError("set_scaling must be non-negative");

  for (const char* key : {"num_frequencies", "lattice_resolution", "feature_sigma_l"}) {
    if (!doc.contains(key)) throw ConfigError(std::string("missing required key '") + key + "'");
  }
  c.num_frequencies = static_cast<int>(get_integer(doc, "num_frequencies"));
  if (c.num_frequencies < 2) throw ConfigError("num_frequencies must be at least 2 (constant plus one band)");
  c.lattice_resolution = static_cast<int>(get_integer(doc, "lattice_resolution"));
  if (c.lattice_resolution < 2) throw ConfigError("lattice_resolution must be at least 2");
  c.feature_sigma_l = get_vector(doc, "feature_sigma_l", n);
  if (!(c.feature_sigma_l.array() > 0.0).all()) throw ConfigError("feature_sigma_l must be positive");

  if (doc.contains("optimiser")) c.optimiser = get_string(doc, "optimiser");
  if (doc.contains("epsilon")) c.epsilon = get_number(doc, "epsilon");
  if (!(c.epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");
  if (doc.contains("b_bar")) c.b_bar = get_number(doc, "b_bar");
  if (doc.contains("kappa")) c.kappa = get_number(doc, "kappa");
  if (c.b_bar && !(*c.b_bar > 0.0)) throw ConfigError("b_bar must be positive");
  if (c.kappa && *c.kappa < c.sigma_f) throw ConfigError("kappa must be at least sigma_f");
  if (c.epsilon > 0.0 && (!c.b_bar || !c.kappa)) throw ConfigError("epsilon > 0 requires b_bar and kappa");

  if (doc.contains("seed")) {
    const auto s = get_integer(doc, "seed");
    if (s < 0) throw ConfigError("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (doc.contains("pad")) c.pad = get_number(doc, "pad");
  if (!(c.pad >= 0.0)) throw ConfigError("pad must be non-negative");

  if (doc.contains("noise_std")) {
    c.noise_std = get_vector(doc, "noise_std", n);
    if (!(c.noise_std.array() >= 0.0).all()) throw ConfigError("noise_std must be non-negative");
  }
  if (doc.contains("num_samples")) {
    c.num_samples = static_cast<int>(get_integer(doc, "num_samples"));
    if (c.num_samples < 1) throw ConfigError("num_samples must be at least 1");
  }
  if (doc.contains("verify")) {
    if (!doc.at("verify").is_boolean()) type_error("verify", "a boolean");
    c.verify = doc.at("verify").get<bool>();
  }
  if (c.verify && c.system_dynamics.empty()) throw ConfigError("verify requires system_dynamics");
  return c;
}

Configuration parse_config(const std::string& text, ConfigFormat format, const std::filesystem::path& base_dir) {
  json doc;
  if (format == ConfigFormat::json) {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("JSON syntax error: ") + e.what());
    }
  } else {
    doc = yaml_to_json(text);
  }
  return parse_config(doc, base_dir);
}

Configuration load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path.string() + "': file not found");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto ext = path.extension().string();
  const ConfigFormat fmt = (ext == ".json") ? ConfigFormat::json : ConfigFormat::yaml;
  return parse_config(ss.str(), fmt, path.parent_path());
}

json to_json(const Configuration& c) {
  json doc = json::object();
  if (c.samples.inline_samples) {
    doc["x_samples"] = matrix_to_json(c.samples.inline_samples->x);
    doc["xp_samples"] = matrix_to_json(c.samples.inline_samples->xp);
  } else if (!c.samples.x_csv.empty()) {
    doc["x_samples"] = c.samples.x_csv;
    doc["xp_samples"] = c.samples.xp_csv;
  }
  doc["X_bounds"] = set_to_json(c.spec.domain);
  doc["X_init"] = set_to_json(c.spec.initial);
  doc["X_unsafe"] = set_to_json(c.spec.unsafe);
  doc["time_horizon"] = c.spec.horizon;
  doc["kernel"] = c.kernel;
  doc["estimator"] = c.estimator;
  doc["sigma_f"] = c.sigma_f;
  doc["sigma_l"] = vector_to_json(c.sigma_l);
  doc["lambda"] = c.lambda;
  doc["set_scaling"] = c.set_scaling;
  doc["num_frequencies"] = c.num_frequencies;
  doc["lattice_resolution"] = c.lattice_resolution;
  doc["feature_sigma_l"] = vector_to_json(c.feature_sigma_l);
  doc["optimiser"] = c.optimiser;
  doc["epsilon"] = c.epsilon;
  if (c.b_bar) doc["b_bar"] = *c.b_bar;
  if (c.kappa) doc["kappa"] = *c.kappa;
  doc["seed"] = c.seed;
  doc["pad"] = c.pad;
  if (!c.system_dynamics.empty()) doc["system_dynamics"] = c.system_dynamics;
  if (c.noise_std.size() > 0) doc["noise_std"] = vector_to_json(c.noise_std);
  doc["num_samples"] = c.num_samples;
  doc["verify"] = c.verify;
  return doc;
}

Dataset resolve_dataset(const Configuration& c) {
  if (c.samples.inline_samples) return *c.samples.inline_samples;
  if (!c.samples.x_csv.empty()) {
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path path(p);
      return path.is_relative() ? c.base_dir / path : path;
    };
    Dataset d = load_samples(resolve(c.samples.x_csv), resolve(c.samples.xp_csv));
    if (static_cast<std::size_t>(d.dimension()) != c.dimension()) {
      throw DataError("CSV samples have dimension " + std::to_string(d.dimension()) + ", expected " +
                      std::to_string(c.dimension()));
    }
    return d;
  }
  const DynamicsModel model = parse_dynamics(c.system_dynamics, c.noise_std);
  return sample_transitions(model, c.num_samples, c.spec.domain, c.seed);
}

}  // namespace sbc
