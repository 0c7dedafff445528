#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbc/data.hpp"
#include "sbc/geometry.hpp"

namespace sbc {

enum class ConfigFormat { yaml, json };

/// Where the transitions come from: inline arrays, a CSV pair, or generated from
/// `system_dynamics`.
struct SampleSource {
  std::optional<Dataset> inline_samples;
  std::string x_csv;
  std::string xp_csv;

  friend bool operator==(const SampleSource&, const SampleSource&) = default;
};

struct Configuration {
  explicit Configuration(SafetySpec safety) : spec(std::move(safety)) {}

  SampleSource samples;
  SafetySpec spec;

  std::string kernel = "GaussianKernel";
  std::string estimator = "KernelRidgeRegressor";
  double sigma_f = 1.0;
  Vector sigma_l;          // one entry per state dimension
  double lambda = 1e-5;
  double set_scaling = 0.0;
  int num_frequencies = 0;  // bands per dimension, constant included
  int lattice_resolution = 0;
  Vector feature_sigma_l;  // torus-coordinate lengthscale of the feature map
  std::string optimiser = "SimplexOptimiser";
  double epsilon = 0.0;
  std::optional<double> b_bar;
  std::optional<double> kappa;
  std::uint64_t seed = 42;
  double pad = 0.0;

  std::vector<std::string> system_dynamics;
  Vector noise_std;
  int num_samples = 1000;
  bool verify = false;

  /// Directory used to resolve relative CSV paths.
  std::filesystem::path base_dir;

  [[nodiscard]] std::size_t dimension() const noexcept { return spec.dimension(); }
  [[nodiscard]] int time_horizon() const noexcept { return spec.horizon; }

  friend bool operator==(const Configuration& a, const Configuration& b);
};

/// Parse a document; unknown keys, type mismatches and missing keys raise ConfigError.
Configuration parse_config(const std::string& text, ConfigFormat format, const std::filesystem::path& base_dir = {});

/// Parse a JSON value (shared by the CLI and the HTTP service).
Configuration parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Read a file, choosing the format from its extension (.json, otherwise YAML).
Configuration load_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config(to_json(c)) == c.
nlohmann::json to_json(const Configuration& config);

/// YAML document converted to the equivalent JSON value.
nlohmann::json yaml_to_json(const std::string& text);

/// Transitions for the configuration: inline, CSV, or sampled from the dynamics.
Dataset resolve_dataset(const Configuration& config);

}  // namespace sbc
