#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sbc/geometry.hpp"

namespace sbc {

class DynamicsModel;

/// N observed transitions: row i of `x` moves to row i of `xp`.
struct Dataset {
  Matrix x;
  Matrix xp;

  [[nodiscard]] Eigen::Index size() const noexcept { return x.rows(); }
  [[nodiscard]] Eigen::Index dimension() const noexcept { return x.cols(); }

  /// Throws DataError unless shapes agree, N >= 1 and every entry is finite.
  void validate() const;

  /// Rows selected by `indices`, in that order.
  [[nodiscard]] Dataset subset(const std::vector<Eigen::Index>& indices) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.x.rows() == b.x.rows() && a.x.cols() == b.x.cols() && a.xp.rows() == b.xp.rows() &&
           a.xp.cols() == b.xp.cols() && a.x == b.x && a.xp == b.xp;
  }
};

/// Build a dataset from nested row lists (as found inline in a configuration).
Dataset load_samples(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& xp);

/// Build a dataset from a headerless comma-separated pair of files.
Dataset load_samples(const std::filesystem::path& x_csv, const std::filesystem::path& xp_csv);

/// Read a headerless CSV of doubles. Throws DataError on ragged or non-numeric rows.
Matrix read_csv_matrix(const std::filesystem::path& path);

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);

/// x ~ Uniform(bounds), xp = f(x) + w with the model's diagonal Gaussian noise.
Dataset sample_transitions(const DynamicsModel& model, Eigen::Index count, const RegionSet& bounds,
                           std::uint64_t seed);

}  // namespace sbc
