#include "sbc/data.hpp"

#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "sbc/dynamics.hpp"
#include "sbc/errors.hpp"

namespace sbc {

void Dataset::validate() const {
  if (x.rows() != xp.rows()) {
    throw DataError("x has " + std::to_string(x.rows()) + " samples but xp has " + std::to_string(xp.rows()));
  }
  if (x.cols() != xp.cols()) {
    throw DataError("x has dimension " + std::to_string(x.cols()) + " but xp has " + std::to_string(xp.cols()));
  }
  if (x.rows() < 1 || x.cols() < 1) throw DataError("dataset must contain at least one sample");
  if (!x.allFinite() || !xp.allFinite()) throw DataError("dataset contains NaN or Inf entries");
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& indices) const {
  Dataset out{Matrix(static_cast<Eigen::Index>(indices.size()), x.cols()),
              Matrix(static_cast<Eigen::Index>(indices.size()), xp.cols())};
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(indices[i]);
    out.xp.row(static_cast<Eigen::Index>(i)) = xp.row(indices[i]);
  }
  return out;
}

namespace {

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows, const char* name) {
  if (rows.empty()) return Matrix(0, 0);
  const std::size_t cols = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw DataError(std::string(name) + ": row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                      " entries, expected " + std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

}  // namespace

Dataset load_samples(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& xp) {
  Dataset d{rows_to_matrix(x, "x_samples"), rows_to_matrix(xp, "xp_samples")};
  d.validate();
  return d;
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && std::isspace(static_cast<unsigned char>(*end))) ++end;
      if (end == cell.c_str() || (end && *end != '\0')) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": '" + cell + "' is not a number");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows_to_matrix(rows, path.string().c_str());
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

Dataset load_samples(const std::filesystem::path& x_csv, const std::filesystem::path& xp_csv) {
  Dataset d{read_csv_matrix(x_csv), read_csv_matrix(xp_csv)};
  d.validate();
  return d;
}

Dataset sample_transitions(const DynamicsModel& model, Eigen::Index count, const RegionSet& bounds,
                           std::uint64_t seed) {
  if (count < 1) throw DataError("sample count must be at least 1");
  const auto n = static_cast<Eigen::Index>(model.dimension());
  if (static_cast<Eigen::Index>(bounds.dimension()) != n) throw DimensionError("bounds and dynamics dimension differ");
  const Rect box = bounds.bounding_box();

  std::mt19937_64 rng(seed);
  Dataset d{Matrix(count, n), Matrix(count, n)};
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      std::uniform_real_distribution<double> u(box.lower[j], box.upper[j]);
      d.x(i, j) = u(rng);
    }
  }
  for (Eigen::Index i = 0; i < count; ++i) d.xp.row(i) = model.step(d.x.row(i).transpose(), rng).transpose();
  return d;
}

}  // namespace sbc
