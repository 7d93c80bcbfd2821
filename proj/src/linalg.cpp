#include "otalign/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace otalign {

namespace {

void check_finite(std::span<const double> data, const char* what) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw InputError(std::string(what) + ": non-finite entry at index " +
                       std::to_string(i));
    }
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix: data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
  check_finite(data_, "matrix");
}

Matrix Matrix::constant(std::size_t rows, std::size_t cols, double value) {
  return Matrix(rows, cols, std::vector<double>(rows * cols, value));
}

Matrix Matrix::transposed() const {
  Matrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      out(j, i) = (*this)(i, j);
    }
  }
  return out;
}

double Matrix::max_entry() const {
  if (data_.empty()) throw ShapeError("max_entry: empty matrix");
  return *std::max_element(data_.begin(), data_.end());
}

double Matrix::min_entry() const {
  if (data_.empty()) throw ShapeError("min_entry: empty matrix");
  return *std::min_element(data_.begin(), data_.end());
}

double Matrix::sum() const {
  double acc = 0.0;
  for (double v : data_) acc += v;
  return acc;
}

Vector::Vector(std::size_t len) : data_(len, 0.0) {}

Vector::Vector(std::vector<double> data) : data_(std::move(data)) {
  check_finite(data_, "vector");
}

Vector Vector::constant(std::size_t len, double value) {
  return Vector(std::vector<double>(len, value));
}

double dot(std::span<const double> u, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

double norm2(std::span<const double> u) { return std::sqrt(dot(u, u)); }

double cosine_similarity(std::span<const double> u,
                         std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ShapeError("cosine_similarity: lengths " + std::to_string(u.size()) +
                     " and " + std::to_string(v.size()) + " differ");
  }
  const double nu = norm2(u);
  const double nv = norm2(v);
  if (nu == 0.0 || nv == 0.0) {
    throw InputError("cosine_similarity: zero-norm input");
  }
  const double c = dot(u, v) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

double cosine_similarity(const Vector& u, const Vector& v) {
  return cosine_similarity(u.data(), v.data());
}

double logsumexp(std::span<const double> v) {
  if (v.empty()) throw ShapeError("logsumexp: empty input");
  const double m = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

double logsumexp(const Vector& v) { return logsumexp(v.data()); }

Vector softmax_row(const Vector& v, double temperature) {
  if (!(temperature > 0.0)) {
    throw ParamError("softmax_row: temperature must be positive, got " +
                     std::to_string(temperature));
  }
  std::vector<double> scaled(v.len());
  for (std::size_t i = 0; i < v.len(); ++i) scaled[i] = v[i] / temperature;
  const double lse = logsumexp(scaled);
  std::vector<double> out(v.len());
  for (std::size_t i = 0; i < v.len(); ++i) out[i] = std::exp(scaled[i] - lse);
  return Vector(std::move(out));
}

}  // namespace otalign
