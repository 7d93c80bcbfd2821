#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "otalign/errors.hpp"

namespace otalign {

// Row-major dense matrix of doubles. Every entry is validated finite on
// construction. Iteration order (rows outer, columns inner) is fixed; all
// reductions in the library inherit bit-reproducibility from it.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);  // zero-filled
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix constant(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t i) {
    return std::span<double>(data_).subspan(i * cols_, cols_);
  }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Matrix transposed() const;
  double max_entry() const;  // ShapeError when empty
  double min_entry() const;
  double sum() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Fixed-length vector of finite doubles.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t len);  // zero-filled
  explicit Vector(std::vector<double> data);

  static Vector constant(std::size_t len, double value);

  std::size_t len() const { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

 private:
  std::vector<double> data_;
};

double dot(std::span<const double> u, std::span<const double> v);
double norm2(std::span<const double> u);

// <u,v> / (|u| |v|), clamped to [-1, 1] so downstream costs stay in [0, 2].
// ShapeError on length mismatch, InputError when either norm is zero.
double cosine_similarity(std::span<const double> u, std::span<const double> v);
double cosine_similarity(const Vector& u, const Vector& v);

// log sum_i exp(v_i) via the max-shift formulation; exact for a single
// element, finite for any finite input. ShapeError when empty.
double logsumexp(std::span<const double> v);
double logsumexp(const Vector& v);

// softmax(v / temperature) computed in the log domain; entries are positive
// and sum to 1 within 1e-12. ParamError for temperature <= 0.
Vector softmax_row(const Vector& v, double temperature);

}  // namespace otalign
