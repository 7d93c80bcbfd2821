#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "otalign/linalg.hpp"

namespace otalign {

enum class Modality { Image, Text };

// A set of token feature vectors for one modality, one token per row.
// Every row must have a strictly positive norm (cosine geometry downstream).
class FeatureSet {
 public:
  FeatureSet(Modality modality, Matrix tokens);

  Modality modality() const { return modality_; }
  std::size_t count() const { return tokens_.rows(); }
  std::size_t dim() const { return tokens_.cols(); }
  const Matrix& tokens() const { return tokens_; }
  std::span<const double> token(std::size_t i) const { return tokens_.row(i); }
  double token_norm(std::size_t i) const { return norms_[i]; }

 private:
  Modality modality_;
  Matrix tokens_;
  std::vector<double> norms_;
};

// Pairwise token matching costs, entries 1 - cos in [0, 2].
class CostMatrix {
 public:
  explicit CostMatrix(Matrix values);

  const Matrix& values() const { return values_; }
  std::size_t rows() const { return values_.rows(); }
  std::size_t cols() const { return values_.cols(); }
  double operator()(std::size_t i, std::size_t j) const {
    return values_(i, j);
  }

  CostMatrix transposed() const { return CostMatrix(values_.transposed()); }

 private:
  Matrix values_;
};

// Arithmetic mean over token rows.
Vector aggregate_global(const FeatureSet& fs);

// cost[i][j] = 1 - cos(img_i, txt_j). ShapeError on dim mismatch.
CostMatrix build_cost_matrix(const FeatureSet& img, const FeatureSet& txt);

// Reverse-mode step through the pairwise cosine map: given
// upstream[i][j] = dL/dcos(u_i, v_j), accumulates dL/dU and dL/dV using
//   dcos(u,v)/du = v/(|u||v|) - cos(u,v) u/|u|^2.
// cos_uv must hold the already-computed cosine values.
std::pair<Matrix, Matrix> cosine_vjp(const Matrix& u_rows, const Matrix& v_rows,
                                     const Matrix& cos_uv,
                                     const Matrix& upstream);

// Gradients of sum_ij upstream[i][j] * cost[i][j] with respect to both token
// matrices (dcost/dcos = -1 composed with cosine_vjp).
std::pair<Matrix, Matrix> cost_jacobian_vjp(const FeatureSet& img,
                                            const FeatureSet& txt,
                                            const Matrix& upstream);

}  // namespace otalign
