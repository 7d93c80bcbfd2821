#include "otalign/features.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace otalign {

FeatureSet::FeatureSet(Modality modality, Matrix tokens)
    : modality_(modality), tokens_(std::move(tokens)) {
  if (tokens_.rows() < 1 || tokens_.cols() < 1) {
    throw ShapeError("feature set: needs at least one token and one dimension");
  }
  norms_.resize(tokens_.rows());
  for (std::size_t i = 0; i < tokens_.rows(); ++i) {
    norms_[i] = norm2(tokens_.row(i));
    if (norms_[i] == 0.0) {
      throw InputError("feature set: token " + std::to_string(i) +
                       " has zero norm");
    }
  }
}

CostMatrix::CostMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw ShapeError("cost matrix: empty");
  }
  for (std::size_t i = 0; i < values_.rows(); ++i) {
    for (std::size_t j = 0; j < values_.cols(); ++j) {
      const double v = values_(i, j);
      if (v < 0.0 || v > 2.0) {
        throw InputError("cost matrix: entry (" + std::to_string(i) + "," +
                         std::to_string(j) + ") = " + std::to_string(v) +
                         " outside [0, 2]");
      }
    }
  }
}

Vector aggregate_global(const FeatureSet& fs) {
  std::vector<double> mean(fs.dim(), 0.0);
  for (std::size_t i = 0; i < fs.count(); ++i) {
    auto row = fs.token(i);
    for (std::size_t d = 0; d < fs.dim(); ++d) mean[d] += row[d];
  }
  const double inv = 1.0 / static_cast<double>(fs.count());
  for (double& v : mean) v *= inv;
  return Vector(std::move(mean));
}

CostMatrix build_cost_matrix(const FeatureSet& img, const FeatureSet& txt) {
  if (img.dim() != txt.dim()) {
    throw ShapeError("build_cost_matrix: image dim " +
                     std::to_string(img.dim()) + " != text dim " +
                     std::to_string(txt.dim()));
  }
  Matrix cost(img.count(), txt.count());
  for (std::size_t i = 0; i < img.count(); ++i) {
    for (std::size_t j = 0; j < txt.count(); ++j) {
      cost(i, j) = 1.0 - cosine_similarity(img.token(i), txt.token(j));
    }
  }
  return CostMatrix(std::move(cost));
}

std::pair<Matrix, Matrix> cosine_vjp(const Matrix& u_rows, const Matrix& v_rows,
                                     const Matrix& cos_uv,
                                     const Matrix& upstream) {
  const std::size_t n = u_rows.rows();
  const std::size_t m = v_rows.rows();
  const std::size_t dim = u_rows.cols();
  if (v_rows.cols() != dim) {
    throw ShapeError("cosine_vjp: operand dims differ");
  }
  if (cos_uv.rows() != n || cos_uv.cols() != m || !cos_uv.same_shape(upstream)) {
    throw ShapeError("cosine_vjp: upstream/cosine shape mismatch");
  }

  std::vector<double> nu(n), nv(m);
  for (std::size_t i = 0; i < n; ++i) nu[i] = norm2(u_rows.row(i));
  for (std::size_t j = 0; j < m; ++j) nv[j] = norm2(v_rows.row(j));

  Matrix du(n, dim);
  Matrix dv(m, dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto u = u_rows.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double w = upstream(i, j);
      if (w == 0.0) continue;
      auto v = v_rows.row(j);
      const double c = cos_uv(i, j);
      const double inv_uv = 1.0 / (nu[i] * nv[j]);
      const double cu = c / (nu[i] * nu[i]);
      const double cv = c / (nv[j] * nv[j]);
      for (std::size_t d = 0; d < dim; ++d) {
        du(i, d) += w * (v[d] * inv_uv - cu * u[d]);
        dv(j, d) += w * (u[d] * inv_uv - cv * v[d]);
      }
    }
  }
  return {std::move(du), std::move(dv)};
}

std::pair<Matrix, Matrix> cost_jacobian_vjp(const FeatureSet& img,
                                            const FeatureSet& txt,
                                            const Matrix& upstream) {
  if (upstream.rows() != img.count() || upstream.cols() != txt.count()) {
    throw ShapeError("cost_jacobian_vjp: upstream is " +
                     std::to_string(upstream.rows()) + "x" +
                     std::to_string(upstream.cols()) + ", expected " +
                     std::to_string(img.count()) + "x" +
                     std::to_string(txt.count()));
  }
  const CostMatrix cost = build_cost_matrix(img, txt);
  Matrix cos_uv(img.count(), txt.count());
  Matrix neg_upstream(img.count(), txt.count());
  for (std::size_t i = 0; i < img.count(); ++i) {
    for (std::size_t j = 0; j < txt.count(); ++j) {
      cos_uv(i, j) = 1.0 - cost(i, j);
      neg_upstream(i, j) = -upstream(i, j);
    }
  }
  return cosine_vjp(img.tokens(), txt.tokens(), cos_uv, neg_upstream);
}

}  // namespace otalign
