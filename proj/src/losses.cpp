#include "otalign/losses.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace otalign {

void validate(const AlignmentConfig& cfg) {
  if (!(cfg.temperature > 0.0)) {
    throw ParamError("alignment: temperature must be positive");
  }
  if (cfg.lambda_global < 0.0 || cfg.lambda_local < 0.0) {
    throw ParamError("alignment: lambdas must be nonnegative");
  }
  if (cfg.lambda_global == 0.0 && cfg.lambda_local == 0.0) {
    throw ParamError("alignment: at least one lambda must be nonzero");
  }
  validate(cfg.sinkhorn);
}

BatchFeatures::BatchFeatures(Matrix image_globals, Matrix text_globals)
    : image_globals_(std::move(image_globals)),
      text_globals_(std::move(text_globals)) {
  if (!image_globals_.same_shape(text_globals_)) {
    throw ShapeError("batch features: image/text global shapes differ");
  }
  if (image_globals_.rows() < 1 || image_globals_.cols() < 1) {
    throw ShapeError("batch features: empty batch");
  }
  for (std::size_t i = 0; i < image_globals_.rows(); ++i) {
    if (norm2(image_globals_.row(i)) == 0.0) {
      throw InputError("batch features: image global " + std::to_string(i) +
                       " has zero norm");
    }
    if (norm2(text_globals_.row(i)) == 0.0) {
      throw InputError("batch features: text global " + std::to_string(i) +
                       " has zero norm");
    }
  }
}

namespace {

// S_ij = cos(img_i, txt_j) / temperature
Matrix similarity_logits(const BatchFeatures& batch, double temperature) {
  const std::size_t b = batch.batch();
  Matrix s(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      s(i, j) = cosine_similarity(batch.image_globals().row(i),
                                  batch.text_globals().row(j)) /
                temperature;
    }
  }
  return s;
}

}  // namespace

double infonce_symmetric(const BatchFeatures& batch, double temperature) {
  if (!(temperature > 0.0)) {
    throw ParamError("infonce: temperature must be positive");
  }
  const std::size_t b = batch.batch();
  const Matrix s = similarity_logits(batch, temperature);

  double row_ce = 0.0, col_ce = 0.0;
  std::vector<double> buf(b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) buf[j] = s(i, j);
    row_ce += logsumexp(std::span<const double>(buf)) - s(i, i);
  }
  for (std::size_t j = 0; j < b; ++j) {
    for (std::size_t i = 0; i < b; ++i) buf[i] = s(i, j);
    col_ce += logsumexp(std::span<const double>(buf)) - s(j, j);
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  return 0.5 * (row_ce * inv_b + col_ce * inv_b);
}

LocalOtResult local_ot_loss(const CostMatrix& cost, const Marginals& marg,
                            const SinkhornConfig& cfg) {
  auto [forward, reverse] = solve_symmetric(cost, marg, cfg);
  const CostMatrix cost_t = cost.transposed();
  const double value = 0.5 * (transport_cost(forward.plan, cost) +
                              transport_cost(reverse.plan, cost_t));
  return {value, std::move(forward), std::move(reverse)};
}

AlignBreakdown align_loss_parts(
    const BatchFeatures& batch,
    const std::vector<std::pair<FeatureSet, FeatureSet>>& token_pairs,
    const AlignmentConfig& cfg) {
  validate(cfg);
  if (token_pairs.size() != batch.batch()) {
    throw ShapeError("align_loss: " + std::to_string(token_pairs.size()) +
                     " token pairs for batch of " +
                     std::to_string(batch.batch()));
  }
  AlignBreakdown out;
  out.l_global = infonce_symmetric(batch, cfg.temperature);
  double local_sum = 0.0;
  for (const auto& [img, txt] : token_pairs) {
    const CostMatrix cost = build_cost_matrix(img, txt);
    const Marginals marg = Marginals::uniform(img.count(), txt.count());
    const LocalOtResult local = local_ot_loss(cost, marg, cfg.sinkhorn);
    out.per_pair_costs.push_back(local.value);
    local_sum += local.value;
  }
  out.l_local = local_sum / static_cast<double>(token_pairs.size());
  out.l_align = cfg.lambda_global * out.l_global + cfg.lambda_local * out.l_local;
  return out;
}

double align_loss(const BatchFeatures& batch,
                  const std::vector<std::pair<FeatureSet, FeatureSet>>& pairs,
                  const AlignmentConfig& cfg) {
  return align_loss_parts(batch, pairs, cfg).l_align;
}

double bce(const Matrix& pred, const Matrix& target, double clamp_eps) {
  if (!pred.same_shape(target)) {
    throw ShapeError("bce: prediction and target shapes differ");
  }
  if (pred.size() == 0) throw ShapeError("bce: empty grids");
  if (!(clamp_eps > 0.0) || clamp_eps >= 0.5) {
    throw ParamError("bce: clamp_eps must lie in (0, 0.5)");
  }
  double acc = 0.0;
  const auto p_data = pred.data();
  const auto t_data = target.data();
  for (std::size_t k = 0; k < p_data.size(); ++k) {
    const double p = p_data[k];
    const double t = t_data[k];
    if (p < 0.0 || p > 1.0 || t < 0.0 || t > 1.0) {
      throw InputError("bce: entry outside [0, 1] at linear index " +
                       std::to_string(k));
    }
    const double pc = std::min(std::max(p, clamp_eps), 1.0 - clamp_eps);
    acc -= t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc);
  }
  return acc / static_cast<double>(p_data.size());
}

}  // namespace otalign
