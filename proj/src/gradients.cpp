#include "otalign/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace otalign {

GradReport finite_diff_check(const std::function<double(const Matrix&)>& f,
                             const Matrix& at, const Matrix& analytic,
                             double step, double rel_tol) {
  if (!(step > 0.0)) throw ParamError("finite_diff_check: step must be positive");
  if (!at.same_shape(analytic)) {
    throw ShapeError("finite_diff_check: analytic gradient shape mismatch");
  }
  GradReport report;
  report.step = step;
  report.analytic = analytic;
  report.numeric = Matrix(at.rows(), at.cols());

  Matrix probe = at;
  double max_rel = 0.0;
  for (std::size_t i = 0; i < at.rows(); ++i) {
    for (std::size_t j = 0; j < at.cols(); ++j) {
      const double saved = probe(i, j);
      probe(i, j) = saved + step;
      const double up = f(probe);
      probe(i, j) = saved - step;
      const double down = f(probe);
      probe(i, j) = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw Error("finite_diff_check: non-finite objective at probe (" +
                    std::to_string(i) + "," + std::to_string(j) + ")");
      }
      const double numeric = (up - down) / (2.0 * step);
      report.numeric(i, j) = numeric;
      const double a = analytic(i, j);
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
    }
  }
  report.max_rel_err = max_rel;
  report.passed = max_rel <= rel_tol;
  return report;
}

std::pair<Matrix, Matrix> grad_infonce(const BatchFeatures& batch,
                                       double temperature) {
  if (!(temperature > 0.0)) {
    throw ParamError("grad_infonce: temperature must be positive");
  }
  const std::size_t b = batch.batch();
  Matrix cos_uv(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      cos_uv(i, j) = cosine_similarity(batch.image_globals().row(i),
                                       batch.text_globals().row(j));
    }
  }

  // dL/dS = (softmax(rows) - I)/(2B) + (softmax(cols) - I)/(2B)
  Matrix ds(b, b);
  std::vector<double> buf(b);
  const double w = 0.5 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) buf[j] = cos_uv(i, j) / temperature;
    const double lse = logsumexp(std::span<const double>(buf));
    for (std::size_t j = 0; j < b; ++j) {
      ds(i, j) += w * (std::exp(buf[j] - lse) - (i == j ? 1.0 : 0.0));
    }
  }
  for (std::size_t j = 0; j < b; ++j) {
    for (std::size_t i = 0; i < b; ++i) buf[i] = cos_uv(i, j) / temperature;
    const double lse = logsumexp(std::span<const double>(buf));
    for (std::size_t i = 0; i < b; ++i) {
      ds(i, j) += w * (std::exp(buf[i] - lse) - (i == j ? 1.0 : 0.0));
    }
  }

  // chain through S = cos / temperature
  Matrix upstream(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      upstream(i, j) = ds(i, j) / temperature;
    }
  }
  return cosine_vjp(batch.image_globals(), batch.text_globals(), cos_uv,
                    upstream);
}

Matrix local_ot_cost_gradient(const TransportPlan& forward,
                              const TransportPlan& reverse) {
  if (forward.plan.rows() != reverse.plan.cols() ||
      forward.plan.cols() != reverse.plan.rows()) {
    throw ShapeError("local_ot_cost_gradient: plans are not transposes");
  }
  Matrix g(forward.plan.rows(), forward.plan.cols());
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = 0; j < g.cols(); ++j) {
      g(i, j) = 0.5 * (forward.plan(i, j) + reverse.plan(j, i));
    }
  }
  return g;
}

std::pair<Matrix, Matrix> grad_local_ot(const FeatureSet& img,
                                        const FeatureSet& txt,
                                        const Marginals& marg,
                                        const SinkhornConfig& cfg) {
  const CostMatrix cost = build_cost_matrix(img, txt);
  auto [forward, reverse] = solve_symmetric(cost, marg, cfg);
  const Matrix g = local_ot_cost_gradient(forward, reverse);
  return cost_jacobian_vjp(img, txt, g);
}

Matrix grad_bce(const Matrix& pred, const Matrix& target, double clamp_eps) {
  if (!pred.same_shape(target)) {
    throw ShapeError("grad_bce: prediction and target shapes differ");
  }
  if (!(clamp_eps > 0.0) || clamp_eps >= 0.5) {
    throw ParamError("grad_bce: clamp_eps must lie in (0, 0.5)");
  }
  Matrix g(pred.rows(), pred.cols());
  const double inv_count = 1.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.rows(); ++i) {
    for (std::size_t j = 0; j < pred.cols(); ++j) {
      const double p = pred(i, j);
      const double t = target(i, j);
      if (p < 0.0 || p > 1.0 || t < 0.0 || t > 1.0) {
        throw InputError("grad_bce: entry outside [0, 1]");
      }
      if (p < clamp_eps || p > 1.0 - clamp_eps) {
        g(i, j) = 0.0;  // clamp active, flat region
      } else {
        g(i, j) = (p - t) / (p * (1.0 - p)) * inv_count;
      }
    }
  }
  return g;
}

BatchFeatures batch_from_token_means(const std::vector<Matrix>& image_tokens,
                                     const std::vector<Matrix>& text_tokens) {
  if (image_tokens.empty() || image_tokens.size() != text_tokens.size()) {
    throw ShapeError("batch_from_token_means: pair count mismatch");
  }
  const std::size_t dim = image_tokens.front().cols();
  Matrix img_g(image_tokens.size(), dim);
  Matrix txt_g(image_tokens.size(), dim);
  for (std::size_t p = 0; p < image_tokens.size(); ++p) {
    const Vector u = aggregate_global(FeatureSet(Modality::Image, image_tokens[p]));
    const Vector v = aggregate_global(FeatureSet(Modality::Text, text_tokens[p]));
    for (std::size_t d = 0; d < dim; ++d) {
      img_g(p, d) = u[d];
      txt_g(p, d) = v[d];
    }
  }
  return BatchFeatures(std::move(img_g), std::move(txt_g));
}

AlignGradient grad_align(const std::vector<Matrix>& image_tokens,
                         const std::vector<Matrix>& text_tokens,
                         const AlignmentConfig& cfg) {
  validate(cfg);
  const std::size_t pairs = image_tokens.size();
  const BatchFeatures batch = batch_from_token_means(image_tokens, text_tokens);

  AlignGradient out;
  out.losses.l_global = infonce_symmetric(batch, cfg.temperature);
  auto [dg_img, dg_txt] = grad_infonce(batch, cfg.temperature);

  const double inv_pairs = 1.0 / static_cast<double>(pairs);
  double local_sum = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    const FeatureSet img(Modality::Image, image_tokens[p]);
    const FeatureSet txt(Modality::Text, text_tokens[p]);
    const CostMatrix cost = build_cost_matrix(img, txt);
    const Marginals marg = Marginals::uniform(img.count(), txt.count());
    const LocalOtResult local = local_ot_loss(cost, marg, cfg.sinkhorn);
    out.losses.per_pair_costs.push_back(local.value);
    local_sum += local.value;

    const Matrix g_cost = local_ot_cost_gradient(local.forward, local.reverse);
    auto [dl_img, dl_txt] = cost_jacobian_vjp(img, txt, g_cost);

    // globals are row means: each token row inherits 1/count of the
    // global-feature gradient
    Matrix d_img(img.count(), img.dim());
    Matrix d_txt(txt.count(), txt.dim());
    const double img_share = cfg.lambda_global / static_cast<double>(img.count());
    const double txt_share = cfg.lambda_global / static_cast<double>(txt.count());
    const double local_w = cfg.lambda_local * inv_pairs;
    for (std::size_t i = 0; i < img.count(); ++i) {
      for (std::size_t d = 0; d < img.dim(); ++d) {
        d_img(i, d) = img_share * dg_img(p, d) + local_w * dl_img(i, d);
      }
    }
    for (std::size_t j = 0; j < txt.count(); ++j) {
      for (std::size_t d = 0; d < txt.dim(); ++d) {
        d_txt(j, d) = txt_share * dg_txt(p, d) + local_w * dl_txt(j, d);
      }
    }
    out.d_image_tokens.push_back(std::move(d_img));
    out.d_text_tokens.push_back(std::move(d_txt));
  }
  out.losses.l_local = local_sum * inv_pairs;
  out.losses.l_align = cfg.lambda_global * out.losses.l_global +
                       cfg.lambda_local * out.losses.l_local;
  return out;
}

}  // namespace otalign
