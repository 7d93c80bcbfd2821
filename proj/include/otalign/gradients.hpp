#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "otalign/losses.hpp"

namespace otalign {

struct GradReport {
  Matrix analytic;
  Matrix numeric;
  double max_rel_err = 0.0;
  bool passed = false;
  double step = 0.0;
};

// Central finite differences of f around `at`, compared coordinate-wise
// against `analytic`. Relative error per coordinate is
// |a - n| / max(|a|, |n|, 1e-8).
GradReport finite_diff_check(const std::function<double(const Matrix&)>& f,
                             const Matrix& at, const Matrix& analytic,
                             double step, double rel_tol);

// Exact gradients of infonce_symmetric with respect to the image and text
// global matrices.
std::pair<Matrix, Matrix> grad_infonce(const BatchFeatures& batch,
                                       double temperature);

// dL/dcost for the symmetric local OT loss with the plans held fixed
// (envelope semantics): 0.5 (T_fwd + T_rev^T).
Matrix local_ot_cost_gradient(const TransportPlan& forward,
                              const TransportPlan& reverse);

// Feature gradients of the local OT loss: envelope cost gradient pushed
// through the cost Jacobian.
std::pair<Matrix, Matrix> grad_local_ot(const FeatureSet& img,
                                        const FeatureSet& txt,
                                        const Marginals& marg,
                                        const SinkhornConfig& cfg);

// Pixelwise (p - t) / (p (1 - p)) / count where the clamp is inactive, zero
// elsewhere.
Matrix grad_bce(const Matrix& pred, const Matrix& target,
                double clamp_eps = 1e-7);

// Gradient of the combined alignment objective for the descent demo: token
// matrices are the variables, globals are row means of the tokens.
struct AlignGradient {
  std::vector<Matrix> d_image_tokens;
  std::vector<Matrix> d_text_tokens;
  AlignBreakdown losses;
};

AlignGradient grad_align(const std::vector<Matrix>& image_tokens,
                         const std::vector<Matrix>& text_tokens,
                         const AlignmentConfig& cfg);

BatchFeatures batch_from_token_means(const std::vector<Matrix>& image_tokens,
                                     const std::vector<Matrix>& text_tokens);

}  // namespace otalign
