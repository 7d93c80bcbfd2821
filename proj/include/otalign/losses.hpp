#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "otalign/features.hpp"
#include "otalign/sinkhorn.hpp"

namespace otalign {

struct AlignmentConfig {
  double lambda_global = 1.0;
  double lambda_local = 1.0;
  double temperature = 0.07;  // InfoNCE
  SinkhornConfig sinkhorn;
};

void validate(const AlignmentConfig& cfg);

// B paired global feature rows, row i of each side matched.
class BatchFeatures {
 public:
  BatchFeatures(Matrix image_globals, Matrix text_globals);

  std::size_t batch() const { return image_globals_.rows(); }
  std::size_t dim() const { return image_globals_.cols(); }
  const Matrix& image_globals() const { return image_globals_; }
  const Matrix& text_globals() const { return text_globals_; }

 private:
  Matrix image_globals_;
  Matrix text_globals_;
};

// Symmetric contrastive loss over the batch: cosine similarities divided by
// temperature, mean cross-entropy with the diagonal as target, averaged over
// the row and column directions. Zero for a single-pair batch.
double infonce_symmetric(const BatchFeatures& batch, double temperature);

struct LocalOtResult {
  double value = 0.0;
  TransportPlan forward;   // image -> text
  TransportPlan reverse;   // text -> image
};

// Mean of the two directional transport costs, plans returned for reuse.
LocalOtResult local_ot_loss(const CostMatrix& cost, const Marginals& marg,
                            const SinkhornConfig& cfg);

struct AlignBreakdown {
  double l_global = 0.0;
  double l_local = 0.0;
  double l_align = 0.0;
  std::vector<double> per_pair_costs;
};

// lambda_global * L_global + lambda_local * mean over pairs of the local OT
// loss on each pair's cost matrix. Pair marginals are uniform.
AlignBreakdown align_loss_parts(
    const BatchFeatures& batch,
    const std::vector<std::pair<FeatureSet, FeatureSet>>& token_pairs,
    const AlignmentConfig& cfg);

double align_loss(const BatchFeatures& batch,
                  const std::vector<std::pair<FeatureSet, FeatureSet>>& pairs,
                  const AlignmentConfig& cfg);

// Mean binary cross-entropy over pixels; predictions clamped to
// [clamp_eps, 1 - clamp_eps], targets used as-is. Both grids must lie in
// [0, 1].
double bce(const Matrix& pred, const Matrix& target, double clamp_eps = 1e-7);

}  // namespace otalign
