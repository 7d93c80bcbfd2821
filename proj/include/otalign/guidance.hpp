#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "otalign/linalg.hpp"

namespace otalign {

// H x W real-valued map; masks, attention maps and predictions constrain
// entries to [0, 1] per operation.
using Grid2D = Matrix;

enum class Direction { Left, Right, Upper, Lower, Bilateral };

std::string to_string(Direction d);

struct DirectionalCue {
  std::set<Direction> directions;
  // [start, end) character offsets of each lexicon hit in the source text
  std::vector<std::pair<std::size_t, std::size_t>> matched_spans;

  bool empty() const { return directions.empty(); }
  bool has(Direction d) const { return directions.count(d) > 0; }
};

enum class CombineMode { Product, Max, SumNormalized };

struct GaussianPriorConfig {
  double sigma_frac = 0.25;  // std dev as a fraction of min(H, W)
  CombineMode combine = CombineMode::Product;
  bool radiological_convention = false;  // patient left on viewer right
};

void validate(const GaussianPriorConfig& cfg);

struct BBox {
  std::size_t row_min = 0, row_max = 0, col_min = 0, col_max = 0;

  std::size_t height() const { return row_max - row_min + 1; }
  std::size_t width() const { return col_max - col_min + 1; }
  bool operator==(const BBox&) const = default;
};

// Case-insensitive whole-word matching over the direction lexicon
// {left, right, upper, lower, bilateral} plus synonyms superior -> Upper,
// inferior -> Lower, "both lungs" -> Bilateral. An empty result is valid.
DirectionalCue parse_directions(std::string_view text);

// Composite directional prior, max entry rescaled to exactly 1. Directions
// anchor a Gaussian on the axis they constrain (Left 0.25 W, Right 0.75 W,
// Upper 0.25 H, Lower 0.75 H; unconstrained axes default to the centre), with
// sigma = sigma_frac * min(H, W). Bilateral takes the max of the Left and
// Right blobs. An empty cue yields the all-ones grid.
Grid2D gaussian_prior(const DirectionalCue& cue, std::size_t height,
                      std::size_t width, const GaussianPriorConfig& cfg);

// Min-max normalization to [0, 1]; a constant grid maps to all zeros.
Grid2D normalize_attention(const Grid2D& raw);

// Tightest box containing all pixels >= threshold_frac * max(a_norm); the
// full grid when the map is identically zero.
BBox attention_bbox(const Grid2D& a_norm, double threshold_frac = 0.5);

// Resamples the prior onto the box via bilinear interpolation; cells outside
// the box take the value 1, neutral under the downstream product.
Grid2D inject_prior(const Grid2D& prior, const BBox& box, std::size_t height,
                    std::size_t width);

// Elementwise product of the normalized attention map and the injected prior.
Grid2D fuse_guidance(const Grid2D& a_norm, const Grid2D& m_pri);

// Pseudo-target: prediction gated by the guidance mask, rescaled so its max
// matches the prediction's max (an all-zero product stays zero).
Grid2D refine_prediction(const Grid2D& p_pred, const Grid2D& m_guide);

// Consistency loss: BCE between the prediction and the refined pseudo-target
// (target held constant).
double guidance_loss(const Grid2D& p_pred, const Grid2D& m_guide,
                     double clamp_eps = 1e-7);

}  // namespace otalign
