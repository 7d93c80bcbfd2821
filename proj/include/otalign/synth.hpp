#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "otalign/guidance.hpp"
#include "otalign/losses.hpp"

namespace otalign {

struct SynthSpec {
  std::uint64_t seed = 0;
  std::size_t batch = 1;
  std::size_t image_tokens = 4;  // N
  std::size_t text_tokens = 4;   // L
  std::size_t dim = 8;
  double cluster_noise = 0.0;
  std::size_t grid_height = 64;
  std::size_t grid_width = 64;
};

void validate(const SynthSpec& spec);

enum class Quadrant { LeftLower, RightLower, LeftUpper, RightUpper, Bilateral };

std::string to_string(Quadrant q);

// Deterministic desk-scale fixture: clustered token features with a known
// correspondence, a blob attention map and a caption that names the truth
// quadrant.
struct SynthInstance {
  BatchFeatures batch_features;
  std::vector<std::pair<FeatureSet, FeatureSet>> token_pairs;
  // per pair, image token i -> matching text index, -1 when unmatched
  std::vector<std::vector<std::ptrdiff_t>> truth_matching;
  Grid2D attention;
  std::string caption;
  Quadrant truth_quadrant = Quadrant::LeftLower;
};

SynthInstance make_aligned_tokens(const SynthSpec& spec);

}  // namespace otalign
