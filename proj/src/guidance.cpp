#include "otalign/guidance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "otalign/losses.hpp"

namespace otalign {

std::string to_string(Direction d) {
  switch (d) {
    case Direction::Left: return "left";
    case Direction::Right: return "right";
    case Direction::Upper: return "upper";
    case Direction::Lower: return "lower";
    case Direction::Bilateral: return "bilateral";
  }
  return "?";
}

void validate(const GaussianPriorConfig& cfg) {
  if (!(cfg.sigma_frac > 0.0) || cfg.sigma_frac > 1.0) {
    throw ParamError("gaussian prior: sigma_frac must lie in (0, 1]");
  }
}

namespace {

struct WordToken {
  std::string text;  // lowercased
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<WordToken> tokenize_words(std::string_view text) {
  std::vector<WordToken> words;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    std::string lower;
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
      lower.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(text[i]))));
      ++i;
    }
    words.push_back({std::move(lower), begin, i});
  }
  return words;
}

const std::map<std::string, Direction>& word_lexicon() {
  static const std::map<std::string, Direction> lexicon = {
      {"left", Direction::Left},        {"right", Direction::Right},
      {"upper", Direction::Upper},      {"lower", Direction::Lower},
      {"bilateral", Direction::Bilateral}, {"superior", Direction::Upper},
      {"inferior", Direction::Lower},
  };
  return lexicon;
}

}  // namespace

DirectionalCue parse_directions(std::string_view text) {
  DirectionalCue cue;
  const std::vector<WordToken> words = tokenize_words(text);
  for (std::size_t k = 0; k < words.size(); ++k) {
    const auto it = word_lexicon().find(words[k].text);
    if (it != word_lexicon().end()) {
      cue.directions.insert(it->second);
      cue.matched_spans.emplace_back(words[k].begin, words[k].end);
      continue;
    }
    if (words[k].text == "both" && k + 1 < words.size() &&
        words[k + 1].text == "lungs") {
      cue.directions.insert(Direction::Bilateral);
      cue.matched_spans.emplace_back(words[k].begin, words[k + 1].end);
    }
  }
  return cue;
}

namespace {

std::vector<double> gaussian_profile(std::size_t len, double anchor,
                                     double sigma) {
  std::vector<double> g(len);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t k = 0; k < len; ++k) {
    const double d = static_cast<double>(k) - anchor;
    g[k] = std::exp(-d * d * inv);
  }
  return g;
}

std::vector<double> max_profile(const std::vector<double>& a,
                                const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = std::max(a[k], b[k]);
  return out;
}

}  // namespace

Grid2D gaussian_prior(const DirectionalCue& cue, std::size_t height,
                      std::size_t width, const GaussianPriorConfig& cfg) {
  validate(cfg);
  if (height < 1 || width < 1) {
    throw ShapeError("gaussian_prior: grid must be at least 1x1");
  }
  if (cue.empty()) return Matrix::constant(height, width, 1.0);

  const double h = static_cast<double>(height);
  const double w = static_cast<double>(width);
  const double sigma = cfg.sigma_frac * static_cast<double>(std::min(height, width));
  double left_x = 0.25 * w, right_x = 0.75 * w;
  if (cfg.radiological_convention) std::swap(left_x, right_x);
  const double center_x = 0.5 * w, center_y = 0.5 * h;
  const double upper_y = 0.25 * h, lower_y = 0.75 * h;

  // per-direction axis profiles; the axis a direction does not constrain
  // defaults to the centre
  struct AxisPair {
    std::vector<double> x, y;
  };
  std::vector<AxisPair> parts;
  std::vector<std::vector<double>> x_informative, y_informative;
  for (Direction d : cue.directions) {
    AxisPair p;
    switch (d) {
      case Direction::Left:
        p.x = gaussian_profile(width, left_x, sigma);
        x_informative.push_back(p.x);
        break;
      case Direction::Right:
        p.x = gaussian_profile(width, right_x, sigma);
        x_informative.push_back(p.x);
        break;
      case Direction::Upper:
        p.y = gaussian_profile(height, upper_y, sigma);
        y_informative.push_back(p.y);
        break;
      case Direction::Lower:
        p.y = gaussian_profile(height, lower_y, sigma);
        y_informative.push_back(p.y);
        break;
      case Direction::Bilateral:
        p.x = max_profile(gaussian_profile(width, left_x, sigma),
                          gaussian_profile(width, right_x, sigma));
        x_informative.push_back(p.x);
        break;
    }
    if (p.x.empty()) p.x = gaussian_profile(width, center_x, sigma);
    if (p.y.empty()) p.y = gaussian_profile(height, center_y, sigma);
    parts.push_back(std::move(p));
  }

  Matrix grid(height, width);
  if (cfg.combine == CombineMode::Product) {
    // multiplying only the informative factors keeps a combined cue like
    // {Left, Lower} peaked at (x_left, y_lower) instead of the blob midpoint
    std::vector<double> xprof = x_informative.empty()
                                    ? gaussian_profile(width, center_x, sigma)
                                    : x_informative.front();
    for (std::size_t k = 1; k < x_informative.size(); ++k) {
      for (std::size_t c = 0; c < width; ++c) xprof[c] *= x_informative[k][c];
    }
    std::vector<double> yprof = y_informative.empty()
                                    ? gaussian_profile(height, center_y, sigma)
                                    : y_informative.front();
    for (std::size_t k = 1; k < y_informative.size(); ++k) {
      for (std::size_t r = 0; r < height; ++r) yprof[r] *= y_informative[k][r];
    }
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) grid(r, c) = yprof[r] * xprof[c];
    }
  } else {
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        double acc = 0.0;
        for (const AxisPair& p : parts) {
          const double v = p.y[r] * p.x[c];
          acc = (cfg.combine == CombineMode::Max) ? std::max(acc, v) : acc + v;
        }
        grid(r, c) = acc;
      }
    }
  }

  const double peak = grid.max_entry();
  for (double& v : grid.data()) v /= peak;
  return grid;
}

Grid2D normalize_attention(const Grid2D& raw) {
  if (raw.size() == 0) throw ShapeError("normalize_attention: empty grid");
  for (double v : raw.data()) {
    if (!std::isfinite(v)) {
      throw InputError("normalize_attention: non-finite entry");
    }
  }
  const double lo = raw.min_entry();
  const double hi = raw.max_entry();
  Matrix out(raw.rows(), raw.cols());
  if (hi == lo) return out;  // constant map carries no localization evidence
  const double inv = 1.0 / (hi - lo);
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    for (std::size_t c = 0; c < raw.cols(); ++c) {
      out(r, c) = (raw(r, c) - lo) * inv;
    }
  }
  return out;
}

BBox attention_bbox(const Grid2D& a_norm, double threshold_frac) {
  if (a_norm.size() == 0) throw ShapeError("attention_bbox: empty grid");
  if (!(threshold_frac > 0.0) || threshold_frac > 1.0) {
    throw ParamError("attention_bbox: threshold_frac must lie in (0, 1]");
  }
  for (double v : a_norm.data()) {
    if (v < 0.0 || v > 1.0) {
      throw InputError("attention_bbox: map is not normalized to [0, 1]");
    }
  }
  const double peak = a_norm.max_entry();
  if (peak == 0.0) {
    return BBox{0, a_norm.rows() - 1, 0, a_norm.cols() - 1};
  }
  const double threshold = threshold_frac * peak;
  BBox box{a_norm.rows(), 0, a_norm.cols(), 0};
  for (std::size_t r = 0; r < a_norm.rows(); ++r) {
    for (std::size_t c = 0; c < a_norm.cols(); ++c) {
      if (a_norm(r, c) >= threshold) {
        box.row_min = std::min(box.row_min, r);
        box.row_max = std::max(box.row_max, r);
        box.col_min = std::min(box.col_min, c);
        box.col_max = std::max(box.col_max, c);
      }
    }
  }
  return box;
}

Grid2D inject_prior(const Grid2D& prior, const BBox& box, std::size_t height,
                    std::size_t width) {
  if (prior.size() == 0) throw ShapeError("inject_prior: empty prior");
  if (box.row_min > box.row_max || box.col_min > box.col_max ||
      box.row_max >= height || box.col_max >= width) {
    throw ShapeError("inject_prior: box does not fit the target grid");
  }
  for (double v : prior.data()) {
    if (v < 0.0 || v > 1.0) {
      throw InputError("inject_prior: prior entry outside [0, 1]");
    }
  }

  Matrix out = Matrix::constant(height, width, 1.0);
  const std::size_t bh = box.height(), bw = box.width();
  const std::size_t ph = prior.rows(), pw = prior.cols();
  for (std::size_t r = 0; r < bh; ++r) {
    const double src_r = (bh == 1)
                             ? 0.5 * static_cast<double>(ph - 1)
                             : static_cast<double>(r) *
                                   static_cast<double>(ph - 1) /
                                   static_cast<double>(bh - 1);
    const std::size_t r0 = static_cast<std::size_t>(src_r);
    const std::size_t r1 = std::min(r0 + 1, ph - 1);
    const double fr = src_r - static_cast<double>(r0);
    for (std::size_t c = 0; c < bw; ++c) {
      const double src_c = (bw == 1)
                               ? 0.5 * static_cast<double>(pw - 1)
                               : static_cast<double>(c) *
                                     static_cast<double>(pw - 1) /
                                     static_cast<double>(bw - 1);
      const std::size_t c0 = static_cast<std::size_t>(src_c);
      const std::size_t c1 = std::min(c0 + 1, pw - 1);
      const double fc = src_c - static_cast<double>(c0);

      const double v00 = prior(r0, c0), v01 = prior(r0, c1);
      const double v10 = prior(r1, c0), v11 = prior(r1, c1);
      double v;
      if (v00 == v01 && v00 == v10 && v00 == v11) {
        v = v00;  // keeps identity placement and constant priors bit-exact
      } else {
        const double top = v00 + fc * (v01 - v00);
        const double bottom = v10 + fc * (v11 - v10);
        v = top + fr * (bottom - top);
      }
      out(box.row_min + r, box.col_min + c) = v;
    }
  }
  return out;
}

Grid2D fuse_guidance(const Grid2D& a_norm, const Grid2D& m_pri) {
  if (!a_norm.same_shape(m_pri)) {
    throw ShapeError("fuse_guidance: shapes differ");
  }
  Matrix out(a_norm.rows(), a_norm.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      const double a = a_norm(r, c), m = m_pri(r, c);
      if (a < 0.0 || a > 1.0 || m < 0.0 || m > 1.0) {
        throw InputError("fuse_guidance: entry outside [0, 1]");
      }
      out(r, c) = a * m;
    }
  }
  return out;
}

Grid2D refine_prediction(const Grid2D& p_pred, const Grid2D& m_guide) {
  Grid2D product = fuse_guidance(p_pred, m_guide);
  const double prod_max = product.max_entry();
  if (prod_max == 0.0) return product;  // zero grid stays zero
  const double pred_max = p_pred.max_entry();
  for (double& v : product.data()) v = (v / prod_max) * pred_max;
  return product;
}

double guidance_loss(const Grid2D& p_pred, const Grid2D& m_guide,
                     double clamp_eps) {
  const Grid2D refined = refine_prediction(p_pred, m_guide);
  return bce(p_pred, refined, clamp_eps);
}

}  // namespace otalign
