#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "vrec/common.hpp"
#include "vrec/data.hpp"
#include "vrec/features.hpp"
#include "vrec/math.hpp"

namespace vrec {

struct SynthConfig {
  int num_users = 200;
  int num_categories = 30;
  int items_per_category = 20;
  int feature_dim = 64;
  int style_dim = 8;
  int num_styles = 4;               // planted style clusters
  double context_strength = 2.0;    // beta; 0 makes demand context-free
  double temperature = 0.4;         // item choice within a category; 0 = argmax
  double user_category_spread = 0.0;
  double style_spread = 0.2;        // item style around its cluster centre
  double prototype_norm = 3.0;      // category part of v_i
  double prototype_overlap = 0.5;   // share of prototype energy inside the style subspace
  int prototype_rank = 4;           // dimension holding the rest of the prototypes; 0 = all of it
  double style_norm = 0.9;          // style part of v_i
  double feature_noise = 0.015;
  double repeat_penalty = 1.0;      // logit subtracted from the previous category
  int min_length = 10;
  int max_length = 20;
  std::int64_t start_time = 1325376000;  // 2012-01-01T00:00:00Z
  std::uint64_t seed = 7;

  void validate() const {
    if (num_users < 1 || num_categories < 1 || items_per_category < 1 || feature_dim < 1 || style_dim < 1 ||
        num_styles < 1)
      throw InvalidArgument("synthetic counts must be >= 1");
    if (context_strength < 0) throw InvalidArgument("context strength must be >= 0");
    if (temperature < 0) throw InvalidArgument("temperature must be >= 0");
    if (min_length < 1 || max_length < min_length) throw InvalidArgument("bad sequence length range");
    if (style_dim > feature_dim) throw InvalidArgument("style dim exceeds feature dim");
    if (prototype_overlap < 0 || prototype_overlap > 1) throw InvalidArgument("prototype overlap must be in [0, 1]");
    if (prototype_rank < 0 || prototype_rank > feature_dim - style_dim)
      throw InvalidArgument("prototype rank must be in [0, F - style dim]");
  }
};

struct GroundTruth {
  std::vector<std::string> item_names;
  std::vector<int> item_category;     // generator category index
  std::vector<int> item_style_cluster;
  Table item_style;                   // items x style_dim, before style_norm scaling
  Table category_prototype;           // categories x F
  std::vector<std::string> user_names;
  Table user_preference;              // users x style_dim
  Table user_category_logits;         // users x categories
  Table input_context_logits;         // 84 x categories
  Table transition_context_logits;    // 11 x categories
};

struct SynthData {
  std::string interactions;  // user,item,category,timestamp rows
  FeatureMatrix features;    // one row per generated item, manifest order
  std::vector<std::string> manifest;
  GroundTruth truth;
};

namespace detail {

inline std::string padded(char prefix, int value, int width) {
  std::ostringstream os;
  os << prefix << std::setw(width) << std::setfill('0') << value;
  return os.str();
}

inline int digits(int n) { return n <= 1 ? 1 : static_cast<int>(std::floor(std::log10(n - 1))) + 1; }

inline Vector gaussian(int n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

inline int sample_index(const Vector& probs, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng), acc = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (x < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

// Low-rank context x category effect, scaled to unit standard deviation.
inline Table low_rank_logits(int rows, int cols, int rank, Rng& rng) {
  Table a(rows, rank), b(rank, cols);
  for (int r = 0; r < rows; ++r) a.row(r) = gaussian(rank, rng).transpose();
  for (int r = 0; r < rank; ++r) b.row(r) = gaussian(cols, rng).transpose();
  Table m = a * b / std::sqrt(static_cast<double>(rank));
  return m;
}

// Gap sampled by first choosing one of the ten interval bins uniformly.
inline std::int64_t sample_gap(Rng& rng) {
  std::uniform_int_distribution<int> bin(0, 9);
  const int b = bin(rng);
  const double lo = b == 0 ? 0.0 : static_cast<double>(kTransitionEdgesDays[static_cast<std::size_t>(b - 1)]);
  const double hi = b == 9 ? 730.0 : static_cast<double>(kTransitionEdgesDays[static_cast<std::size_t>(b)]);
  std::uniform_real_distribution<double> within(lo, hi);
  auto secs = static_cast<std::int64_t>(within(rng) * static_cast<double>(kSecondsPerDay));
  // keep the gap strictly inside (lo, hi]
  const auto lo_s = static_cast<std::int64_t>(lo) * kSecondsPerDay;
  const auto hi_s = static_cast<std::int64_t>(hi) * kSecondsPerDay;
  return std::clamp<std::int64_t>(secs, b == 0 ? 0 : lo_s + 1, hi_s);
}

}  // namespace detail

inline SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int n_items = cfg.num_categories * cfg.items_per_category;
  SynthData out;
  GroundTruth& gt = out.truth;

  // Style space: cluster centres on the unit sphere.
  Table centres(cfg.num_styles, cfg.style_dim);
  for (int k = 0; k < cfg.num_styles; ++k) centres.row(k) = detail::gaussian(cfg.style_dim, rng).normalized().transpose();

  // Orthonormal basis of feature space; the first style_dim columns embed style space.
  const Matrix basis = Eigen::HouseholderQR<Matrix>(Matrix::NullaryExpr(cfg.feature_dim, cfg.feature_dim, [&] {
                         return std::normal_distribution<double>(0, 1)(rng);
                       })).householderQ();
  const Matrix proj = basis.leftCols(cfg.style_dim);
  const Matrix rest = basis.block(0, cfg.style_dim, cfg.feature_dim,
                                  cfg.prototype_rank > 0 ? cfg.prototype_rank : cfg.feature_dim - cfg.style_dim);

  // Category prototypes: part inside the style subspace (entangled with style),
  // the rest orthogonal to it.
  gt.category_prototype.resize(cfg.num_categories, cfg.feature_dim);
  const double inside = std::sqrt(cfg.prototype_overlap);
  const double outside = std::sqrt(1.0 - cfg.prototype_overlap);
  for (int c = 0; c < cfg.num_categories; ++c) {
    Vector v = inside * (proj * detail::gaussian(cfg.style_dim, rng).normalized());
    if (rest.cols() > 0) v += outside * (rest * detail::gaussian(static_cast<int>(rest.cols()), rng).normalized());
    gt.category_prototype.row(c) = cfg.prototype_norm * v.normalized().transpose();
  }

  const int item_width = detail::digits(n_items);
  const int cat_width = detail::digits(cfg.num_categories);
  const int user_width = detail::digits(cfg.num_users);
  std::vector<std::string> category_names;
  for (int c = 0; c < cfg.num_categories; ++c) category_names.push_back(detail::padded('c', c, cat_width));

  gt.item_style.resize(n_items, cfg.style_dim);
  out.features.resize(n_items, cfg.feature_dim);
  std::uniform_int_distribution<int> pick_style(0, cfg.num_styles - 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < n_items; ++i) {
    const int c = i / cfg.items_per_category;
    const int k = pick_style(rng);
    Vector s = centres.row(k).transpose() + cfg.style_spread * detail::gaussian(cfg.style_dim, rng);
    Vector v = gt.category_prototype.row(c).transpose() + cfg.style_norm * (proj * s);
    for (int f = 0; f < cfg.feature_dim; ++f) v(f) += cfg.feature_noise * noise(rng);
    gt.item_names.push_back(detail::padded('i', i, item_width));
    gt.item_category.push_back(c);
    gt.item_style_cluster.push_back(k);
    gt.item_style.row(i) = s.transpose();
    out.features.row(i) = v.cast<float>().transpose();
  }
  out.manifest = gt.item_names;

  gt.input_context_logits = detail::low_rank_logits(kInputContexts, cfg.num_categories, 2, rng);
  gt.transition_context_logits = detail::low_rank_logits(kTransitionContexts, cfg.num_categories, 2, rng);

  gt.user_preference.resize(cfg.num_users, cfg.style_dim);
  gt.user_category_logits.resize(cfg.num_users, cfg.num_categories);
  for (int u = 0; u < cfg.num_users; ++u) {
    gt.user_names.push_back(detail::padded('u', u, user_width));
    gt.user_preference.row(u) = 2.0 * centres.row(pick_style(rng));
    gt.user_category_logits.row(u) = cfg.user_category_spread * detail::gaussian(cfg.num_categories, rng).transpose();
  }

  // Within-category choice distribution per user.
  auto choose_item = [&](int u, int c) {
    const int first = c * cfg.items_per_category;
    Vector affinity(cfg.items_per_category);
    for (int k = 0; k < cfg.items_per_category; ++k)
      affinity(k) = gt.user_preference.row(u).dot(gt.item_style.row(first + k));
    if (cfg.temperature == 0.0) {
      Eigen::Index best = 0;
      affinity.maxCoeff(&best);
      return first + static_cast<int>(best);
    }
    return first + detail::sample_index(softmax(affinity / cfg.temperature), rng);
  };

  std::ostringstream rows;
  std::uniform_int_distribution<int> length(cfg.min_length, cfg.max_length);
  std::uniform_int_distribution<std::int64_t> offset(0, 365 * kSecondsPerDay);
  for (int u = 0; u < cfg.num_users; ++u) {
    const int n = length(rng);
    std::int64_t ts = cfg.start_time + offset(rng);
    int prev = -1;
    for (int t = 0; t < n; ++t) {
      const std::int64_t gap = t > 0 ? detail::sample_gap(rng) : 0;
      ts += gap;
      const int ic = input_context_of(ts);
      const int tc = transition_context_of(gap, t == 0);
      Vector logits = gt.user_category_logits.row(u).transpose();
      logits += cfg.context_strength * gt.input_context_logits.row(ic).transpose();
      logits += cfg.context_strength * gt.transition_context_logits.row(tc).transpose();
      if (prev >= 0) logits(prev) -= cfg.repeat_penalty;
      const int c = detail::sample_index(softmax(logits), rng);
      const int item = choose_item(u, c);
      rows << gt.user_names[static_cast<std::size_t>(u)] << ',' << gt.item_names[static_cast<std::size_t>(item)] << ','
           << category_names[static_cast<std::size_t>(c)] << ',' << ts << '\n';
      prev = c;
    }
  }
  out.interactions = rows.str();
  return out;
}

}  // namespace vrec
