#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "vrec/vrec.hpp"

namespace vrec::testing {

// Random interaction rows as text: ids u*, i*, c*; every item has one category.
struct RandomRows {
  int users = 6, items = 12, categories = 3, rows = 60;
  std::int64_t start = 1325376000, span = 400LL * 86400;
};

inline std::string random_rows_text(Rng& rng, const RandomRows& cfg) {
  std::uniform_int_distribution<int> user(0, cfg.users - 1), item(0, cfg.items - 1);
  std::uniform_int_distribution<std::int64_t> ts(cfg.start, cfg.start + cfg.span);
  std::ostringstream os;
  for (int r = 0; r < cfg.rows; ++r) {
    const int i = item(rng);
    os << 'u' << user(rng) << ",i" << i << ",c" << (i % cfg.categories) << ',' << ts(rng) << '\n';
  }
  return os.str();
}

inline Dataset random_dataset(Rng& rng, const RandomRows& cfg) { return dataset_from_text(random_rows_text(rng, cfg)); }

inline FeatureStore random_features(Rng& rng, int items, int dim) {
  FeatureStore fs;
  fs.rows.resize(items, dim);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (int i = 0; i < items; ++i)
    for (int k = 0; k < dim; ++k) fs.rows(i, k) = u(rng);
  return fs;
}

// Catalog with items spread round-robin over categories.
inline Catalog round_robin_catalog(int items, int categories) {
  Catalog c;
  for (int k = 0; k < categories; ++k) c.categories.intern("c" + std::to_string(k));
  for (int i = 0; i < items; ++i) {
    c.items.intern("i" + std::to_string(i));
    c.item_category.push_back(i % categories);
  }
  return c;
}

inline UserSequence random_sequence(Rng& rng, int categories, int length, int user = 0) {
  std::uniform_int_distribution<int> cat(0, categories - 1), ic(0, kInputContexts - 1), tc(0, kTransitionContexts - 2);
  UserSequence seq;
  seq.user = user;
  for (int t = 0; t < length; ++t) {
    Step s;
    s.category = cat(rng);
    s.item = s.category;
    s.input_context = ic(rng);
    s.transition_context = t == 0 ? kSequenceStartBin : tc(rng);
    seq.steps.push_back(s);
  }
  return seq;
}

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace vrec::testing
