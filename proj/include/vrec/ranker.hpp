#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "vrec/common.hpp"
#include "vrec/data.hpp"
#include "vrec/demand.hpp"
#include "vrec/preference.hpp"

namespace vrec {

// Two-part ordering key: items whose category is among the top-k predicted
// categories come first; within either part, higher preference score first.
struct AggregateKey {
  bool in_top_k = false;
  double score = 0;

  // Strict "ranks above" without any id tiebreak.
  friend bool ranks_above(const AggregateKey& a, const AggregateKey& b) {
    if (a.in_top_k != b.in_top_k) return a.in_top_k;
    return a.score > b.score;
  }
};

struct RankedItem {
  int item = 0;
  int category = 0;
  AggregateKey key;
};

// Total order used for the output list: key order, then ascending item id.
inline bool precedes(const RankedItem& a, const RankedItem& b) {
  if (ranks_above(a.key, b.key)) return true;
  if (ranks_above(b.key, a.key)) return false;
  return a.item < b.item;
}

// The min(k, |L|) most probable categories; ties go to the lower id.
inline std::vector<int> top_k_categories(const Vector& probs, int k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  std::vector<int> ids(static_cast<std::size_t>(probs.size()));
  std::iota(ids.begin(), ids.end(), 0);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take), ids.end(), [&](int a, int b) {
    if (probs(a) != probs(b)) return probs(a) > probs(b);
    return a < b;
  });
  ids.resize(take);
  return ids;
}

inline std::vector<char> top_k_mask(const Vector& probs, int k) {
  std::vector<char> mask(static_cast<std::size_t>(probs.size()), 0);
  for (int c : top_k_categories(probs, k)) mask[static_cast<std::size_t>(c)] = 1;
  return mask;
}

inline std::vector<AggregateKey> aggregate_keys(const Vector& item_scores, const Vector& category_probs,
                                                const Catalog& catalog, int k) {
  const auto mask = top_k_mask(category_probs, k);
  std::vector<AggregateKey> keys(static_cast<std::size_t>(item_scores.size()));
  for (Eigen::Index i = 0; i < item_scores.size(); ++i)
    keys[static_cast<std::size_t>(i)] = {mask[static_cast<std::size_t>(catalog.category_of(static_cast<int>(i)))] != 0,
                                         item_scores(i)};
  return keys;
}

inline std::vector<RankedItem> aggregate_rank(const Vector& item_scores, const Vector& category_probs,
                                              const Catalog& catalog, int k) {
  const auto keys = aggregate_keys(item_scores, category_probs, catalog, k);
  std::vector<RankedItem> out(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    out[i] = {static_cast<int>(i), catalog.category_of(static_cast<int>(i)), keys[i]};
  std::sort(out.begin(), out.end(), precedes);
  return out;
}

// Ranking for one user at sequence step `step`: the demand model replays steps
// before it and predicts with that step's contexts.
inline std::vector<RankedItem> aggregate_rank(const PrefParams& preference, const Table& item_vecs,
                                              const DemandParams& demand, const Catalog& catalog,
                                              const UserSequence& seq, std::size_t step, int k) {
  if (step >= seq.size()) throw InvalidArgument("step beyond the end of the sequence");
  const Vector h = replay(demand, seq, step);
  const Step& s = seq.steps[step];
  const Vector probs = category_probabilities(predict_category_scores(demand, h, s.input_context, s.transition_context));
  return aggregate_rank(user_scores(preference, item_vecs, seq.user), probs, catalog, k);
}

// Ranking for the step after a user's full history, taken at `timestamp`.
inline std::vector<RankedItem> rank_next(const PrefParams& preference, const Table& item_vecs,
                                         const DemandParams& demand, const Catalog& catalog, const UserSequence& history,
                                         std::int64_t timestamp, int k) {
  const bool first = history.steps.empty();
  const std::int64_t gap = first ? 0 : timestamp - history.steps.back().timestamp;
  if (gap < 0) throw InvalidArgument("recommendation time precedes the user's last interaction");
  const Vector h = replay(demand, history, history.size());
  const Vector probs = category_probabilities(
      predict_category_scores(demand, h, input_context_of(timestamp), transition_context_of(gap, first)));
  return aggregate_rank(user_scores(preference, item_vecs, history.user), probs, catalog, k);
}

}  // namespace vrec
