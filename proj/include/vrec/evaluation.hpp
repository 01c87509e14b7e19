#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

#include "vrec/common.hpp"
#include "vrec/data.hpp"
#include "vrec/demand.hpp"
#include "vrec/preference.hpp"
#include "vrec/ranker.hpp"

namespace vrec {

enum class EvalMode { warm, cold };

inline std::string_view to_string(EvalMode m) { return m == EvalMode::warm ? "warm" : "cold"; }

// Full chronological sequences (train prefix followed by test steps) plus the
// per-user bookkeeping the AUC protocols need.
struct EvalData {
  int num_items = 0;
  std::vector<int> item_category;
  std::vector<char> is_cold;
  std::vector<UserSequence> sequences;
  std::vector<std::size_t> train_length;
  std::vector<std::vector<int>> selected;  // sorted items in train and test
};

inline EvalData prepare_eval(const DatasetSplit& split, const Catalog& catalog) {
  if (split.test.empty()) throw DataError("no test interactions after filtering and splitting");
  EvalData ev;
  ev.num_items = catalog.num_items();
  ev.item_category = catalog.item_category;
  ev.is_cold = split.is_cold;
  std::vector<Interaction> all = split.train;
  all.insert(all.end(), split.test.begin(), split.test.end());
  ev.sequences = build_sequences(all);
  std::unordered_map<int, std::size_t> train_count;
  for (const auto& x : split.train) ++train_count[x.user];
  for (const auto& seq : ev.sequences) {
    ev.train_length.push_back(train_count[seq.user]);
    std::vector<int> items;
    for (const auto& s : seq.steps) items.push_back(s.item);
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    ev.selected.push_back(std::move(items));
  }
  return ev;
}

struct UserAuc {
  int user = 0;
  std::int64_t correct = 0;
  std::int64_t pairs = 0;
  double auc() const { return static_cast<double>(correct) / static_cast<double>(pairs); }
};

struct AucResult {
  double auc = 0;
  int users = 0;    // users with at least one pair
  int skipped = 0;  // users without a valid pair
  std::int64_t pairs = 0;
  std::vector<UserAuc> per_user;
};

struct EvalReport {
  AucResult warm;
  AucResult cold;
};

// Literal double loop: fraction of (positive, negative) pairs with
// score(positive) > score(negative). Ties count 0.
inline double auc_bruteforce(const std::vector<double>& scores, const std::vector<int>& positives,
                             const std::vector<int>& negatives) {
  if (positives.empty() || negatives.empty()) throw InvalidArgument("need at least one positive and one negative");
  std::int64_t hits = 0;
  for (int i : positives)
    for (int j : negatives)
      if (scores.at(static_cast<std::size_t>(i)) > scores.at(static_cast<std::size_t>(j))) ++hits;
  return static_cast<double>(hits) / static_cast<double>(positives.size() * negatives.size());
}

namespace detail {

// Positive items for one user: distinct test items (cold mode: cold items only),
// each paired with the sequence step of its first test occurrence.
inline std::vector<std::pair<int, std::size_t>> positives_of(const EvalData& ev, std::size_t u, EvalMode mode) {
  std::vector<std::pair<int, std::size_t>> out;
  std::vector<int> seen;
  const auto& seq = ev.sequences[u];
  for (std::size_t s = ev.train_length[u]; s < seq.size(); ++s) {
    int item = seq.steps[s].item;
    if (mode == EvalMode::cold && !ev.is_cold[static_cast<std::size_t>(item)]) continue;
    if (std::find(seen.begin(), seen.end(), item) != seen.end()) continue;
    seen.push_back(item);
    out.emplace_back(item, s);
  }
  return out;
}

inline std::vector<int> negatives_of(const EvalData& ev, std::size_t u) {
  std::vector<int> out;
  const auto& sel = ev.selected[u];
  for (int i = 0; i < ev.num_items; ++i)
    if (!std::binary_search(sel.begin(), sel.end(), i)) out.push_back(i);
  return out;
}

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

inline AucResult reduce(std::vector<std::optional<UserAuc>>&& per_user) {
  AucResult r;
  double sum = 0;
  for (auto& u : per_user) {
    if (!u) {
      ++r.skipped;
      continue;
    }
    ++r.users;
    r.pairs += u->pairs;
    sum += u->auc();
    r.per_user.push_back(*u);
  }
  r.auc = r.users ? sum / r.users : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace detail

// Pairwise AUC where `keys_at(sequence_index, step)` returns one key per item.
// When `step_dependent` is false the keys are requested once per user.
template <typename KeysAt>
AucResult auc_keys(const EvalData& ev, EvalMode mode, bool step_dependent, KeysAt&& keys_at, int threads = 1) {
  std::vector<std::optional<UserAuc>> per_user(ev.sequences.size());
  detail::parallel_for(ev.sequences.size(), threads, [&](std::size_t u) {
    const auto positives = detail::positives_of(ev, u, mode);
    const auto negatives = detail::negatives_of(ev, u);
    if (positives.empty() || negatives.empty()) return;
    UserAuc ua;
    ua.user = ev.sequences[u].user;
    ua.pairs = static_cast<std::int64_t>(positives.size() * negatives.size());
    auto below = [](const AggregateKey& a, const AggregateKey& b) { return ranks_above(b, a); };
    if (!step_dependent) {
      const std::vector<AggregateKey> keys = keys_at(u, std::size_t{0});
      std::vector<AggregateKey> neg;
      neg.reserve(negatives.size());
      for (int j : negatives) neg.push_back(keys[static_cast<std::size_t>(j)]);
      std::sort(neg.begin(), neg.end(), below);
      for (const auto& [i, s] : positives)
        ua.correct += std::lower_bound(neg.begin(), neg.end(), keys[static_cast<std::size_t>(i)], below) - neg.begin();
    } else {
      for (const auto& [i, s] : positives) {
        const std::vector<AggregateKey> keys = keys_at(u, s);
        const AggregateKey& pk = keys[static_cast<std::size_t>(i)];
        for (int j : negatives)
          if (ranks_above(pk, keys[static_cast<std::size_t>(j)])) ++ua.correct;
      }
    }
    per_user[u] = ua;
  });
  return detail::reduce(std::move(per_user));
}

// AUC for a plain scoring model: `scores_of(user)` gives one score per item.
inline AucResult auc_scores(const EvalData& ev, EvalMode mode, const std::function<Vector(int user)>& scores_of,
                            int threads = 1) {
  return auc_keys(
      ev, mode, false,
      [&](std::size_t u, std::size_t) {
        const Vector s = scores_of(ev.sequences[u].user);
        std::vector<AggregateKey> keys(static_cast<std::size_t>(s.size()));
        for (Eigen::Index i = 0; i < s.size(); ++i) keys[static_cast<std::size_t>(i)] = {false, s(i)};
        return keys;
      },
      threads);
}

inline AucResult auc_preference(const PrefParams& params, const FeatureStore* features, const Catalog& catalog,
                                const EvalData& ev, EvalMode mode, int threads = 1) {
  const Table vecs = item_vectors(params, features, catalog);
  return auc_scores(ev, mode, [&](int user) { return user_scores(params, vecs, user); }, threads);
}

// DeepStyle + demand model: per test step, top-k categories from the demand
// model's prediction (train prefix and earlier steps replayed) gate the
// preference ordering.
inline AucResult auc_aggregated(const PrefParams& preference, const FeatureStore* features,
                                const DemandParams& demand, const Catalog& catalog, const EvalData& ev, EvalMode mode,
                                int k, int threads = 1) {
  const Table vecs = item_vectors(preference, features, catalog);
  return auc_keys(
      ev, mode, true,
      [&](std::size_t u, std::size_t step) {
        const UserSequence& seq = ev.sequences[u];
        const Vector h = replay(demand, seq, step);
        const Step& s = seq.steps[step];
        const Vector probs =
            category_probabilities(predict_category_scores(demand, h, s.input_context, s.transition_context));
        return aggregate_keys(user_scores(preference, vecs, seq.user), probs, catalog, k);
      },
      threads);
}

inline EvalReport evaluate_preference(const PrefParams& params, const FeatureStore* features, const Catalog& catalog,
                                      const EvalData& ev, int threads = 1) {
  return {auc_preference(params, features, catalog, ev, EvalMode::warm, threads),
          auc_preference(params, features, catalog, ev, EvalMode::cold, threads)};
}

inline EvalReport evaluate_aggregated(const PrefParams& preference, const FeatureStore* features,
                                      const DemandParams& demand, const Catalog& catalog, const EvalData& ev, int k,
                                      int threads = 1) {
  return {auc_aggregated(preference, features, demand, catalog, ev, EvalMode::warm, k, threads),
          auc_aggregated(preference, features, demand, catalog, ev, EvalMode::cold, k, threads)};
}

struct DemandAucResult {
  double auc = 0;
  int users = 0;
  std::int64_t steps = 0;
};

// Category-level AUC per test step: the true next category against every other
// category (strict comparison), averaged per user, then over users.
inline DemandAucResult demand_auc_from(const EvalData& ev,
                                       const std::function<Vector(std::size_t u, std::size_t step, const Vector& h)>& scores_at,
                                       const std::function<Vector(const Vector& h, const Step& s)>& advance, int dim,
                                       int threads = 1) {
  std::vector<std::pair<double, std::int64_t>> per_user(ev.sequences.size(), {0.0, 0});
  detail::parallel_for(ev.sequences.size(), threads, [&](std::size_t u) {
    const UserSequence& seq = ev.sequences[u];
    Vector h = Vector::Zero(dim);
    double sum = 0;
    std::int64_t n = 0;
    for (std::size_t s = 0; s < seq.size(); ++s) {
      if (s >= ev.train_length[u] && s >= 1) {
        const Vector scores = scores_at(u, s, h);
        if (scores.size() > 1) {
          const int truth = seq.steps[s].category;
          std::int64_t hits = 0;
          for (Eigen::Index j = 0; j < scores.size(); ++j)
            if (j != truth && scores(truth) > scores(j)) ++hits;
          sum += static_cast<double>(hits) / static_cast<double>(scores.size() - 1);
          ++n;
        }
      }
      h = advance(h, seq.steps[s]);
    }
    per_user[u] = {n ? sum / static_cast<double>(n) : 0.0, n};
  });
  DemandAucResult r;
  double total = 0;
  for (const auto& [auc, n] : per_user) {
    if (n == 0) continue;
    total += auc;
    ++r.users;
    r.steps += n;
  }
  r.auc = r.users ? total / r.users : std::numeric_limits<double>::quiet_NaN();
  return r;
}

inline DemandAucResult demand_auc(const DemandParams& params, const EvalData& ev, int threads = 1) {
  return demand_auc_from(
      ev,
      [&](std::size_t u, std::size_t s, const Vector& h) {
        const Step& st = ev.sequences[u].steps[s];
        return predict_category_scores(params, h, st.input_context, st.transition_context);
      },
      [&](const Vector& h, const Step& st) {
        return cell_forward(params, h, st.category, st.input_context, st.transition_context);
      },
      params.dim, threads);
}

}  // namespace vrec
