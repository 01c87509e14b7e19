#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "vrec/common.hpp"

namespace vrec {

struct Interaction {
  int user = 0;
  int item = 0;
  int category = 0;
  std::int64_t timestamp = 0;  // seconds since epoch, UTC

  bool operator==(const Interaction&) const = default;
};

struct Catalog {
  Vocabulary items;
  Vocabulary categories;
  std::vector<int> item_category;
  // A frozen catalog rejects items it does not already know.
  bool frozen = false;

  int num_items() const { return items.size(); }
  int num_categories() const { return categories.size(); }
  int category_of(int item) const { return item_category.at(static_cast<std::size_t>(item)); }

  int add_item(std::string_view item, std::string_view category) {
    auto known = items.find(item);
    if (known) {
      const std::string& expected = categories.name(item_category[static_cast<std::size_t>(*known)]);
      if (expected != category)
        throw CatalogError("item '" + std::string(item) + "' has category '" + expected +
                           "', row says '" + std::string(category) + "'");
      return *known;
    }
    if (frozen) throw CatalogError("unknown item '" + std::string(item) + "'");
    int id = items.intern(item);
    item_category.push_back(categories.intern(category));
    return id;
  }
};

struct Dataset {
  Vocabulary users;
  Catalog catalog;
  std::vector<Interaction> interactions;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// Reads `user,item,category,timestamp` rows, appending to `ds`. Blank lines and
// lines starting with '#' are skipped. Returns the rows read from this stream.
inline std::vector<Interaction> load_interactions(std::istream& in, Dataset& ds) {
  std::vector<Interaction> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = detail::split(view, ',');
    if (fields.size() != 4)
      throw ParseError("expected 4 fields user,item,category,timestamp, got " + std::to_string(fields.size()), lineno);
    for (auto f : fields)
      if (f.empty()) throw ParseError("empty field", lineno);
    std::int64_t ts = 0;
    auto [ptr, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), ts);
    if (ec != std::errc() || ptr != fields[3].data() + fields[3].size())
      throw ParseError("bad timestamp '" + std::string(fields[3]) + "'", lineno);
    if (ts < 0) throw ParseError("negative timestamp", lineno);

    Interaction x;
    try {
      x.item = ds.catalog.add_item(fields[1], fields[2]);
    } catch (const CatalogError& e) {
      throw CatalogError(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
    }
    x.category = ds.catalog.category_of(x.item);
    x.user = ds.users.intern(fields[0]);
    x.timestamp = ts;
    rows.push_back(x);
  }
  ds.interactions.insert(ds.interactions.end(), rows.begin(), rows.end());
  return rows;
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open interactions file '" + path + "'");
  Dataset ds;
  load_interactions(in, ds);
  return ds;
}

inline void write_interactions(std::ostream& out, const Dataset& ds, const std::vector<Interaction>& rows) {
  for (const auto& x : rows)
    out << ds.users.name(x.user) << ',' << ds.catalog.items.name(x.item) << ','
        << ds.catalog.categories.name(x.category) << ',' << x.timestamp << '\n';
}

inline constexpr int kMinUserRecords = 5;
inline constexpr int kMaxUserRecords = 100;

// Keeps users whose record count lies in [5, 100]; order is preserved.
inline std::vector<Interaction> filter_users(const std::vector<Interaction>& rows) {
  std::unordered_map<int, int> counts;
  for (const auto& x : rows) ++counts[x.user];
  std::vector<Interaction> kept;
  kept.reserve(rows.size());
  for (const auto& x : rows) {
    int n = counts[x.user];
    if (n >= kMinUserRecords && n <= kMaxUserRecords) kept.push_back(x);
  }
  return kept;
}

// ---- contexts -------------------------------------------------------------

inline constexpr int kInputContexts = 84;       // weekday (Sunday = 0) x month
inline constexpr int kTransitionContexts = 11;  // 10 interval bins + sequence start
inline constexpr int kSequenceStartBin = 10;

inline constexpr std::int64_t kSecondsPerDay = 86400;
// Right-closed upper edges of bins 0..8, in days. Bin 9 is everything above one year.
inline constexpr std::array<std::int64_t, 9> kTransitionEdgesDays = {1, 2, 3, 7, 15, 30, 90, 182, 365};

inline int input_context_of(std::int64_t timestamp) {
  using namespace std::chrono;
  const sys_days day = floor<days>(sys_seconds{seconds{timestamp}});
  const unsigned wd = weekday{day}.c_encoding();
  const unsigned mon = static_cast<unsigned>(year_month_day{day}.month()) - 1;
  return static_cast<int>(wd * 12 + mon);
}

inline int input_context_weekday(int id) { return id / 12; }
inline int input_context_month(int id) { return id % 12; }

inline int transition_context_of(std::int64_t delta_seconds, bool is_first_step) {
  if (is_first_step) return kSequenceStartBin;
  if (delta_seconds < 0) throw InvalidArgument("negative time interval " + std::to_string(delta_seconds));
  for (std::size_t b = 0; b < kTransitionEdgesDays.size(); ++b)
    if (delta_seconds <= kTransitionEdgesDays[b] * kSecondsPerDay) return static_cast<int>(b);
  return static_cast<int>(kTransitionEdgesDays.size());
}

// ---- sequences ------------------------------------------------------------

struct Step {
  int category = 0;
  int item = 0;
  int input_context = 0;
  int transition_context = kSequenceStartBin;
  std::int64_t timestamp = 0;
};

struct UserSequence {
  int user = 0;
  std::vector<Step> steps;

  std::size_t size() const { return steps.size(); }
};

namespace detail {

// Per-user rows in time order; ties keep input order. Users ordered by id.
inline std::vector<std::pair<int, std::vector<Interaction>>> group_chronologically(
    const std::vector<Interaction>& rows) {
  std::unordered_map<int, std::size_t> slot;
  std::vector<std::pair<int, std::vector<Interaction>>> groups;
  for (const auto& x : rows) {
    auto [it, inserted] = slot.try_emplace(x.user, groups.size());
    if (inserted) groups.push_back({x.user, {}});
    groups[it->second].second.push_back(x);
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [user, xs] : groups)
    std::stable_sort(xs.begin(), xs.end(),
                     [](const Interaction& a, const Interaction& b) { return a.timestamp < b.timestamp; });
  return groups;
}

}  // namespace detail

inline std::vector<UserSequence> build_sequences(const std::vector<Interaction>& rows) {
  std::vector<UserSequence> out;
  for (auto& [user, xs] : detail::group_chronologically(rows)) {
    UserSequence seq;
    seq.user = user;
    seq.steps.reserve(xs.size());
    for (std::size_t t = 0; t < xs.size(); ++t) {
      Step s;
      s.category = xs[t].category;
      s.item = xs[t].item;
      s.timestamp = xs[t].timestamp;
      s.input_context = input_context_of(xs[t].timestamp);
      s.transition_context =
          t == 0 ? kSequenceStartBin : transition_context_of(xs[t].timestamp - xs[t - 1].timestamp, false);
      seq.steps.push_back(s);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

// ---- split ----------------------------------------------------------------

inline constexpr int kColdItemThreshold = 5;

struct DatasetSplit {
  std::vector<Interaction> train;
  std::vector<Interaction> test;
  // is_cold[item] != 0 iff the item has fewer than 5 training records.
  std::vector<char> is_cold;

  bool cold(int item) const { return is_cold.at(static_cast<std::size_t>(item)) != 0; }
};

// Per user, the earliest ceil(fraction * n) records go to train, the rest to test.
inline DatasetSplit chronological_split(const std::vector<Interaction>& rows, int num_items,
                                        double train_fraction = 0.8) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw InvalidArgument("train fraction must be in (0, 1]");
  DatasetSplit split;
  for (auto& [user, xs] : detail::group_chronologically(rows)) {
    const auto n = xs.size();
    auto n_train = static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n) - 1e-9));
    n_train = std::min(n_train, n);
    split.train.insert(split.train.end(), xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(), xs.begin() + static_cast<std::ptrdiff_t>(n_train), xs.end());
  }
  std::vector<int> counts(static_cast<std::size_t>(num_items), 0);
  for (const auto& x : split.train) ++counts.at(static_cast<std::size_t>(x.item));
  split.is_cold.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) split.is_cold[i] = counts[i] < kColdItemThreshold;
  return split;
}

}  // namespace vrec
