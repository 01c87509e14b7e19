#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "vrec/common.hpp"
#include "vrec/data.hpp"
#include "vrec/demand.hpp"
#include "vrec/features.hpp"
#include "vrec/preference.hpp"

namespace vrec {

// A small seeded preference problem: catalog, features, parameters and one triple.
struct PreferenceCase {
  Catalog catalog;
  FeatureStore features;
  PrefParams params;
  Triple triple;
};

// Items are spread round-robin over categories; every third seed draws the
// negative from the positive's category so the shared-l_c path is exercised.
inline PreferenceCase random_preference_case(std::uint64_t seed, PrefVariant variant = PrefVariant::deepstyle,
                                             int dim = 4, int feature_dim = 8, int num_users = 3, int num_items = 6,
                                             int num_categories = 3) {
  if (num_items < 2 || num_categories < 1 || num_users < 1) throw InvalidArgument("case too small");
  Rng rng(seed);
  PreferenceCase pc;
  for (int c = 0; c < num_categories; ++c) pc.catalog.categories.intern("c" + std::to_string(c));
  for (int i = 0; i < num_items; ++i) {
    pc.catalog.items.intern("i" + std::to_string(i));
    pc.catalog.item_category.push_back(i % num_categories);
  }
  pc.features.rows.resize(num_items, feature_dim);
  std::uniform_real_distribution<float> f(-1.0f, 1.0f);
  for (int i = 0; i < num_items; ++i)
    for (int k = 0; k < feature_dim; ++k) pc.features.rows(i, k) = f(rng);
  pc.params = init_preference(variant, dim, num_users, num_items, num_categories, feature_dim, 0.5, rng);

  std::uniform_int_distribution<int> user(0, num_users - 1), item(0, num_items - 1);
  pc.triple.user = user(rng);
  pc.triple.positive = item(rng);
  const bool same = seed % 3 == 0 && num_items > num_categories;
  do {
    pc.triple.negative = item(rng);
  } while (pc.triple.negative == pc.triple.positive ||
           (same && pc.catalog.category_of(pc.triple.negative) != pc.catalog.category_of(pc.triple.positive)));
  return pc;
}

// A small seeded demand problem: parameters and one user sequence.
struct DemandCase {
  DemandParams params;
  UserSequence sequence;
};

inline DemandCase random_demand_case(std::uint64_t seed, DemandKind kind = DemandKind::cagru, int dim = 4,
                                     int num_categories = 5, int length = 4) {
  if (length < 2) throw InvalidArgument("sequence needs at least two steps");
  Rng rng(seed);
  DemandCase dc;
  dc.params = init_demand(kind, dim, num_categories, 0.5, 0.5, rng);
  std::uniform_int_distribution<int> cat(0, num_categories - 1), ic(0, kInputContexts - 1),
      tc(0, kTransitionContexts - 2);
  for (int t = 0; t < length; ++t) {
    Step s;
    s.category = cat(rng);
    s.item = s.category;
    s.input_context = ic(rng);
    s.transition_context = t == 0 ? kSequenceStartBin : tc(rng);
    dc.sequence.steps.push_back(s);
  }
  return dc;
}

enum class GradcheckFault { none, scale_preference, drop_prediction_reset };

struct GradcheckOptions {
  std::uint64_t seed = 1;
  int preference_instances = 100;
  int demand_instances = 50;
  double lambda = 0.01;
  double eps = 1e-5;
  double tolerance = 1e-4;
  GradcheckFault fault = GradcheckFault::none;
};

struct GradcheckReport {
  double preference_max = 0;
  double demand_max = 0;
  int preference_instances = 0;
  int demand_instances = 0;
  bool passed = false;
};

// DeepStyle triples and CA-GRU sequences (d = 4, |L| = 5, length 4), each with a
// seed derived from the base seed.
inline GradcheckReport run_gradcheck(const GradcheckOptions& opt) {
  GradcheckReport r;
  const double pref_scale = opt.fault == GradcheckFault::scale_preference ? 2.0 : 1.0;
  const DemandFault demand_fault =
      opt.fault == GradcheckFault::drop_prediction_reset ? DemandFault::drop_prediction_reset : DemandFault::none;
  for (int n = 0; n < opt.preference_instances; ++n) {
    const auto pc = random_preference_case(opt.seed * 1000003ULL + static_cast<std::uint64_t>(n));
    r.preference_max = std::max(r.preference_max, gradcheck_preference(pc.params, &pc.features, pc.catalog, pc.triple,
                                                                       opt.lambda, opt.eps, pref_scale));
    ++r.preference_instances;
  }
  for (int n = 0; n < opt.demand_instances; ++n) {
    const auto dc = random_demand_case(opt.seed * 1000033ULL + static_cast<std::uint64_t>(n));
    r.demand_max =
        std::max(r.demand_max, gradcheck_demand(dc.params, dc.sequence, opt.lambda, opt.eps, demand_fault).max_error);
    ++r.demand_instances;
  }
  r.passed = r.preference_max < opt.tolerance && r.demand_max < opt.tolerance;
  return r;
}

}  // namespace vrec
