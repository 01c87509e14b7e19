#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string_view>
#include <vector>

#include "vrec/common.hpp"
#include "vrec/data.hpp"
#include "vrec/features.hpp"
#include "vrec/math.hpp"

namespace vrec {

enum class PrefVariant : std::uint32_t { bpr = 0, vbpr = 1, deepstyle = 2 };

inline std::string_view to_string(PrefVariant v) {
  switch (v) {
    case PrefVariant::bpr: return "bpr";
    case PrefVariant::vbpr: return "vbpr";
    case PrefVariant::deepstyle: return "deepstyle";
  }
  return "?";
}

inline bool uses_features(PrefVariant v) { return v != PrefVariant::bpr; }

// Parameters of the pairwise preference models.
//   BPR:       y = p_u . q_i
//   VBPR:      y = p_u . (E v_i + q_i)
//   DeepStyle: y = p_u . (E v_i - l_c(i) + q_i)
// E is empty for BPR; the category table is only read by DeepStyle.
struct PrefParams {
  PrefVariant variant = PrefVariant::deepstyle;
  int dim = 0;
  Matrix embedding;  // E, dim x F
  Table category;    // l_c
  Table user;        // p_u
  Table item;        // q_i

  int feature_dim() const { return static_cast<int>(embedding.cols()); }

  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    f(std::string_view("embedding"), self.embedding);
    f(std::string_view("category"), self.category);
    f(std::string_view("user"), self.user);
    f(std::string_view("item"), self.item);
  }
  template <typename F> void for_each_block(F&& f) { visit(*this, f); }
  template <typename F> void for_each_block(F&& f) const { visit(*this, f); }

  bool operator==(const PrefParams& o) const {
    return variant == o.variant && dim == o.dim && embedding == o.embedding && category == o.category &&
           user == o.user && item == o.item;
  }
};

struct PrefTrainConfig {
  int dim = 10;
  double learning_rate = 0.01;
  double lambda = 0.01;
  int epochs = 20;
  std::uint64_t seed = 1;
  double init_scale = 0.01;

  void validate() const {
    if (dim < 1) throw InvalidArgument("d must be >= 1");
    if (!(learning_rate > 0)) throw InvalidArgument("learning rate must be > 0");
    if (!(lambda >= 0)) throw InvalidArgument("lambda_p must be >= 0");
    if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  }
};

struct Triple {
  int user = 0;
  int positive = 0;
  int negative = 0;
};

inline PrefParams init_preference(PrefVariant variant, int dim, int num_users, int num_items, int num_categories,
                                  int feature_dim, double scale, Rng& rng) {
  PrefParams p;
  p.variant = variant;
  p.dim = dim;
  p.embedding = Matrix::Zero(dim, uses_features(variant) ? feature_dim : 0);
  p.category = Table::Zero(variant == PrefVariant::deepstyle ? num_categories : 0, dim);
  p.user = Table::Zero(num_users, dim);
  p.item = Table::Zero(num_items, dim);
  fill_uniform(p.embedding, scale, rng);
  fill_uniform(p.category, scale, rng);
  fill_uniform(p.user, scale, rng);
  fill_uniform(p.item, scale, rng);
  return p;
}

namespace detail {

inline void require_features(const PrefParams& params, const FeatureStore* features, int item) {
  if (!uses_features(params.variant)) return;
  if (features == nullptr) throw InvalidArgument("visual variant needs a feature store");
  if (item < 0 || item >= features->count()) throw CatalogError("no feature row for item " + std::to_string(item));
  if (features->dim() != params.feature_dim())
    throw InvalidArgument("feature dimension " + std::to_string(features->dim()) + " does not match model F " +
                          std::to_string(params.feature_dim()));
}

inline Vector embed(const PrefParams& params, const FeatureStore& features, int item) {
  return params.embedding * features.rows.row(item).transpose().cast<double>();
}

}  // namespace detail

// s_i = E v_i - l_c(i)
inline Vector style_feature(const PrefParams& params, const FeatureStore& features, const Catalog& catalog,
                            int item) {
  if (params.embedding.cols() == 0) throw InvalidArgument("model has no visual embedding");
  detail::require_features(params, &features, item);
  Vector s = detail::embed(params, features, item);
  if (params.category.rows() > 0) s -= params.category.row(catalog.category_of(item)).transpose();
  return s;
}

// Style features of every item, one row each.
inline Table style_table(const PrefParams& params, const FeatureStore& features, const Catalog& catalog) {
  Table out(catalog.num_items(), params.dim);
  for (int i = 0; i < catalog.num_items(); ++i) out.row(i) = style_feature(params, features, catalog, i).transpose();
  return out;
}

// The vector p_u is dotted with: q_i plus the variant's visual term.
inline Vector item_vector(const PrefParams& params, const FeatureStore* features, const Catalog& catalog, int item,
                          PrefVariant variant) {
  Vector r = params.item.row(item).transpose();
  if (variant == PrefVariant::bpr) return r;
  if (params.embedding.cols() == 0) throw InvalidArgument("model has no visual embedding");
  if (variant == PrefVariant::deepstyle && params.category.rows() == 0)
    throw InvalidArgument("model has no category table");
  detail::require_features(params, features, item);
  r += detail::embed(params, *features, item);
  if (variant == PrefVariant::deepstyle) r -= params.category.row(catalog.category_of(item)).transpose();
  return r;
}

inline double score(const PrefParams& params, const FeatureStore* features, const Catalog& catalog, int user,
                    int item, PrefVariant variant) {
  return params.user.row(user).dot(item_vector(params, features, catalog, item, variant).transpose());
}

inline double score(const PrefParams& params, const FeatureStore* features, const Catalog& catalog, int user,
                    int item) {
  return score(params, features, catalog, user, item, params.variant);
}

// All item vectors at once (row i = item_vector(i)); scores for user u are rows * p_u.
inline Table item_vectors(const PrefParams& params, const FeatureStore* features, const Catalog& catalog) {
  Table out = params.item;
  if (params.variant == PrefVariant::bpr) return out;
  detail::require_features(params, features, 0);
  out += features->rows.cast<double>() * params.embedding.transpose();
  if (params.variant == PrefVariant::deepstyle)
    for (int i = 0; i < out.rows(); ++i) out.row(i) -= params.category.row(catalog.category_of(i));
  return out;
}

inline Vector user_scores(const PrefParams& params, const Table& vectors, int user) {
  return vectors * params.user.row(user).transpose();
}

// g(y_ui - y_ui') with g the logistic function.
inline double pair_probability(double y_pos, double y_neg) { return sigmoid(y_pos - y_neg); }

// Regularization weights for one triple. Per-entity vectors (p_u, q_i, q_i',
// l_c) use `entity`; the shared matrix E uses `embedding`.
struct PrefPenalty {
  double entity = 0;
  double embedding = 0;

  static PrefPenalty uniform(double lambda) { return {lambda, lambda}; }
};

// Squared norm of the per-entity vectors a triple touches; each row counted once.
inline double touched_sq_norm(const PrefParams& params, const Catalog& catalog, const Triple& t) {
  double r = params.user.row(t.user).squaredNorm() + params.item.row(t.positive).squaredNorm() +
             params.item.row(t.negative).squaredNorm();
  if (params.variant == PrefVariant::deepstyle) {
    int cp = catalog.category_of(t.positive), cn = catalog.category_of(t.negative);
    r += params.category.row(cp).squaredNorm();
    if (cn != cp) r += params.category.row(cn).squaredNorm();
  }
  return r;
}

inline double penalty_value(const PrefParams& params, const Catalog& catalog, const Triple& t, PrefPenalty pen) {
  double r = 0.5 * pen.entity * touched_sq_norm(params, catalog, t);
  if (params.variant != PrefVariant::bpr) r += 0.5 * pen.embedding * params.embedding.squaredNorm();
  return r;
}

// Item-vector difference for y_ui - y_ui' = p_u . diff. A shared category term
// is left out rather than added and subtracted, so it cancels exactly.
inline Vector triple_difference(const PrefParams& params, const FeatureStore* features, const Catalog& catalog,
                                const Triple& t) {
  Vector diff = (params.item.row(t.positive) - params.item.row(t.negative)).transpose();
  if (params.variant == PrefVariant::bpr) return diff;
  detail::require_features(params, features, t.positive);
  detail::require_features(params, features, t.negative);
  diff += params.embedding * (features->rows.row(t.positive).cast<double>() - features->rows.row(t.negative).cast<double>()).transpose();
  if (params.variant == PrefVariant::deepstyle) {
    const int cp = catalog.category_of(t.positive), cn = catalog.category_of(t.negative);
    if (cp != cn) diff -= (params.category.row(cp) - params.category.row(cn)).transpose();
  }
  return diff;
}

// ln(1 + exp(-(y_ui - y_ui'))) + penalties on the touched parameters
inline double triple_loss(const PrefParams& params, const FeatureStore* features, const Catalog& catalog,
                          const Triple& t, PrefPenalty pen) {
  const double margin = params.user.row(t.user).dot(triple_difference(params, features, catalog, t).transpose());
  return log1p_exp(-margin) + penalty_value(params, catalog, t, pen);
}

inline double triple_loss(const PrefParams& params, const FeatureStore* features, const Catalog& catalog,
                          const Triple& t, double lambda) {
  return triple_loss(params, features, catalog, t, PrefPenalty::uniform(lambda));
}

// Gradient of triple_loss restricted to the touched parameters.
struct TripleGradient {
  Triple triple;
  int category_pos = -1;
  int category_neg = -1;
  Vector user;
  Vector item_pos;
  Vector item_neg;
  Vector category_pos_grad;  // empty unless DeepStyle
  Vector category_neg_grad;  // empty unless DeepStyle and categories differ
  Matrix embedding;          // empty for BPR
  double loss = 0;
};

inline TripleGradient triple_gradient(const PrefParams& params, const FeatureStore* features,
                                      const Catalog& catalog, const Triple& t, PrefPenalty pen) {
  const double lambda = pen.entity;
  const PrefVariant v = params.variant;
  const Vector p = params.user.row(t.user).transpose();
  const Vector diff = triple_difference(params, features, catalog, t);
  const double margin = p.dot(diff);
  // d/dmargin of ln(1 + e^-margin)
  const double coef = -sigmoid(-margin);

  TripleGradient g;
  g.triple = t;
  g.loss = log1p_exp(-margin) + penalty_value(params, catalog, t, pen);
  g.user = coef * diff + lambda * p;
  g.item_pos = coef * p + lambda * params.item.row(t.positive).transpose();
  g.item_neg = -coef * p + lambda * params.item.row(t.negative).transpose();
  if (v != PrefVariant::bpr) {
    Eigen::RowVectorXd dv = features->rows.row(t.positive).cast<double>() - features->rows.row(t.negative).cast<double>();
    g.embedding = coef * p * dv + pen.embedding * params.embedding;
  }
  if (v == PrefVariant::deepstyle) {
    g.category_pos = catalog.category_of(t.positive);
    g.category_neg = catalog.category_of(t.negative);
    if (g.category_pos == g.category_neg) {
      g.category_pos_grad = lambda * params.category.row(g.category_pos).transpose();
    } else {
      g.category_pos_grad = -coef * p + lambda * params.category.row(g.category_pos).transpose();
      g.category_neg_grad = coef * p + lambda * params.category.row(g.category_neg).transpose();
    }
  }
  return g;
}

// target += scale * gradient
inline void accumulate(const TripleGradient& g, PrefParams& target, double scale) {
  const Triple& t = g.triple;
  target.user.row(t.user) += scale * g.user.transpose();
  target.item.row(t.positive) += scale * g.item_pos.transpose();
  target.item.row(t.negative) += scale * g.item_neg.transpose();
  if (g.embedding.size() > 0) target.embedding += scale * g.embedding;
  if (g.category_pos_grad.size() > 0) target.category.row(g.category_pos) += scale * g.category_pos_grad.transpose();
  if (g.category_neg_grad.size() > 0) target.category.row(g.category_neg) += scale * g.category_neg_grad.transpose();
}

// One SGD update; returns the loss before the step.
inline double sgd_step(PrefParams& params, const FeatureStore* features, const Catalog& catalog, const Triple& t,
                       double learning_rate, PrefPenalty pen) {
  TripleGradient g = triple_gradient(params, features, catalog, t, pen);
  accumulate(g, params, -learning_rate);
  return g.loss;
}

inline double sgd_step(PrefParams& params, const FeatureStore* features, const Catalog& catalog, const Triple& t,
                       double learning_rate, double lambda) {
  return sgd_step(params, features, catalog, t, learning_rate, PrefPenalty::uniform(lambda));
}

// ---- negative sampling ----------------------------------------------------

// Sorted, de-duplicated items per user.
using UserItems = std::vector<std::vector<int>>;

inline UserItems user_items(const std::vector<Interaction>& rows, int num_users) {
  UserItems out(static_cast<std::size_t>(num_users));
  for (const auto& x : rows) out.at(static_cast<std::size_t>(x.user)).push_back(x.item);
  for (auto& v : out) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

// Uniform over items the user has not selected, by rejection.
inline int sample_negative(Rng& rng, const std::vector<int>& selected, int num_items) {
  if (static_cast<int>(selected.size()) >= num_items)
    throw InvalidArgument("user selected every item; no negative exists");
  std::uniform_int_distribution<int> pick(0, num_items - 1);
  for (;;) {
    int j = pick(rng);
    if (!std::binary_search(selected.begin(), selected.end(), j)) return j;
  }
}

// ---- training -------------------------------------------------------------

struct PrefTrainResult {
  PrefParams params;
  std::vector<double> epoch_loss;
};

using EpochLogger = std::function<void(int epoch, double mean_loss)>;

inline PrefTrainResult train_preference(const DatasetSplit& split, const FeatureStore* features,
                                        const Catalog& catalog, int num_users, const PrefTrainConfig& cfg,
                                        PrefVariant variant, const EpochLogger& log = {}) {
  cfg.validate();
  if (uses_features(variant) && features == nullptr)
    throw InvalidArgument(std::string(to_string(variant)) + " needs visual features");
  Rng rng(cfg.seed);
  PrefTrainResult out;
  out.params = init_preference(variant, cfg.dim, num_users, catalog.num_items(), catalog.num_categories(),
                               features ? features->dim() : 0, cfg.init_scale, rng);
  const UserItems selected = user_items(split.train, num_users);
  std::vector<std::size_t> order(split.train.size());
  // E appears in every triple: spreading lambda over an epoch's updates applies
  // the objective's lambda/2 ||E||^2 once per epoch.
  const PrefPenalty pen{cfg.lambda, order.empty() ? cfg.lambda : cfg.lambda / static_cast<double>(order.size())};
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    for (std::size_t k : order) {
      const Interaction& x = split.train[k];
      Triple t{x.user, x.item, sample_negative(rng, selected[static_cast<std::size_t>(x.user)], catalog.num_items())};
      total += sgd_step(out.params, features, catalog, t, cfg.learning_rate, pen);
    }
    double mean = order.empty() ? 0.0 : total / static_cast<double>(order.size());
    out.epoch_loss.push_back(mean);
    if (log) log(epoch, mean);
  }
  return out;
}

// ---- gradient verification ------------------------------------------------

// |a - n| / max(1e-8, |a| + |n|)
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

// Max relative error between the analytic triple gradient and central finite
// differences over every parameter entry. `analytic_scale` != 1 is a test hook.
inline double gradcheck_preference(const PrefParams& params, const FeatureStore* features, const Catalog& catalog,
                                   const Triple& t, double lambda, double eps = 1e-5, double analytic_scale = 1.0) {
  PrefParams analytic = params;
  analytic.for_each_block([](std::string_view, auto& m) { m.setZero(); });
  accumulate(triple_gradient(params, features, catalog, t, PrefPenalty::uniform(lambda)), analytic, analytic_scale);

  PrefParams probe = params;
  double worst = 0;
  auto check_block = [&](auto& probe_block, const auto& analytic_block) {
    for (Eigen::Index r = 0; r < probe_block.rows(); ++r)
      for (Eigen::Index c = 0; c < probe_block.cols(); ++c) {
        const double saved = probe_block(r, c);
        probe_block(r, c) = saved + eps;
        const double up = triple_loss(probe, features, catalog, t, lambda);
        probe_block(r, c) = saved - eps;
        const double down = triple_loss(probe, features, catalog, t, lambda);
        probe_block(r, c) = saved;
        worst = std::max(worst, relative_error(analytic_block(r, c), (up - down) / (2 * eps)));
      }
  };
  check_block(probe.embedding, analytic.embedding);
  check_block(probe.category, analytic.category);
  check_block(probe.user, analytic.user);
  check_block(probe.item, analytic.item);
  return worst;
}

}  // namespace vrec
