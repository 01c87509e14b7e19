#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vrec/common.hpp"
#include "vrec/data.hpp"
#include "vrec/math.hpp"
#include "vrec/preference.hpp"

namespace vrec {

enum class DemandKind : std::uint32_t { gru = 0, cagru = 1 };

inline std::string_view to_string(DemandKind k) { return k == DemandKind::gru ? "gru" : "cagru"; }

// Recurrent category-demand model. The plain GRU leaves every context-related
// block empty.
//
//   z  = sig(input_update l + hidden_update h + incontext_update c_I + transition_update c_T)
//   a  = sig(input_activation l + hidden_activation h + incontext_activation c_I)
//   r  = sig(input_reset l + hidden_reset h + transition_reset c_T)
//   h~ = tanh(input_candidate (l * a) + hidden_candidate (h * r))
//   h' = (1 - z) * h + z * h~
//
// Prediction of the next category j with next-step contexts:
//   a' = sig(predict_activation c_I'),  r' = sig(predict_reset c_T')
//   score_j = (h * r') . (l_j * a')
// The GRU uses a = 1 in the candidate and score_j = h . l_j.
struct DemandParams {
  DemandKind kind = DemandKind::cagru;
  int dim = 0;

  Matrix input_update, input_activation, input_reset, input_candidate;
  Matrix hidden_update, hidden_activation, hidden_reset, hidden_candidate;
  Matrix incontext_update, incontext_activation;
  Matrix transition_update, transition_reset;
  Matrix predict_activation, predict_reset;

  Table category;            // l_j, one row per category
  Table input_context;       // 84 rows
  Table transition_context;  // 11 rows

  int num_categories() const { return static_cast<int>(category.rows()); }
  bool context_aware() const { return kind == DemandKind::cagru; }

  template <typename Self, typename F>
  static void visit(Self& s, F&& f) {
    f(std::string_view("input_update"), s.input_update);
    f(std::string_view("input_activation"), s.input_activation);
    f(std::string_view("input_reset"), s.input_reset);
    f(std::string_view("input_candidate"), s.input_candidate);
    f(std::string_view("hidden_update"), s.hidden_update);
    f(std::string_view("hidden_activation"), s.hidden_activation);
    f(std::string_view("hidden_reset"), s.hidden_reset);
    f(std::string_view("hidden_candidate"), s.hidden_candidate);
    f(std::string_view("incontext_update"), s.incontext_update);
    f(std::string_view("incontext_activation"), s.incontext_activation);
    f(std::string_view("transition_update"), s.transition_update);
    f(std::string_view("transition_reset"), s.transition_reset);
    f(std::string_view("predict_activation"), s.predict_activation);
    f(std::string_view("predict_reset"), s.predict_reset);
    f(std::string_view("category"), s.category);
    f(std::string_view("input_context"), s.input_context);
    f(std::string_view("transition_context"), s.transition_context);
  }
  template <typename F> void for_each_block(F&& f) { visit(*this, f); }
  template <typename F> void for_each_block(F&& f) const { visit(*this, f); }

  // Raw storage of every block in visit order; gradients share the layout.
  std::vector<std::pair<std::string_view, Eigen::Map<Eigen::VectorXd>>> flat_blocks() {
    std::vector<std::pair<std::string_view, Eigen::Map<Eigen::VectorXd>>> out;
    for_each_block([&](std::string_view name, auto& m) { out.emplace_back(name, Eigen::Map<Eigen::VectorXd>(m.data(), m.size())); });
    return out;
  }
  std::vector<std::pair<std::string_view, Eigen::Map<const Eigen::VectorXd>>> flat_blocks() const {
    std::vector<std::pair<std::string_view, Eigen::Map<const Eigen::VectorXd>>> out;
    for_each_block([&](std::string_view name, const auto& m) {
      out.emplace_back(name, Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()));
    });
    return out;
  }

  bool operator==(const DemandParams& o) const {
    if (kind != o.kind || dim != o.dim || category.rows() != o.category.rows()) return false;
    auto a = flat_blocks();
    auto b = o.flat_blocks();
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].second.size() != b[i].second.size() || a[i].second != b[i].second) return false;
    return true;
  }
};

struct DemandTrainConfig {
  int dim = 10;
  double learning_rate = 0.01;
  double lambda = 0.01;
  int epochs = 20;
  std::uint64_t seed = 1;
  double matrix_init_scale = 0.1;
  double embedding_init_scale = 0.01;
  bool pretrain = false;

  void validate() const {
    if (dim < 1) throw InvalidArgument("d must be >= 1");
    if (!(learning_rate > 0)) throw InvalidArgument("learning rate must be > 0");
    if (!(lambda >= 0)) throw InvalidArgument("lambda_d must be >= 0");
    if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  }
};

inline DemandParams init_demand(DemandKind kind, int dim, int num_categories, double matrix_scale,
                                double embedding_scale, Rng& rng) {
  DemandParams p;
  p.kind = kind;
  p.dim = dim;
  const bool ca = kind == DemandKind::cagru;
  auto square = [&](bool present) { return present ? Matrix(Matrix::Zero(dim, dim)) : Matrix(); };
  p.input_update = square(true);
  p.input_activation = square(ca);
  p.input_reset = square(true);
  p.input_candidate = square(true);
  p.hidden_update = square(true);
  p.hidden_activation = square(ca);
  p.hidden_reset = square(true);
  p.hidden_candidate = square(true);
  p.incontext_update = square(ca);
  p.incontext_activation = square(ca);
  p.transition_update = square(ca);
  p.transition_reset = square(ca);
  p.predict_activation = square(ca);
  p.predict_reset = square(ca);
  p.category = Table::Zero(num_categories, dim);
  p.input_context = Table::Zero(ca ? kInputContexts : 0, dim);
  p.transition_context = Table::Zero(ca ? kTransitionContexts : 0, dim);
  p.for_each_block([&](std::string_view name, auto& m) {
    bool table = name == "category" || name == "input_context" || name == "transition_context";
    fill_uniform(m, table ? embedding_scale : matrix_scale, rng);
  });
  return p;
}

inline DemandParams zeros_like(const DemandParams& p) {
  DemandParams z = p;
  z.for_each_block([](std::string_view, auto& m) { m.setZero(); });
  return z;
}

// ---- forward ----------------------------------------------------------------

struct CellCache {
  int category = 0, input_context = 0, transition_context = 0;
  Vector h_prev, l, z, a, r, candidate, h;
};

namespace detail {

inline void check_contexts(int input_ctx, int transition_ctx) {
  if (input_ctx < 0 || input_ctx >= kInputContexts)
    throw InvalidArgument("input context id " + std::to_string(input_ctx) + " out of range");
  if (transition_ctx < 0 || transition_ctx >= kTransitionContexts)
    throw InvalidArgument("transition context id " + std::to_string(transition_ctx) + " out of range");
}

inline void check_category(const DemandParams& p, int category) {
  if (category < 0 || category >= p.num_categories())
    throw InvalidArgument("category id " + std::to_string(category) + " out of range");
}

}  // namespace detail

inline Vector cell_forward(const DemandParams& p, const Vector& h_prev, int category, int input_ctx,
                           int transition_ctx, CellCache* cache = nullptr) {
  detail::check_category(p, category);
  const Vector l = p.category.row(category).transpose();
  Vector pre_z = p.input_update * l + p.hidden_update * h_prev;
  Vector pre_r = p.input_reset * l + p.hidden_reset * h_prev;
  Vector a;
  Vector x = l;
  if (p.context_aware()) {
    detail::check_contexts(input_ctx, transition_ctx);
    const Vector ci = p.input_context.row(input_ctx).transpose();
    const Vector ct = p.transition_context.row(transition_ctx).transpose();
    pre_z += p.incontext_update * ci + p.transition_update * ct;
    pre_r += p.transition_reset * ct;
    a = sigmoid(Vector(p.input_activation * l + p.hidden_activation * h_prev + p.incontext_activation * ci));
    x = l.cwiseProduct(a);
  }
  const Vector z = sigmoid(pre_z);
  const Vector r = sigmoid(pre_r);
  const Vector cand = (p.input_candidate * x + p.hidden_candidate * h_prev.cwiseProduct(r)).array().tanh().matrix();
  Vector h = (1.0 - z.array()).matrix().cwiseProduct(h_prev) + z.cwiseProduct(cand);
  if (cache) {
    cache->category = category;
    cache->input_context = input_ctx;
    cache->transition_context = transition_ctx;
    cache->h_prev = h_prev;
    cache->l = l;
    cache->z = z;
    cache->a = a;
    cache->r = r;
    cache->candidate = cand;
    cache->h = h;
  }
  return h;
}

inline Vector gru_forward(const DemandParams& p, const Vector& h_prev, int category) {
  if (p.kind != DemandKind::gru) throw InvalidArgument("gru_forward needs GRU parameters");
  return cell_forward(p, h_prev, category, 0, kSequenceStartBin);
}

inline Vector cagru_forward(const DemandParams& p, const Vector& h_prev, int category, int input_ctx,
                            int transition_ctx) {
  if (p.kind != DemandKind::cagru) throw InvalidArgument("cagru_forward needs CA-GRU parameters");
  return cell_forward(p, h_prev, category, input_ctx, transition_ctx);
}

struct PredictionGates {
  Vector a, r;  // a', r'; empty for GRU
};

inline Vector predict_category_scores(const DemandParams& p, const Vector& h, int next_input_ctx,
                                      int next_transition_ctx, PredictionGates* gates = nullptr) {
  if (!p.context_aware()) return p.category * h;
  detail::check_contexts(next_input_ctx, next_transition_ctx);
  Vector a = sigmoid(Vector(p.predict_activation * p.input_context.row(next_input_ctx).transpose()));
  Vector r = sigmoid(Vector(p.predict_reset * p.transition_context.row(next_transition_ctx).transpose()));
  Vector scores = p.category * h.cwiseProduct(r).cwiseProduct(a);
  if (gates) {
    gates->a = std::move(a);
    gates->r = std::move(r);
  }
  return scores;
}

inline Vector category_probabilities(const Vector& scores) { return softmax(scores); }

// Hidden state after consuming steps [0, upto) of the sequence, starting from zero.
inline Vector replay(const DemandParams& p, const UserSequence& seq, std::size_t upto) {
  Vector h = Vector::Zero(p.dim);
  for (std::size_t t = 0; t < upto && t < seq.size(); ++t) {
    const Step& s = seq.steps[t];
    h = cell_forward(p, h, s.category, s.input_context, s.transition_context);
  }
  return h;
}

// ---- objective ----------------------------------------------------------------

namespace detail {

inline double regularizer(const DemandParams& p) {
  double r = 0;
  p.for_each_block([&](std::string_view, const auto& m) { r += m.squaredNorm(); });
  return r;
}

}  // namespace detail

// Sum over t of -(1/|L|) ln softmax(score_{t+1})[true category], plus
// lambda/2 ||theta||^2 over every parameter block.
inline double sequence_loss(const DemandParams& p, const UserSequence& seq, double lambda) {
  if (seq.size() < 2) throw InvalidArgument("sequence needs at least 2 steps");
  const double inv_l = 1.0 / p.num_categories();
  double loss = 0;
  Vector h = Vector::Zero(p.dim);
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    const Step& s = seq.steps[t];
    const Step& next = seq.steps[t + 1];
    h = cell_forward(p, h, s.category, s.input_context, s.transition_context);
    Vector logp = log_softmax(predict_category_scores(p, h, next.input_context, next.transition_context));
    loss -= inv_l * logp(next.category);
  }
  return loss + 0.5 * lambda * detail::regularizer(p);
}

namespace detail {

// The same objective in long double. Finite differences of an O(1) loss at
// eps = 1e-5 lose about 1e-11 to double roundoff, which swamps entries whose
// true partial is near 1e-9; the extended evaluation keeps that noise far below.
inline long double sequence_loss_extended(const DemandParams& p, const UserSequence& seq, double lambda) {
  using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  if (seq.size() < 2) throw InvalidArgument("sequence needs at least 2 steps");
  auto sig = [](const LVector& x) { return LVector(x.unaryExpr([](long double v) { return 1.0L / (1.0L + std::exp(-v)); })); };
  auto m = [](const Matrix& x) { return LMatrix(x.cast<long double>()); };
  auto row = [](const Table& t, int r) { return LVector(t.row(r).transpose().cast<long double>()); };
  const bool ca = p.context_aware();
  LVector h = LVector::Zero(p.dim);
  long double loss = 0;
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    const Step& s = seq.steps[t];
    const Step& next = seq.steps[t + 1];
    check_category(p, s.category);
    const LVector l = row(p.category, s.category);
    LVector pre_z = m(p.input_update) * l + m(p.hidden_update) * h;
    LVector pre_r = m(p.input_reset) * l + m(p.hidden_reset) * h;
    LVector x = l;
    if (ca) {
      check_contexts(s.input_context, s.transition_context);
      const LVector ci = row(p.input_context, s.input_context);
      const LVector ct = row(p.transition_context, s.transition_context);
      pre_z += m(p.incontext_update) * ci + m(p.transition_update) * ct;
      pre_r += m(p.transition_reset) * ct;
      x = l.cwiseProduct(sig(m(p.input_activation) * l + m(p.hidden_activation) * h + m(p.incontext_activation) * ci));
    }
    const LVector z = sig(pre_z), r = sig(pre_r);
    const LVector cand = (m(p.input_candidate) * x + m(p.hidden_candidate) * h.cwiseProduct(r)).array().tanh().matrix();
    h = (1.0L - z.array()).matrix().cwiseProduct(h) + z.cwiseProduct(cand);

    LVector scores;
    const LMatrix cats = p.category.cast<long double>();
    if (ca) {
      check_contexts(next.input_context, next.transition_context);
      const LVector a = sig(m(p.predict_activation) * row(p.input_context, next.input_context));
      const LVector rr = sig(m(p.predict_reset) * row(p.transition_context, next.transition_context));
      scores = cats * h.cwiseProduct(rr).cwiseProduct(a);
    } else {
      scores = cats * h;
    }
    const long double mx = scores.maxCoeff();
    const long double lse = mx + std::log((scores.array() - mx).exp().sum());
    loss -= (scores(next.category) - lse) / static_cast<long double>(p.num_categories());
  }
  long double reg = 0;
  p.for_each_block([&](std::string_view, const auto& b) { reg += b.template cast<long double>().squaredNorm(); });
  return loss + 0.5L * static_cast<long double>(lambda) * reg;
}

}  // namespace detail

// Test hook for gradient verification: drop one analytic path.
enum class DemandFault { none, drop_prediction_reset };

struct SequenceGradient {
  double loss = 0;
  DemandParams grad;
};

inline SequenceGradient sequence_gradient(const DemandParams& p, const UserSequence& seq, double lambda,
                                          DemandFault fault = DemandFault::none) {
  if (seq.size() < 2) throw InvalidArgument("sequence needs at least 2 steps");
  const std::size_t n = seq.size() - 1;  // number of predictions
  const double inv_l = 1.0 / p.num_categories();
  const bool ca = p.context_aware();

  std::vector<CellCache> cells(n);
  std::vector<PredictionGates> gates(n);
  std::vector<Vector> dscores(n);
  SequenceGradient out;
  out.grad = zeros_like(p);
  DemandParams& g = out.grad;

  Vector h = Vector::Zero(p.dim);
  for (std::size_t t = 0; t < n; ++t) {
    const Step& s = seq.steps[t];
    const Step& next = seq.steps[t + 1];
    h = cell_forward(p, h, s.category, s.input_context, s.transition_context, &cells[t]);
    Vector scores = predict_category_scores(p, h, next.input_context, next.transition_context, &gates[t]);
    Vector logp = log_softmax(scores);
    out.loss -= inv_l * logp(next.category);
    Vector d = logp.array().exp().matrix();
    d(next.category) -= 1.0;
    dscores[t] = inv_l * d;
  }
  out.loss += 0.5 * lambda * detail::regularizer(p);

  Vector dh_carry = Vector::Zero(p.dim);
  for (std::size_t k = n; k-- > 0;) {
    const CellCache& c = cells[k];
    const Step& next = seq.steps[k + 1];
    const Vector& ds = dscores[k];
    Vector dh = dh_carry;

    // prediction head
    if (!ca) {
      g.category += ds * c.h.transpose();
      dh += p.category.transpose() * ds;
    } else {
      const Vector& ap = gates[k].a;
      const Vector& rp = gates[k].r;
      const Vector w = c.h.cwiseProduct(rp).cwiseProduct(ap);
      g.category += ds * w.transpose();
      const Vector dw = p.category.transpose() * ds;
      dh += dw.cwiseProduct(rp).cwiseProduct(ap);
      const Vector dpre_a = dw.cwiseProduct(c.h).cwiseProduct(rp).cwiseProduct(ap.cwiseProduct((1.0 - ap.array()).matrix()));
      const Vector ci_next = p.input_context.row(next.input_context).transpose();
      g.predict_activation += dpre_a * ci_next.transpose();
      g.input_context.row(next.input_context) += (p.predict_activation.transpose() * dpre_a).transpose();
      if (fault != DemandFault::drop_prediction_reset) {
        const Vector dpre_r =
            dw.cwiseProduct(c.h).cwiseProduct(ap).cwiseProduct(rp.cwiseProduct((1.0 - rp.array()).matrix()));
        const Vector ct_next = p.transition_context.row(next.transition_context).transpose();
        g.predict_reset += dpre_r * ct_next.transpose();
        g.transition_context.row(next.transition_context) += (p.predict_reset.transpose() * dpre_r).transpose();
      }
    }

    // cell
    const Vector one_minus_z = (1.0 - c.z.array()).matrix();
    const Vector dz = dh.cwiseProduct(c.candidate - c.h_prev);
    const Vector dcand = dh.cwiseProduct(c.z);
    Vector dh_prev = dh.cwiseProduct(one_minus_z);
    const Vector dpre_c = dcand.cwiseProduct((1.0 - c.candidate.array().square()).matrix());
    const Vector x = ca ? Vector(c.l.cwiseProduct(c.a)) : c.l;
    const Vector y = c.h_prev.cwiseProduct(c.r);
    g.input_candidate += dpre_c * x.transpose();
    g.hidden_candidate += dpre_c * y.transpose();
    const Vector dx = p.input_candidate.transpose() * dpre_c;
    const Vector dy = p.hidden_candidate.transpose() * dpre_c;
    dh_prev += dy.cwiseProduct(c.r);
    const Vector dr = dy.cwiseProduct(c.h_prev);

    Vector dl = Vector::Zero(p.dim);
    Vector dci, dct;
    if (ca) {
      dci = Vector::Zero(p.dim);
      dct = Vector::Zero(p.dim);
      const Vector ci = p.input_context.row(c.input_context).transpose();
      const Vector ct = p.transition_context.row(c.transition_context).transpose();
      dl += dx.cwiseProduct(c.a);
      const Vector dpre_a = dx.cwiseProduct(c.l).cwiseProduct(c.a.cwiseProduct((1.0 - c.a.array()).matrix()));
      g.input_activation += dpre_a * c.l.transpose();
      g.hidden_activation += dpre_a * c.h_prev.transpose();
      g.incontext_activation += dpre_a * ci.transpose();
      dl += p.input_activation.transpose() * dpre_a;
      dh_prev += p.hidden_activation.transpose() * dpre_a;
      dci += p.incontext_activation.transpose() * dpre_a;

      const Vector dpre_z = dz.cwiseProduct(c.z.cwiseProduct(one_minus_z));
      g.incontext_update += dpre_z * ci.transpose();
      g.transition_update += dpre_z * ct.transpose();
      dci += p.incontext_update.transpose() * dpre_z;
      dct += p.transition_update.transpose() * dpre_z;

      const Vector dpre_r = dr.cwiseProduct(c.r.cwiseProduct((1.0 - c.r.array()).matrix()));
      g.transition_reset += dpre_r * ct.transpose();
      dct += p.transition_reset.transpose() * dpre_r;
    } else {
      dl += dx;
    }
    const Vector dpre_z = dz.cwiseProduct(c.z.cwiseProduct(one_minus_z));
    g.input_update += dpre_z * c.l.transpose();
    g.hidden_update += dpre_z * c.h_prev.transpose();
    dl += p.input_update.transpose() * dpre_z;
    dh_prev += p.hidden_update.transpose() * dpre_z;

    const Vector dpre_r = dr.cwiseProduct(c.r.cwiseProduct((1.0 - c.r.array()).matrix()));
    g.input_reset += dpre_r * c.l.transpose();
    g.hidden_reset += dpre_r * c.h_prev.transpose();
    dl += p.input_reset.transpose() * dpre_r;
    dh_prev += p.hidden_reset.transpose() * dpre_r;

    g.category.row(c.category) += dl.transpose();
    if (ca) {
      g.input_context.row(c.input_context) += dci.transpose();
      g.transition_context.row(c.transition_context) += dct.transpose();
    }
    dh_carry = dh_prev;
  }

  if (lambda > 0) {
    auto dst = g.flat_blocks();
    auto src = p.flat_blocks();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i].second += lambda * src[i].second;
  }
  return out;
}

// params -= learning_rate * grad
inline void apply_update(DemandParams& p, const DemandParams& grad, double learning_rate) {
  auto dst = p.flat_blocks();
  auto src = grad.flat_blocks();
  for (std::size_t i = 0; i < dst.size(); ++i)
    if (src[i].second.size() == dst[i].second.size()) dst[i].second -= learning_rate * src[i].second;
}

// ---- pre-training -------------------------------------------------------------

// Copies DeepStyle's category table for use as initial category embeddings.
inline Table pretrain_init(const PrefParams& deepstyle, int dim) {
  if (deepstyle.variant != PrefVariant::deepstyle || deepstyle.category.rows() == 0)
    throw InvalidArgument("pre-training needs a DeepStyle model with a category table");
  if (deepstyle.dim != dim)
    throw InvalidArgument("dimension mismatch: DeepStyle d=" + std::to_string(deepstyle.dim) +
                          ", demand model d=" + std::to_string(dim));
  return Table(deepstyle.category);
}

// ---- training -----------------------------------------------------------------

struct DemandTrainResult {
  DemandParams params;
  std::vector<double> epoch_loss;
};

inline DemandTrainResult bptt_train(const std::vector<UserSequence>& sequences, int num_categories,
                                    const DemandTrainConfig& cfg, DemandKind kind,
                                    const Table* pretrained_categories = nullptr, const EpochLogger& log = {}) {
  cfg.validate();
  if (num_categories < 1) throw InvalidArgument("need at least one category");
  Rng rng(cfg.seed);
  DemandTrainResult out;
  out.params = init_demand(kind, cfg.dim, num_categories, cfg.matrix_init_scale, cfg.embedding_init_scale, rng);
  if (pretrained_categories) {
    if (pretrained_categories->rows() != num_categories || pretrained_categories->cols() != cfg.dim)
      throw InvalidArgument("pre-trained category table has shape " + std::to_string(pretrained_categories->rows()) +
                            "x" + std::to_string(pretrained_categories->cols()));
    out.params.category = *pretrained_categories;
  }
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < sequences.size(); ++s)
    if (sequences[s].size() >= 2) order.push_back(s);
  // Every update touches the whole parameter set; spreading lambda over the
  // epoch's updates applies the objective's lambda/2 ||theta||^2 once per epoch.
  const double lambda = order.empty() ? cfg.lambda : cfg.lambda / static_cast<double>(order.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    for (std::size_t s : order) {
      SequenceGradient sg = sequence_gradient(out.params, sequences[s], lambda);
      total += sg.loss;
      apply_update(out.params, sg.grad, cfg.learning_rate);
    }
    double mean = order.empty() ? 0.0 : total / static_cast<double>(order.size());
    out.epoch_loss.push_back(mean);
    if (log) log(epoch, mean);
  }
  return out;
}

// ---- gradient verification ------------------------------------------------------

struct DemandGradcheck {
  double max_error = 0;
  std::map<std::string, double> block_error;
};

inline DemandGradcheck gradcheck_demand(const DemandParams& params, const UserSequence& seq, double lambda,
                                        double eps = 1e-5, DemandFault fault = DemandFault::none) {
  const DemandParams analytic = sequence_gradient(params, seq, lambda, fault).grad;
  DemandParams probe = params;
  DemandGradcheck report;
  auto a = analytic.flat_blocks();
  auto x = probe.flat_blocks();
  for (std::size_t b = 0; b < x.size(); ++b) {
    double worst = 0;
    for (Eigen::Index k = 0; k < x[b].second.size(); ++k) {
      double& v = x[b].second(k);
      const double saved = v;
      v = saved + eps;
      const long double up = detail::sequence_loss_extended(probe, seq, lambda);
      v = saved - eps;
      const long double down = detail::sequence_loss_extended(probe, seq, lambda);
      v = saved;
      // the perturbation actually applied, as stored in double
      const long double step = static_cast<long double>(saved + eps) - static_cast<long double>(saved - eps);
      worst = std::max(worst, relative_error(a[b].second(k), static_cast<double>((up - down) / step)));
    }
    report.block_error[std::string(x[b].first)] = worst;
    report.max_error = std::max(report.max_error, worst);
  }
  return report;
}

}  // namespace vrec
