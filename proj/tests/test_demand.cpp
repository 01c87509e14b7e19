#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "vrec/vrec.hpp"

namespace vrec {
namespace {

// Deterministic parameters reproducible outside C++: matrix block b (in the
// order below) has entry (r, c) = 0.5 sin(1 + b + 2r + 3c); table rows use
// 0.3 cos(r + 2c + offset).
DemandParams formula_params(DemandKind kind, int dim = 2, int cats = 3) {
  Rng rng(0);
  DemandParams p = init_demand(kind, dim, cats, 0.0, 0.0, rng);
  const std::vector<std::string> names = {
      "input_update",      "input_activation",     "input_reset",       "input_candidate",  "hidden_update",
      "hidden_activation", "hidden_reset",         "hidden_candidate",  "incontext_update", "incontext_activation",
      "transition_update", "transition_reset",     "predict_activation", "predict_reset"};
  p.for_each_block([&](std::string_view name, auto& m) {
    const auto it = std::find(names.begin(), names.end(), name);
    double offset = 0;
    if (it != names.end()) {
      const auto b = static_cast<double>(it - names.begin());
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = 0.5 * std::sin(1 + b + 2.0 * r + 3.0 * c);
      return;
    }
    offset = name == "category" ? 0.0 : name == "input_context" ? 1.0 : 2.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = 0.3 * std::cos(static_cast<double>(r) + 2.0 * c + offset);
  });
  return p;
}

UserSequence formula_sequence() {
  UserSequence seq;
  for (auto [c, ic, tc] : std::vector<std::tuple<int, int, int>>{{2, 17, 10}, {0, 40, 3}, {1, 83, 0}, {2, 5, 9}}) {
    Step s;
    s.category = c;
    s.item = c;
    s.input_context = ic;
    s.transition_context = tc;
    seq.steps.push_back(s);
  }
  return seq;
}

// Expected values computed independently (numpy) before freezing.
TEST(FrozenDemand, GruStatesAndLoss) {
  const DemandParams p = formula_params(DemandKind::gru);
  const UserSequence seq = formula_sequence();
  const Vector h1 = replay(p, seq, 1), h3 = replay(p, seq, 3);
  EXPECT_NEAR(h1(0), -0.00867926778035128, 1e-14);
  EXPECT_NEAR(h1(1), -0.011587227287905687, 1e-14);
  EXPECT_NEAR(h3(0), -0.13281840693530192, 1e-14);
  EXPECT_NEAR(h3(1), -0.05802839837674868, 1e-14);
  EXPECT_NEAR(sequence_loss(p, seq, 0.0), 1.0895272739861286, 1e-13);
}

TEST(FrozenDemand, CaGruStatesAndLoss) {
  const DemandParams p = formula_params(DemandKind::cagru);
  const UserSequence seq = formula_sequence();
  const Vector h1 = replay(p, seq, 1), h3 = replay(p, seq, 3);
  EXPECT_NEAR(h1(0), -0.003841143167674083, 1e-14);
  EXPECT_NEAR(h1(1), -0.005643528465344414, 1e-14);
  EXPECT_NEAR(h3(0), -0.06802504772541526, 1e-14);
  EXPECT_NEAR(h3(1), -0.030264322552944013, 1e-14);
  EXPECT_NEAR(sequence_loss(p, seq, 0.0), 1.0974547385616082, 1e-13);
}

DemandParams zero_params(DemandKind kind, int dim = 3, int cats = 4) {
  Rng rng(0);
  return init_demand(kind, dim, cats, 0.0, 0.0, rng);
}

TEST(GruForward, ZeroWeightsHalveTheState) {
  for (auto kind : {DemandKind::gru, DemandKind::cagru}) {
    const DemandParams p = zero_params(kind);
    const Vector h(Vector::LinSpaced(3, -0.6, 0.8));
    const Vector next = cell_forward(p, h, 1, 5, 2);
    for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(next(k), 0.5 * h(k));
    EXPECT_TRUE(cell_forward(p, Vector::Zero(3), 1, 5, 2).isZero(0.0));
  }
}

TEST(GruForward, KindChecked) {
  EXPECT_THROW(gru_forward(zero_params(DemandKind::cagru), Vector::Zero(3), 0), InvalidArgument);
  EXPECT_THROW(cagru_forward(zero_params(DemandKind::gru), Vector::Zero(3), 0, 0, 0), InvalidArgument);
}

// Elementwise recomputation of one cell step, written without matrix helpers.
Vector scalar_cell(const DemandParams& p, const Vector& h, int cat, int ic, int tc) {
  const int d = p.dim;
  const bool ca = p.context_aware();
  auto mv = [&](const Matrix& m, const Vector& x, int r) {
    double s = 0;
    for (int c = 0; c < d; ++c) s += m(r, c) * x(c);
    return s;
  };
  auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  const Vector l = p.category.row(cat).transpose();
  Vector ci, ct;
  if (ca) {
    ci = p.input_context.row(ic).transpose();
    ct = p.transition_context.row(tc).transpose();
  }
  Vector z(d), r(d), x(d), out(d);
  for (int k = 0; k < d; ++k) {
    double pz = mv(p.input_update, l, k) + mv(p.hidden_update, h, k);
    double pr = mv(p.input_reset, l, k) + mv(p.hidden_reset, h, k);
    x(k) = l(k);
    if (ca) {
      pz += mv(p.incontext_update, ci, k) + mv(p.transition_update, ct, k);
      pr += mv(p.transition_reset, ct, k);
      x(k) = l(k) * sig(mv(p.input_activation, l, k) + mv(p.hidden_activation, h, k) + mv(p.incontext_activation, ci, k));
    }
    z(k) = sig(pz);
    r(k) = sig(pr);
  }
  const Vector hr = h.cwiseProduct(r);
  for (int k = 0; k < d; ++k) {
    const double cand = std::tanh(mv(p.input_candidate, x, k) + mv(p.hidden_candidate, hr, k));
    out(k) = (1 - z(k)) * h(k) + z(k) * cand;
  }
  return out;
}

TEST(CellForward, MatchesScalarOracle) {
  for (auto kind : {DemandKind::gru, DemandKind::cagru}) {
    Rng rng(41);
    const DemandParams p = init_demand(kind, 3, 4, 0.8, 0.8, rng);
    Vector h = Vector::Zero(3);
    const UserSequence seq = testing::random_sequence(rng, 4, 6);
    for (const auto& s : seq.steps) {
      const Vector expected = scalar_cell(p, h, s.category, s.input_context, s.transition_context);
      h = cell_forward(p, h, s.category, s.input_context, s.transition_context);
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(h(k), expected(k), 1e-14);
    }
  }
}

TEST(CellForward, ZeroContextsReduceToActivationGatedGru) {
  Rng rng(8);
  DemandParams ca = init_demand(DemandKind::cagru, 3, 4, 0.7, 0.7, rng);
  ca.incontext_update.setZero();
  ca.incontext_activation.setZero();
  ca.transition_update.setZero();
  ca.transition_reset.setZero();
  ca.input_context.setZero();
  ca.transition_context.setZero();
  DemandParams gru = ca;
  gru.kind = DemandKind::gru;
  const Vector h = Vector::LinSpaced(3, -0.5, 0.5);
  const int c = 2;
  // The candidate reads l * sigma(W_a l + M_a h); with W_a = M_a = 0 that is
  // l / 2, which a GRU reproduces when its candidate input weights are halved.
  const Vector with_gate = cell_forward(ca, h, c, 50, 7);
  EXPECT_FALSE(with_gate.isApprox(cell_forward(gru, h, c, 0, 0), 1e-6));
  ca.input_activation.setZero();
  ca.hidden_activation.setZero();
  gru.input_candidate *= 0.5;
  EXPECT_TRUE(cell_forward(ca, h, c, 50, 7).isApprox(cell_forward(gru, h, c, 0, 0), 1e-14));
}

TEST(CellForward, RejectsOutOfRangeIds) {
  const DemandParams p = zero_params(DemandKind::cagru);
  EXPECT_THROW(cell_forward(p, Vector::Zero(3), 4, 0, 0), InvalidArgument);
  EXPECT_THROW(cell_forward(p, Vector::Zero(3), 0, 84, 0), InvalidArgument);
  EXPECT_THROW(cell_forward(p, Vector::Zero(3), 0, 0, 11), InvalidArgument);
}

TEST(PredictScores, ZeroStateGivesZeroScores) {
  Rng rng(2);
  for (auto kind : {DemandKind::gru, DemandKind::cagru}) {
    const DemandParams p = init_demand(kind, 3, 5, 0.5, 0.5, rng);
    EXPECT_TRUE(predict_category_scores(p, Vector::Zero(3), 3, 4).isZero(0.0));
  }
}

TEST(PredictScores, EqualEmbeddingsGiveEqualScores) {
  Rng rng(2);
  DemandParams p = init_demand(DemandKind::cagru, 3, 5, 0.5, 0.5, rng);
  for (int j = 1; j < 5; ++j) p.category.row(j) = p.category.row(0);
  const Vector s = predict_category_scores(p, Vector::LinSpaced(3, 0.1, 0.3), 3, 4);
  for (int j = 1; j < 5; ++j) EXPECT_EQ(s(j), s(0));
}

TEST(PredictScores, MatchesDotProductOracle) {
  Rng rng(6);
  const DemandParams p = init_demand(DemandKind::cagru, 3, 5, 0.5, 0.5, rng);
  const Vector h = Vector::LinSpaced(3, -0.4, 0.7);
  const int ic = 30, tc = 6;
  const Vector s = predict_category_scores(p, h, ic, tc);
  for (int j = 0; j < 5; ++j) {
    double acc = 0;
    for (int k = 0; k < 3; ++k) {
      double pa = 0, pr = 0;
      for (int c = 0; c < 3; ++c) {
        pa += p.predict_activation(k, c) * p.input_context(ic, c);
        pr += p.predict_reset(k, c) * p.transition_context(tc, c);
      }
      acc += h(k) / (1 + std::exp(-pr)) * p.category(j, k) / (1 + std::exp(-pa));
    }
    EXPECT_NEAR(s(j), acc, 1e-14);
  }
  DemandParams g = init_demand(DemandKind::gru, 3, 5, 0.5, 0.5, rng);
  const Vector sg = predict_category_scores(g, h, 0, 0);
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(sg(j), g.category.row(j).dot(h.transpose()), 1e-14);
}

TEST(Softmax, Examples) {
  const Vector u = category_probabilities(Vector::Constant(7, 1.3));
  for (int j = 0; j < 7; ++j) EXPECT_NEAR(u(j), 1.0 / 7, 1e-15);
  for (int n : {2, 10, 100}) {
    Vector s = Vector::Zero(n);
    s(n / 2) = 20;
    EXPECT_GT(category_probabilities(s)(n / 2), 0.999);
  }
  const Vector s = Vector::LinSpaced(5, -2, 3);
  EXPECT_TRUE(category_probabilities(s).isApprox(category_probabilities((s.array() + 1000).matrix()), 1e-14));
}

TEST(SequenceLoss, UniformPredictorGivesLnLOverL) {
  DemandParams p = zero_params(DemandKind::cagru, 3, 6);
  p.category.setOnes();  // zero weights keep h = 0, so every score is 0
  UserSequence seq = formula_sequence();
  for (auto& s : seq.steps) s.category %= 6;
  const double per_step = std::log(6.0) / 6.0;
  EXPECT_NEAR(sequence_loss(p, seq, 0.0), 3 * per_step, 1e-14);
}

TEST(SequenceLoss, PerfectPredictorLimit) {
  // GRU with h fixed near a unit direction and one category embedding far along it
  DemandParams p = zero_params(DemandKind::gru, 1, 2);
  p.input_update.setConstant(50);  // z = 1
  p.input_candidate.setConstant(50);  // candidate = tanh(50 * l) = 1 for l > 0
  UserSequence seq;
  for (int t = 0; t < 3; ++t) seq.steps.push_back({0, 0, 0, t == 0 ? kSequenceStartBin : 0, 0});
  p.category << 40, -40;
  EXPECT_LT(sequence_loss(p, seq, 0.0), 1e-30);
}

TEST(SequenceLoss, MatchesIndependentForwardOracle) {
  Rng rng(12);
  const DemandParams p = init_demand(DemandKind::cagru, 3, 4, 0.6, 0.6, rng);
  const UserSequence seq = testing::random_sequence(rng, 4, 7);
  double expected = 0;
  Vector h = Vector::Zero(3);
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    const Step& s = seq.steps[t];
    h = scalar_cell(p, h, s.category, s.input_context, s.transition_context);
    const Step& n = seq.steps[t + 1];
    const Vector sc = predict_category_scores(p, h, n.input_context, n.transition_context);
    double z = 0;
    for (int j = 0; j < 4; ++j) z += std::exp(sc(j));
    expected -= std::log(std::exp(sc(n.category)) / z) / 4;
  }
  double reg = 0;
  p.for_each_block([&](std::string_view, const auto& m) { reg += m.squaredNorm(); });
  EXPECT_NEAR(sequence_loss(p, seq, 0.02), expected + 0.01 * reg, 1e-12);
}

TEST(DemandTraining, ZeroEpochsGiveInitialisation) {
  Rng data_rng(3);
  std::vector<UserSequence> seqs = {testing::random_sequence(data_rng, 4, 5)};
  DemandTrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 99;
  const auto r = bptt_train(seqs, 4, cfg, DemandKind::cagru);
  Rng rng(cfg.seed);
  EXPECT_TRUE(r.params == init_demand(DemandKind::cagru, cfg.dim, 4, cfg.matrix_init_scale,
                                      cfg.embedding_init_scale, rng));
}

TEST(DemandTraining, FixedSeedIsIdentical) {
  Rng data_rng(3);
  std::vector<UserSequence> seqs;
  for (int u = 0; u < 5; ++u) seqs.push_back(testing::random_sequence(data_rng, 4, 8, u));
  DemandTrainConfig cfg;
  cfg.epochs = 3;
  const auto a = bptt_train(seqs, 4, cfg, DemandKind::cagru);
  const auto b = bptt_train(seqs, 4, cfg, DemandKind::cagru);
  EXPECT_TRUE(a.params == b.params);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
}

TEST(DemandTraining, LossNonIncreasingOnContextDrivenSequences) {
  SynthConfig sc;
  sc.num_users = 60;
  sc.num_categories = 8;
  sc.items_per_category = 4;
  sc.feature_dim = 12;
  sc.style_dim = 4;
  const Prepared data = prepare_synthetic(generate(sc));
  DemandTrainConfig cfg;
  cfg.epochs = 5;
  for (auto kind : {DemandKind::gru, DemandKind::cagru}) {
    const auto r = bptt_train(data.train_sequences, data.num_categories(), cfg, kind);
    for (std::size_t e = 1; e < r.epoch_loss.size(); ++e)
      EXPECT_LE(r.epoch_loss[e], r.epoch_loss[e - 1]) << to_string(kind) << " epoch " << e;
  }
}

TEST(Pretrain, DimensionMismatchThrows) {
  Rng rng(1);
  const PrefParams ds = init_preference(PrefVariant::deepstyle, 10, 2, 4, 3, 5, 0.1, rng);
  EXPECT_THROW(pretrain_init(ds, 12), InvalidArgument);
  const PrefParams vb = init_preference(PrefVariant::vbpr, 10, 2, 4, 3, 5, 0.1, rng);
  EXPECT_THROW(pretrain_init(vb, 10), InvalidArgument);
}

TEST(Pretrain, CopiesExactlyAndDeeply) {
  Rng rng(1);
  PrefParams ds = init_preference(PrefVariant::deepstyle, 4, 2, 6, 3, 5, 0.1, rng);
  const Table copy = pretrain_init(ds, 4);
  EXPECT_EQ(copy, ds.category);
  std::vector<UserSequence> seqs = {testing::random_sequence(rng, 3, 5)};
  DemandTrainConfig cfg;
  cfg.dim = 4;
  cfg.epochs = 0;
  const auto r = bptt_train(seqs, 3, cfg, DemandKind::cagru, &copy);
  const Table before = r.params.category;
  ds.category.setConstant(7.0);
  EXPECT_EQ(r.params.category, before);
  EXPECT_EQ(r.params.category, copy);
}

TEST(DemandGradcheckTest, CorrectImplementationPasses) {
  for (double lambda : {0.0, 0.01})
    for (auto kind : {DemandKind::gru, DemandKind::cagru}) {
      const auto dc = random_demand_case(3, kind);
      EXPECT_LT(gradcheck_demand(dc.params, dc.sequence, lambda).max_error, 1e-4) << to_string(kind);
    }
}

TEST(DemandGradcheckTest, DroppedPredictionResetPathIsDetected) {
  const auto dc = random_demand_case(3);
  const auto report = gradcheck_demand(dc.params, dc.sequence, 0.01, 1e-5, DemandFault::drop_prediction_reset);
  ASSERT_TRUE(report.block_error.count("predict_reset"));
  EXPECT_GT(report.block_error.at("predict_reset"), 1e-2);
}

}  // namespace
}  // namespace vrec
