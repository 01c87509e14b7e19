// Generate planted data, train DeepStyle and CA-GRU, evaluate, and rank a user's next items.
#include <cstdio>

#include "vrec/vrec.hpp"

int main() {
  using namespace vrec;
  SynthConfig sc;
  sc.max_length = 60;
  const Prepared data = prepare_synthetic(generate(sc));
  std::printf("users %d, items %d, categories %d\n", data.num_users(), data.num_items(), data.num_categories());

  PrefTrainConfig pc;
  pc.epochs = 30;
  pc.lambda = 0.003;
  const auto style = train_preference(data.split, data.feature_ptr(), data.dataset.catalog, data.num_users(), pc,
                                      PrefVariant::deepstyle);
  const EvalReport alone = evaluate_preference(style.params, data.feature_ptr(), data.dataset.catalog, data.eval);
  std::printf("DeepStyle AUC warm %.4f cold %.4f\n", alone.warm.auc, alone.cold.auc);

  DemandTrainConfig dc;
  dc.learning_rate = 0.3;
  dc.epochs = 60;
  dc.embedding_init_scale = 0.3;
  Table pre = pretrain_init(style.params, dc.dim);  // category embeddings shared with DeepStyle
  const auto demand = bptt_train(data.train_sequences, data.num_categories(), dc, DemandKind::cagru, &pre);
  std::printf("CA-GRU category AUC %.4f\n", demand_auc(demand.params, data.eval).auc);

  const int k = 3;
  const EvalReport agg = evaluate_aggregated(style.params, data.feature_ptr(), demand.params, data.dataset.catalog,
                                             data.eval, k);
  std::printf("aggregated (k=%d) AUC warm %.4f cold %.4f\n", k, agg.warm.auc, agg.cold.auc);

  // next items for the first user, one day after their last training interaction
  const UserSequence& history = data.train_sequences.front();
  const Table vecs = item_vectors(style.params, data.feature_ptr(), data.dataset.catalog);
  const auto ranked = rank_next(style.params, vecs, demand.params, data.dataset.catalog, history,
                                history.steps.back().timestamp + 86400, k);
  std::printf("top items for %s:", data.dataset.users.name(history.user).c_str());
  for (std::size_t r = 0; r < 5 && r < ranked.size(); ++r)
    std::printf(" %s", data.dataset.catalog.items.name(ranked[r].item).c_str());
  std::printf("\n");
}
