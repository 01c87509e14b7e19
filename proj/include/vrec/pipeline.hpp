#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "vrec/data.hpp"
#include "vrec/evaluation.hpp"
#include "vrec/features.hpp"
#include "vrec/synthgen.hpp"

namespace vrec {

// Everything downstream of ingestion: filtered rows, split, sequences, eval view.
struct Prepared {
  Dataset dataset;
  std::optional<FeatureStore> features;
  std::vector<Interaction> filtered;
  DatasetSplit split;
  std::vector<UserSequence> train_sequences;
  EvalData eval;

  const FeatureStore* feature_ptr() const { return features ? &*features : nullptr; }
  int num_users() const { return dataset.users.size(); }
  int num_items() const { return dataset.catalog.num_items(); }
  int num_categories() const { return dataset.catalog.num_categories(); }
};

inline Prepared prepare(Dataset ds, std::optional<FeatureStore> features = std::nullopt, double train_fraction = 0.8) {
  Prepared p;
  p.filtered = filter_users(ds.interactions);
  p.split = chronological_split(p.filtered, ds.catalog.num_items(), train_fraction);
  p.train_sequences = build_sequences(p.split.train);
  p.eval = prepare_eval(p.split, ds.catalog);
  p.dataset = std::move(ds);
  p.features = std::move(features);
  return p;
}

inline Dataset dataset_from_text(const std::string& text) {
  std::istringstream in(text);
  Dataset ds;
  load_interactions(in, ds);
  return ds;
}

inline Prepared prepare_synthetic(const SynthData& data) {
  Dataset ds = dataset_from_text(data.interactions);
  FeatureStore fs = align_features(ds.catalog, data.manifest, data.features);
  return prepare(std::move(ds), std::move(fs));
}

// ---- synthetic data on disk ------------------------------------------------

struct SynthPaths {
  std::string interactions, features, manifest, truth;

  static SynthPaths in(const std::filesystem::path& dir) {
    return {(dir / "interactions.csv").string(), (dir / "features.vfsr").string(), (dir / "items.txt").string(),
            (dir / "truth.json").string()};
  }
};

inline nlohmann::json table_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    std::vector<double> row(t.row(r).data(), t.row(r).data() + t.cols());
    rows.push_back(row);
  }
  return rows;
}

inline Table table_from_json(const nlohmann::json& j) {
  Table t(static_cast<Eigen::Index>(j.size()), j.empty() ? 0 : static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r)
    for (std::size_t c = 0; c < j[r].size(); ++c) t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
  return t;
}

inline nlohmann::json truth_json(const GroundTruth& gt) {
  nlohmann::json j;
  j["item_names"] = gt.item_names;
  j["item_category"] = gt.item_category;
  j["item_style_cluster"] = gt.item_style_cluster;
  j["item_style"] = table_json(gt.item_style);
  j["category_prototype"] = table_json(gt.category_prototype);
  j["user_names"] = gt.user_names;
  j["user_preference"] = table_json(gt.user_preference);
  j["user_category_logits"] = table_json(gt.user_category_logits);
  j["input_context_logits"] = table_json(gt.input_context_logits);
  j["transition_context_logits"] = table_json(gt.transition_context_logits);
  return j;
}

inline GroundTruth truth_from_json(const nlohmann::json& j) {
  GroundTruth gt;
  gt.item_names = j.at("item_names").get<std::vector<std::string>>();
  gt.item_category = j.at("item_category").get<std::vector<int>>();
  gt.item_style_cluster = j.at("item_style_cluster").get<std::vector<int>>();
  gt.item_style = table_from_json(j.at("item_style"));
  gt.category_prototype = table_from_json(j.at("category_prototype"));
  gt.user_names = j.at("user_names").get<std::vector<std::string>>();
  gt.user_preference = table_from_json(j.at("user_preference"));
  gt.user_category_logits = table_from_json(j.at("user_category_logits"));
  gt.input_context_logits = table_from_json(j.at("input_context_logits"));
  gt.transition_context_logits = table_from_json(j.at("transition_context_logits"));
  return gt;
}

inline void write_synthetic(const SynthData& data, const SynthPaths& paths) {
  {
    std::ofstream out(paths.interactions);
    if (!out) throw Error("cannot write '" + paths.interactions + "'");
    out << data.interactions;
  }
  {
    std::ofstream out(paths.features, std::ios::binary);
    if (!out) throw Error("cannot write '" + paths.features + "'");
    write_vfsr(out, data.features);
  }
  {
    std::ofstream out(paths.manifest);
    for (const auto& id : data.manifest) out << id << '\n';
  }
  {
    std::ofstream out(paths.truth);
    out << truth_json(data.truth).dump() << '\n';
  }
}

inline GroundTruth read_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ground truth '" + path + "'");
  return truth_from_json(nlohmann::json::parse(in));
}

}  // namespace vrec
