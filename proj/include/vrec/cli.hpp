#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vrec/checkpoint.hpp"
#include "vrec/gradcheck.hpp"
#include "vrec/kmeans.hpp"
#include "vrec/pipeline.hpp"
#include "vrec/ranker.hpp"

namespace vrec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitCheck = 3;

// Missing or contradictory command-line input.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every tunable, resolved from defaults, the config file and flags.
struct Options {
  // paths
  std::string interactions, features, manifest, out, checkpoint, demand, pretrain, report;
  // preference model (shared d, seed, epochs with the demand model)
  int dim = 10;
  double learning_rate = 0.01;
  double lambda = 0.01;
  int epochs = 20;
  std::uint64_t seed = 1;
  double init_scale = 0.01;
  // demand model
  double matrix_init = 0.1;
  double embedding_init = 0.01;
  // evaluation and ranking
  int k = 3;
  int threads = 1;
  double train_fraction = 0.8;
  std::string user;
  int top = 10;
  std::int64_t time = -1;
  bool include_seen = false;
  // export-styles
  int clusters = 8;
  int kmeans_iterations = 100;
  // gradcheck
  int preference_instances = 100;
  int demand_instances = 50;
  double eps = 1e-5;
  double tolerance = 1e-4;
  std::string fault = "none";
  // subcommand arguments
  std::string model;
  SynthConfig synth;
};

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// "config.<name>=<value>" for every option except help and the config file itself.
inline std::vector<std::string> config_lines(const CLI::App& app, const CLI::App* sub) {
  std::vector<std::string> lines;
  auto emit = [&](const CLI::App& a, const std::string& prefix) {
    for (const CLI::Option* opt : a.get_options()) {
      const std::string name = opt->get_lnames().empty() ? opt->get_name(true) : opt->get_lnames().front();
      if (name == "help" || name == "config") continue;
      std::string value;
      if (opt->count() > 0) {
        for (const auto& r : opt->results()) value += (value.empty() ? "" : " ") + r;
      } else {
        value = opt->get_default_str();
      }
      if (opt->get_expected_max() == 0) value = opt->count() ? "true" : "false";
      lines.push_back("config." + prefix + name + "=" + value);
    }
  };
  emit(app, "");
  if (sub) emit(*sub, sub->get_name() + ".");
  return lines;
}

class Report {
 public:
  Report(std::ostream& out, std::vector<std::string> config, std::string command)
      : out_(out), config_(std::move(config)), command_(std::move(command)) {}

  template <typename T>
  void add(const std::string& key, const T& value) {
    std::ostringstream os;
    if constexpr (std::is_floating_point_v<T>)
      os << format_double(static_cast<double>(value));
    else
      os << value;
    lines_.push_back(key + "=" + os.str());
  }

  std::string text() const {
    std::ostringstream os;
    os << "command=" << command_ << '\n';
    for (const auto& l : config_) os << l << '\n';
    for (const auto& l : lines_) os << l << '\n';
    return os.str();
  }

  // Stdout unless stdout already carries row output, and the report file when requested.
  void emit(const std::string& path) const {
    if (!rows_on_stdout) out_ << text();
    if (!path.empty()) {
      std::ofstream f(path);
      if (!f) throw Error("cannot write report '" + path + "'");
      f << text();
    }
  }

  // Config echo as comment lines for CSV-style outputs.
  bool rows_on_stdout = false;

  std::string comment_header() const {
    std::ostringstream os;
    os << "# command=" << command_ << '\n';
    for (const auto& l : config_) os << "# " << l << '\n';
    return os.str();
  }

 private:
  std::ostream& out_;
  std::vector<std::string> config_;
  std::vector<std::string> lines_;
  std::string command_;
};

inline void require(const std::string& value, const std::string& flag, const std::string& why) {
  if (value.empty()) throw UsageError(flag + " is required " + why);
}

inline PrefTrainConfig preference_config(const Options& o) {
  PrefTrainConfig c;
  c.dim = o.dim;
  c.learning_rate = o.learning_rate;
  c.lambda = o.lambda;
  c.epochs = o.epochs;
  c.seed = o.seed;
  c.init_scale = o.init_scale;
  return c;
}

inline DemandTrainConfig demand_config(const Options& o) {
  DemandTrainConfig c;
  c.dim = o.dim;
  c.learning_rate = o.learning_rate;
  c.lambda = o.lambda;
  c.epochs = o.epochs;
  c.seed = o.seed;
  c.matrix_init_scale = o.matrix_init;
  c.embedding_init_scale = o.embedding_init;
  c.pretrain = !o.pretrain.empty();
  return c;
}

// Interactions plus, when given, the aligned feature store.
inline Prepared load_prepared(const Options& o, bool need_features) {
  require(o.interactions, "--interactions", "for this command");
  if (need_features) require(o.features, "--features", "for visual models");
  if (!o.features.empty()) require(o.manifest, "--manifest", "together with --features");
  Dataset ds = read_dataset(o.interactions);
  std::optional<FeatureStore> fs;
  if (!o.features.empty()) fs = load_features(ds.catalog, o.features, o.manifest);
  return prepare(std::move(ds), std::move(fs), o.train_fraction);
}

inline Checkpoint load_checked(const std::string& path, const Dataset& ds) {
  Checkpoint ck = load_checkpoint(path);
  validate_checkpoint(ck, ds);
  return ck;
}

inline const PrefParams& preference_of(const Checkpoint& ck, const std::string& flag) {
  if (!is_preference(ck.tag)) throw UsageError(flag + " must be a preference checkpoint, got " + to_string(ck.tag));
  return std::get<PrefParams>(ck.model);
}

inline const DemandParams& demand_of(const Checkpoint& ck, const std::string& flag) {
  if (is_preference(ck.tag)) throw UsageError(flag + " must be a demand checkpoint, got " + to_string(ck.tag));
  return std::get<DemandParams>(ck.model);
}

inline void add_auc(Report& r, const std::string& prefix, const AucResult& a) {
  r.add(prefix + ".auc", a.auc);
  r.add(prefix + ".users", a.users);
  r.add(prefix + ".skipped_users", a.skipped);
  r.add(prefix + ".pairs", a.pairs);
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
}

// ---- commands ----------------------------------------------------------------

inline int cmd_ingest(const Options& o, Report& r) {
  require(o.interactions, "--interactions", "for ingest");
  Dataset ds = read_dataset(o.interactions);
  r.add("raw.interactions", ds.interactions.size());
  r.add("raw.users", ds.users.size());
  r.add("items", ds.catalog.num_items());
  r.add("categories", ds.catalog.num_categories());
  const auto kept = filter_users(ds.interactions);
  std::vector<char> active(static_cast<std::size_t>(ds.users.size()), 0);
  for (const auto& x : kept) active[static_cast<std::size_t>(x.user)] = 1;
  r.add("filtered.interactions", kept.size());
  r.add("filtered.users", std::count(active.begin(), active.end(), 1));
  const DatasetSplit split = chronological_split(kept, ds.catalog.num_items(), o.train_fraction);
  r.add("split.train", split.train.size());
  r.add("split.test", split.test.size());
  r.add("cold_items", std::count(split.is_cold.begin(), split.is_cold.end(), 1));
  if (!o.features.empty()) {
    require(o.manifest, "--manifest", "together with --features");
    const FeatureStore fs = load_features(ds.catalog, o.features, o.manifest);
    r.add("feature_dim", fs.rows.cols());
  }
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw Error("cannot write '" + o.out + "'");
    write_interactions(f, ds, kept);
    r.add("written", o.out);
  }
  return kExitOk;
}

inline int cmd_synth(const Options& o, Report& r) {
  require(o.out, "--out", "(output directory)");
  const SynthData data = generate(o.synth);
  std::filesystem::create_directories(o.out);
  const SynthPaths paths = SynthPaths::in(o.out);
  write_synthetic(data, paths);
  r.add("items", data.manifest.size());
  r.add("interactions", std::count(data.interactions.begin(), data.interactions.end(), '\n'));
  r.add("interactions_path", paths.interactions);
  r.add("features_path", paths.features);
  r.add("manifest_path", paths.manifest);
  r.add("truth_path", paths.truth);
  return kExitOk;
}

inline int cmd_train(const Options& o, Report& r, std::ostream& out) {
  require(o.out, "--out", "(checkpoint path)");
  const bool is_demand = o.model == "gru" || o.model == "cagru";
  if (!o.pretrain.empty() && o.model != "cagru") throw UsageError("--pretrain applies to cagru only");
  const bool visual = o.model == "vbpr" || o.model == "deepstyle";
  const Prepared p = load_prepared(o, visual);
  auto log = [&](int epoch, double loss) { out << "epoch=" << epoch << " loss=" << format_double(loss) << '\n'; };
  Checkpoint ck;
  double final_loss = 0;
  if (is_demand) {
    const DemandTrainConfig cfg = demand_config(o);
    std::optional<Table> pre;
    if (!o.pretrain.empty()) {
      const Checkpoint ds = load_checked(o.pretrain, p.dataset);
      pre = pretrain_init(preference_of(ds, "--pretrain"), cfg.dim);
    }
    const auto kind = o.model == "gru" ? DemandKind::gru : DemandKind::cagru;
    auto res = bptt_train(p.train_sequences, p.num_categories(), cfg, kind, pre ? &*pre : nullptr, log);
    final_loss = res.epoch_loss.empty() ? 0.0 : res.epoch_loss.back();
    ck = make_checkpoint(p.dataset, std::move(res.params));
  } else {
    const PrefVariant v = o.model == "bpr" ? PrefVariant::bpr : o.model == "vbpr" ? PrefVariant::vbpr : PrefVariant::deepstyle;
    auto res = train_preference(p.split, p.feature_ptr(), p.dataset.catalog, p.num_users(), preference_config(o), v, log);
    final_loss = res.epoch_loss.empty() ? 0.0 : res.epoch_loss.back();
    ck = make_checkpoint(p.dataset, std::move(res.params));
  }
  save_checkpoint(o.out, ck);
  r.add("model", o.model);
  r.add("train_interactions", p.split.train.size());
  r.add("final_loss", final_loss);
  r.add("checkpoint", o.out);
  return kExitOk;
}

inline int cmd_evaluate(const Options& o, Report& r) {
  require(o.checkpoint, "--checkpoint", "for evaluate");
  const Checkpoint head = load_checkpoint(o.checkpoint);
  const bool visual = head.tag == ModelTag::vbpr || head.tag == ModelTag::deepstyle;
  const Prepared p = load_prepared(o, visual);
  validate_checkpoint(head, p.dataset);
  r.add("model", to_string(head.tag));
  r.add("test_interactions", p.split.test.size());
  if (!is_preference(head.tag)) {
    if (!o.demand.empty()) throw UsageError("--demand pairs with a preference checkpoint");
    const auto d = demand_auc(demand_of(head, "--checkpoint"), p.eval, o.threads);
    r.add("demand.auc", d.auc);
    r.add("demand.users", d.users);
    r.add("demand.steps", d.steps);
    return kExitOk;
  }
  const PrefParams& pref = preference_of(head, "--checkpoint");
  const EvalReport alone = evaluate_preference(pref, p.feature_ptr(), p.dataset.catalog, p.eval, o.threads);
  add_auc(r, "warm", alone.warm);
  add_auc(r, "cold", alone.cold);
  if (!o.demand.empty()) {
    if (pref.variant != PrefVariant::deepstyle) throw UsageError("aggregation needs a deepstyle checkpoint");
    if (o.k < 1) throw UsageError("--k must be >= 1");
    const Checkpoint dk = load_checked(o.demand, p.dataset);
    const DemandParams& dem = demand_of(dk, "--demand");
    const EvalReport agg = evaluate_aggregated(pref, p.feature_ptr(), dem, p.dataset.catalog, p.eval, o.k, o.threads);
    r.add("aggregated.demand_model", to_string(dk.tag));
    add_auc(r, "aggregated.warm", agg.warm);
    add_auc(r, "aggregated.cold", agg.cold);
    r.add("demand.auc", demand_auc(dem, p.eval, o.threads).auc);
  }
  return kExitOk;
}

inline int cmd_recommend(const Options& o, Report& r, std::ostream& out) {
  require(o.checkpoint, "--checkpoint", "for recommend");
  if (o.top < 1) throw UsageError("--top must be >= 1");
  if (o.k < 1) throw UsageError("--k must be >= 1");
  const Checkpoint head = load_checkpoint(o.checkpoint);
  const bool visual = head.tag == ModelTag::vbpr || head.tag == ModelTag::deepstyle;
  const Prepared p = load_prepared(o, visual);
  validate_checkpoint(head, p.dataset);
  const PrefParams& pref = preference_of(head, "--checkpoint");
  std::optional<Checkpoint> dk;
  if (!o.demand.empty()) {
    dk = load_checked(o.demand, p.dataset);
    demand_of(*dk, "--demand");
  }
  const Catalog& catalog = p.dataset.catalog;
  const Table vecs = item_vectors(pref, p.feature_ptr(), catalog);

  // Full known history per user, not only the filtered part.
  std::vector<UserSequence> history(static_cast<std::size_t>(p.num_users()));
  for (int u = 0; u < p.num_users(); ++u) history[static_cast<std::size_t>(u)].user = u;
  for (auto& seq : build_sequences(p.dataset.interactions)) history[static_cast<std::size_t>(seq.user)] = std::move(seq);

  std::vector<int> users;
  if (!o.user.empty()) {
    const auto u = p.dataset.users.find(o.user);
    if (!u) throw DataError("unknown user '" + o.user + "'");
    users.push_back(*u);
  } else {
    for (int u = 0; u < p.num_users(); ++u) users.push_back(u);
  }

  std::ostringstream rows;
  rows << r.comment_header() << "user,rank,item,category,in_top_k,score\n";
  for (int u : users) {
    const UserSequence& h = history[static_cast<std::size_t>(u)];
    std::vector<RankedItem> ranked;
    if (dk) {
      const std::int64_t t = o.time >= 0 ? o.time : (h.steps.empty() ? 0 : h.steps.back().timestamp + kSecondsPerDay);
      ranked = rank_next(pref, vecs, std::get<DemandParams>(dk->model), catalog, h, t, o.k);
    } else {
      const Vector uniform = Vector::Ones(catalog.num_categories());
      ranked = aggregate_rank(user_scores(pref, vecs, u), uniform, catalog, catalog.num_categories());
    }
    std::vector<char> seen(static_cast<std::size_t>(catalog.num_items()), 0);
    if (!o.include_seen)
      for (const auto& s : h.steps) seen[static_cast<std::size_t>(s.item)] = 1;
    int rank = 0;
    for (const auto& it : ranked) {
      if (seen[static_cast<std::size_t>(it.item)]) continue;
      if (++rank > o.top) break;
      rows << p.dataset.users.name(u) << ',' << rank << ',' << catalog.items.name(it.item) << ','
           << catalog.categories.name(it.category) << ',' << (it.key.in_top_k ? 1 : 0) << ','
           << format_double(it.key.score) << '\n';
    }
  }
  write_text(o.out, rows.str(), out);
  r.rows_on_stdout = o.out.empty();
  r.add("users", users.size());
  if (!o.out.empty()) r.add("written", o.out);
  return kExitOk;
}

inline GradcheckFault parse_fault(const std::string& s) {
  if (s == "none") return GradcheckFault::none;
  if (s == "scale-preference") return GradcheckFault::scale_preference;
  if (s == "drop-prediction-reset") return GradcheckFault::drop_prediction_reset;
  throw UsageError("unknown fault '" + s + "'");
}

inline int cmd_gradcheck(const Options& o, Report& r) {
  GradcheckOptions g;
  g.seed = o.seed;
  g.preference_instances = o.preference_instances;
  g.demand_instances = o.demand_instances;
  g.lambda = o.lambda;
  g.eps = o.eps;
  g.tolerance = o.tolerance;
  g.fault = parse_fault(o.fault);
  const GradcheckReport rep = run_gradcheck(g);
  r.add("preference.instances", rep.preference_instances);
  r.add("preference.max_relative_error", rep.preference_max);
  r.add("demand.instances", rep.demand_instances);
  r.add("demand.max_relative_error", rep.demand_max);
  r.add("result", rep.passed ? "pass" : "fail");
  return rep.passed ? kExitOk : kExitCheck;
}

inline int cmd_export_styles(const Options& o, Report& r, std::ostream& out) {
  require(o.checkpoint, "--checkpoint", "for export-styles");
  if (o.clusters < 1) throw UsageError("--clusters must be >= 1");
  const Prepared p = load_prepared(o, true);
  const Checkpoint ck = load_checked(o.checkpoint, p.dataset);
  const PrefParams& pref = preference_of(ck, "--checkpoint");
  if (pref.variant != PrefVariant::deepstyle) throw UsageError("export-styles needs a deepstyle checkpoint");
  const Catalog& catalog = p.dataset.catalog;
  const KMeansResult km = kmeans(style_table(pref, *p.features, catalog), o.clusters, o.seed, o.kmeans_iterations);
  std::ostringstream rows;
  rows << r.comment_header() << "item,category,cluster\n";
  for (int i = 0; i < catalog.num_items(); ++i)
    rows << catalog.items.name(i) << ',' << catalog.categories.name(catalog.category_of(i)) << ','
         << km.assignment[static_cast<std::size_t>(i)] << '\n';
  write_text(o.out, rows.str(), out);
  r.rows_on_stdout = o.out.empty();
  r.add("items", catalog.num_items());
  r.add("clusters", o.clusters);
  r.add("kmeans.iterations", km.iterations);
  if (!o.out.empty()) r.add("written", o.out);
  return kExitOk;
}

}  // namespace detail

// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Visual style and category demand recommender"};
  app.name("vrec");
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value configuration file (keys are long option names)");

  app.add_option("--interactions", o.interactions, "Interaction file: user,item,category,timestamp");
  app.add_option("--features", o.features, "VFSR feature file");
  app.add_option("--manifest", o.manifest, "Item ids, one per feature row");
  app.add_option("--out", o.out, "Output path (checkpoint, directory or rows)");
  app.add_option("--checkpoint", o.checkpoint, "Model checkpoint");
  app.add_option("--demand", o.demand, "Demand checkpoint to aggregate with a DeepStyle checkpoint");
  app.add_option("--pretrain", o.pretrain, "DeepStyle checkpoint whose category table initializes CA-GRU");
  app.add_option("--report", o.report, "Also write the report to this file");
  app.add_option("--dim", o.dim, "Latent dimension d")->capture_default_str();
  app.add_option("--learning-rate", o.learning_rate, "SGD learning rate")->capture_default_str();
  app.add_option("--lambda", o.lambda, "L2 regularization strength")->capture_default_str();
  app.add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
  app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app.add_option("--init-scale", o.init_scale, "Preference init scale (uniform)")->capture_default_str();
  app.add_option("--matrix-init", o.matrix_init, "Demand matrix init scale (uniform)")->capture_default_str();
  app.add_option("--embedding-init", o.embedding_init, "Demand embedding init scale (uniform)")->capture_default_str();
  app.add_option("--k", o.k, "Top categories kept by the aggregation gate")->capture_default_str();
  app.add_option("--threads", o.threads, "Evaluation threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--train-fraction", o.train_fraction, "Chronological train share per user")->capture_default_str();
  app.add_option("--user", o.user, "Only this user (recommend)");
  app.add_option("--top", o.top, "Rows per user (recommend)")->capture_default_str();
  app.add_option("--time", o.time, "Recommendation time in epoch seconds; default is one day after the last interaction")
      ->capture_default_str();
  app.add_flag("--include-seen", o.include_seen, "Keep items the user already interacted with (recommend)");
  app.add_option("--clusters", o.clusters, "k-means clusters (export-styles)")->capture_default_str();
  app.add_option("--kmeans-iterations", o.kmeans_iterations, "k-means iteration cap")->capture_default_str();
  app.add_option("--preference-instances", o.preference_instances, "DeepStyle gradcheck instances")->capture_default_str();
  app.add_option("--demand-instances", o.demand_instances, "CA-GRU gradcheck instances")->capture_default_str();
  app.add_option("--eps", o.eps, "Finite-difference step")->capture_default_str();
  app.add_option("--tolerance", o.tolerance, "Maximum relative error")->capture_default_str();
  app.add_option("--fault", o.fault, "Injected gradient fault: none, scale-preference, drop-prediction-reset")
      ->capture_default_str();

  SynthConfig& s = o.synth;
  app.add_option("--users", s.num_users, "Synthetic users")->capture_default_str();
  app.add_option("--categories", s.num_categories, "Synthetic categories")->capture_default_str();
  app.add_option("--items-per-category", s.items_per_category, "Items per category")->capture_default_str();
  app.add_option("--feature-dim", s.feature_dim, "Feature dimension F")->capture_default_str();
  app.add_option("--style-dim", s.style_dim, "Style subspace dimension")->capture_default_str();
  app.add_option("--styles", s.num_styles, "Planted style clusters")->capture_default_str();
  app.add_option("--beta", s.context_strength, "Context effect strength")->capture_default_str();
  app.add_option("--temperature", s.temperature, "Within-category choice temperature")->capture_default_str();
  app.add_option("--category-spread", s.user_category_spread, "User category taste spread")->capture_default_str();
  app.add_option("--style-spread", s.style_spread, "Item style spread around its cluster")->capture_default_str();
  app.add_option("--prototype-norm", s.prototype_norm, "Category prototype norm")->capture_default_str();
  app.add_option("--prototype-overlap", s.prototype_overlap, "Prototype share inside the style subspace")
      ->capture_default_str();
  app.add_option("--prototype-rank", s.prototype_rank, "Dimension holding the rest of the prototypes; 0 = all of it")
      ->capture_default_str();
  app.add_option("--style-norm", s.style_norm, "Style offset scale")->capture_default_str();
  app.add_option("--feature-noise", s.feature_noise, "Feature noise standard deviation")->capture_default_str();
  app.add_option("--repeat-penalty", s.repeat_penalty, "Logit penalty on repeating a category")->capture_default_str();
  app.add_option("--min-length", s.min_length, "Shortest user sequence")->capture_default_str();
  app.add_option("--max-length", s.max_length, "Longest user sequence")->capture_default_str();
  app.add_option("--synth-seed", s.seed, "Generator seed")->capture_default_str();

  auto sub = [&](const char* name, const char* help) { return app.add_subcommand(name, help)->fallthrough(); };
  CLI::App* ingest = sub("ingest", "Validate and summarize an interaction file");
  CLI::App* synth = sub("synth", "Generate a synthetic dataset with planted structure");
  CLI::App* train = sub("train", "Train a model and write a checkpoint");
  train->add_option("model", o.model, "bpr, vbpr, deepstyle, gru or cagru")
      ->required()
      ->check(CLI::IsMember({"bpr", "vbpr", "deepstyle", "gru", "cagru"}));
  CLI::App* evaluate = sub("evaluate", "AUC of a checkpoint, optionally aggregated with a demand model");
  CLI::App* recommend = sub("recommend", "Ranked items per user");
  CLI::App* gradcheck = sub("gradcheck", "Finite-difference check of the analytic gradients");
  CLI::App* export_styles = sub("export-styles", "Cluster learned item styles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  detail::Report report(out, detail::config_lines(app, chosen), chosen->get_name());
  try {
    int code = kExitOk;
    if (chosen == ingest) code = detail::cmd_ingest(o, report);
    else if (chosen == synth) code = detail::cmd_synth(o, report);
    else if (chosen == train) code = detail::cmd_train(o, report, out);
    else if (chosen == evaluate) code = detail::cmd_evaluate(o, report);
    else if (chosen == recommend) code = detail::cmd_recommend(o, report, out);
    else if (chosen == gradcheck) code = detail::cmd_gradcheck(o, report);
    else if (chosen == export_styles) code = detail::cmd_export_styles(o, report, out);
    report.emit(o.report);
    return code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace vrec::cli
