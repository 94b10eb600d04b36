#include "mvgcca/experiment.hpp"

#include "mvgcca/baselines.hpp"
#include "mvgcca/graph_ops.hpp"
#include "mvgcca/train.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mvgcca {

using nlohmann::json;

namespace {

const std::set<std::string> kDatasets{"uci7", "uci10", "twitter"};
const std::set<std::string> kMethods{"pca", "gpca", "mcca", "gmcca", "mvgcca"};
const std::set<std::string> kTasks{"classify", "cluster", "recommend", "all"};

// "classes 0, 5 and 6 have been removed" leaves these seven digits.
const std::set<int> kUci7Classes{1, 2, 3, 4, 7, 8, 9};
const std::set<int> kUci10Classes{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};

bool uses_graph(const std::string& method) {
  return method == "gpca" || method == "gmcca" || method == "mvgcca";
}

std::string method_digest(const ExperimentConfig& cfg) {
  std::ostringstream os;
  if (cfg.method == "mvgcca") {
    os << "d=" << cfg.train.latent_dim << " lr=" << cfg.train.learning_rate
       << " epochs=" << cfg.train.epochs << " layers=" << cfg.train.layers
       << " hidden=" << cfg.train.hidden << " dropout=" << cfg.train.dropout;
  } else {
    os << "d=" << cfg.baseline.d;
    if (cfg.method == "gpca" || cfg.method == "gmcca")
      os << " gamma=" << cfg.baseline.gamma;
    if (cfg.method == "mcca" || cfg.method == "gmcca")
      os << " eps=" << cfg.baseline.eps;
  }
  return os.str();
}

} // namespace

void ExperimentConfig::validate() const {
  auto expect = [](const std::set<std::string>& allowed, const std::string& got,
                   const char* field) {
    if (allowed.count(got)) return;
    std::ostringstream os;
    os << "unknown " << field << " '" << got << "' (expected";
    for (const auto& a : allowed) os << ' ' << a;
    os << ")";
    throw std::invalid_argument(os.str());
  };
  expect(kDatasets, dataset, "dataset");
  expect(kMethods, method, "method");
  expect(kTasks, task, "task");
  if (task == "recommend" && dataset != "twitter")
    throw std::invalid_argument("task 'recommend' requires dataset 'twitter'");
  if ((task == "classify" || task == "cluster") && dataset == "twitter")
    throw std::invalid_argument("dataset 'twitter' has no class labels; use task "
                                "'recommend'");
  if (graph.k < 1) throw std::invalid_argument("graph.k must be positive");
  if (graph.metric != "euclidean" && graph.metric != "cosine")
    throw std::invalid_argument("unknown graph.metric '" + graph.metric + "'");
  if (baseline.d < 1) throw std::invalid_argument("baseline.d must be positive");
  if (baseline.eps <= 0.0) throw std::invalid_argument("baseline.eps must be positive");
  if (svm_C <= 0.0) throw std::invalid_argument("svm_C must be positive");
  if (kmeans_restarts < 1)
    throw std::invalid_argument("kmeans_restarts must be positive");
  if (twitter_subsample && *twitter_subsample < 1)
    throw std::invalid_argument("twitter_subsample must be positive");
  if (method == "mvgcca") train.validate();
}

json experiment_to_json(const ExperimentConfig& cfg) {
  json j{{"dataset", cfg.dataset},
         {"method", cfg.method},
         {"task", cfg.task},
         {"data_dir", cfg.data_dir.string()},
         {"out", cfg.out.string()},
         {"seed", cfg.seed},
         {"graph", {{"k", cfg.graph.k}, {"metric", cfg.graph.metric}}},
         {"baseline",
          {{"d", cfg.baseline.d},
           {"gamma", cfg.baseline.gamma},
           {"eps", cfg.baseline.eps}}},
         {"train", config_to_json(cfg.train)},
         {"svm_C", cfg.svm_C},
         {"kmeans_restarts", cfg.kmeans_restarts}};
  if (cfg.twitter_subsample)
    j["twitter_subsample"] = *cfg.twitter_subsample;
  else
    j["twitter_subsample"] = nullptr;
  return j;
}

ExperimentConfig experiment_from_json(const json& j) {
  static const std::set<std::string> known{
      "dataset", "method", "task", "data_dir", "out",
      "seed",    "graph",  "baseline", "train", "twitter_subsample",
      "svm_C",   "kmeans_restarts"};
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw std::invalid_argument("unknown config field '" + item.key() + "'");

  ExperimentConfig cfg;
  auto get = [&](const json& obj, const char* key, auto& field) {
    if (obj.contains(key))
      field = obj.at(key).get<std::decay_t<decltype(field)>>();
  };
  get(j, "dataset", cfg.dataset);
  get(j, "method", cfg.method);
  get(j, "task", cfg.task);
  if (j.contains("data_dir")) cfg.data_dir = j.at("data_dir").get<std::string>();
  if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
  get(j, "seed", cfg.seed);
  if (j.contains("graph")) {
    get(j.at("graph"), "k", cfg.graph.k);
    get(j.at("graph"), "metric", cfg.graph.metric);
  }
  if (j.contains("baseline")) {
    get(j.at("baseline"), "d", cfg.baseline.d);
    get(j.at("baseline"), "gamma", cfg.baseline.gamma);
    get(j.at("baseline"), "eps", cfg.baseline.eps);
  }
  if (j.contains("train")) cfg.train = config_from_json(j.at("train"));
  if (j.contains("twitter_subsample")) {
    if (j.at("twitter_subsample").is_null())
      cfg.twitter_subsample.reset();
    else
      cfg.twitter_subsample = j.at("twitter_subsample").get<Index>();
  }
  get(j, "svm_C", cfg.svm_C);
  get(j, "kmeans_restarts", cfg.kmeans_restarts);
  return cfg;
}

MultiviewDataset prepare_dataset(const ExperimentConfig& cfg) {
  MultiviewDataset raw;
  if (cfg.dataset == "uci7")
    raw = load_uci(cfg.data_dir, kUci7Classes);
  else if (cfg.dataset == "uci10")
    raw = load_uci(cfg.data_dir, kUci10Classes);
  else
    raw = load_twitter(cfg.data_dir, cfg.twitter_subsample, cfg.seed);

  MultiviewDataset ds = preprocess_views(raw);
  if (uses_graph(cfg.method))
    ds.adjacency =
        normalize_adjacency(build_knn_graph(ds, cfg.graph.k, cfg.graph.metric));
  return ds;
}

namespace {

Matrix compute_embedding(const ExperimentConfig& cfg, const MultiviewDataset& ds,
                         TrainResult* train_out) {
  if (cfg.method == "pca") return pca(ds, cfg.baseline.d).S;
  if (cfg.method == "gpca")
    return graph_pca(ds, laplacian(ds.adjacency), cfg.baseline.gamma,
                     cfg.baseline.d)
        .S;
  if (cfg.method == "mcca") return mcca(ds, cfg.baseline.d, cfg.baseline.eps).S;
  if (cfg.method == "gmcca")
    return gmcca(ds, laplacian(ds.adjacency), cfg.baseline.gamma, cfg.baseline.d,
                 cfg.baseline.eps)
        .S;
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  TrainResult res = train(ds, tc);
  Matrix z = embed(ds, res.params, tc);
  if (train_out) *train_out = std::move(res);
  return z;
}

} // namespace

EvalReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const MultiviewDataset ds = prepare_dataset(cfg);

  TrainResult tr;
  const bool is_mvgcca = cfg.method == "mvgcca";
  const Matrix z = compute_embedding(cfg, ds, is_mvgcca ? &tr : nullptr);

  EvalReport report;
  report.method = cfg.method;
  report.dataset = cfg.dataset;
  report.latent_dim = is_mvgcca ? cfg.train.latent_dim : cfg.baseline.d;
  report.config_digest = method_digest(cfg);
  report.seed = cfg.seed;

  const bool has_labels = !ds.labels.empty();
  auto wants = [&](const char* t) { return cfg.task == t || cfg.task == "all"; };

  if (wants("classify") && has_labels) {
    const FoldSplit folds = split_folds_stratified(ds.labels, 10, cfg.seed + 1);
    SvmParams sp;
    sp.C = cfg.svm_C;
    sp.seed = cfg.seed + 5;
    const auto [mean, stddev] = svm_accuracy_10fold(z, ds.labels, folds, sp);
    report.add("accuracy", mean, stddev);
  }
  if (wants("cluster") && has_labels) {
    std::set<int> classes(ds.labels.begin(), ds.labels.end());
    const int k = static_cast<int>(classes.size());
    const auto [am, as] =
        kmeans_ari(z, ds.labels, k, cfg.kmeans_restarts, cfg.seed + 2);
    report.add("ari", am, as);
    const auto [bm, bs] =
        spectral_ari(z, ds.labels, k, AffinityParams{}, cfg.seed + 3);
    report.add("ari2", bm, bs);
  }
  if (wants("recommend") && cfg.dataset == "twitter") {
    const RecommendationTask task =
        build_recommendation_task(ds.follows, ds.n(), 20, 10, 100, cfg.seed + 4);
    const RecommendationMetrics rm = recommend_friends(z, task);
    report.add("precision", rm.precision, 0.0);
    report.add("recall", rm.recall, 0.0);
    report.add("mrr", rm.mrr, 0.0);
  }

  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    write_report(report, cfg, cfg.out / "report.json");
    if (is_mvgcca) {
      TrainConfig tc = cfg.train;
      tc.seed = cfg.seed;
      save_checkpoint(cfg.out / "checkpoint.bin", tr.params, tc);
      write_training_log(cfg.out / "training_log.jsonl", tr.log);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Grid search

namespace {

json::json_pointer dotted_pointer(const std::string& dotted) {
  std::string p = "/" + dotted;
  for (auto& c : p)
    if (c == '.') c = '/';
  return json::json_pointer(p);
}

} // namespace

GridResult grid_search(const ExperimentConfig& base, const json& grid,
                       int runs_per_point) {
  base.validate();
  if (!grid.is_object() || grid.empty())
    throw std::invalid_argument("grid must be a nonempty object of config-path -> "
                                "value-array entries");
  if (runs_per_point < 1)
    throw std::invalid_argument("runs_per_point must be positive");

  const json base_json = experiment_to_json(base);
  std::vector<std::string> keys;
  std::vector<std::vector<json>> values;
  for (const auto& item : grid.items()) {  // alphabetical by key
    if (!item.value().is_array() || item.value().empty())
      throw std::invalid_argument("grid entry '" + item.key() +
                                  "' must be a nonempty array");
    if (!base_json.contains(dotted_pointer(item.key())))
      throw std::invalid_argument("unknown grid key '" + item.key() + "'");
    keys.push_back(item.key());
    values.emplace_back(item.value().begin(), item.value().end());
  }

  size_t total = 1;
  for (const auto& v : values) total *= v.size();

  GridResult result;
  double best_acc = -1.0;
  json best_overrides;
  for (size_t p = 0; p < total; ++p) {
    // Decode the point index with the first (alphabetical) key slowest.
    std::vector<size_t> idx(keys.size());
    size_t rem = p;
    for (size_t i = keys.size(); i-- > 0;) {
      idx[i] = rem % values[i].size();
      rem /= values[i].size();
    }

    GridPoint point;
    json cfg_json = base_json;
    for (size_t i = 0; i < keys.size(); ++i) {
      cfg_json[dotted_pointer(keys[i])] = values[i][idx[i]];
      point.overrides[keys[i]] = values[i][idx[i]];
    }
    try {
      ExperimentConfig cfg = experiment_from_json(cfg_json);
      cfg.task = "classify";  // selection metric is 10-fold SVM accuracy
      cfg.out.clear();
      for (int r = 0; r < runs_per_point; ++r) {
        cfg.seed = base.seed + static_cast<std::uint64_t>(r);
        const EvalReport rep = run_experiment(cfg);
        const MetricValue* acc = rep.find("accuracy");
        if (!acc) throw std::runtime_error("run produced no accuracy metric");
        point.run_accuracies.push_back(acc->mean);
      }
      point.mean_accuracy =
          std::accumulate(point.run_accuracies.begin(), point.run_accuracies.end(),
                          0.0) /
          point.run_accuracies.size();
    } catch (const std::exception& e) {
      point.failed = true;
      point.error = e.what();
    }
    if (!point.failed && point.mean_accuracy > best_acc) {  // ties keep the
      best_acc = point.mean_accuracy;                       // earlier point
      result.best_index = static_cast<int>(p);
      best_overrides = point.overrides;
    }
    result.points.push_back(std::move(point));
  }
  if (result.best_index < 0)
    throw std::runtime_error("grid search failed: every point failed");

  json best_json = experiment_to_json(base);
  for (const auto& item : best_overrides.items())
    best_json[dotted_pointer(item.key())] = item.value();
  result.best_config = experiment_from_json(best_json);
  result.best_report = run_experiment(result.best_config);

  if (!base.out.empty()) {
    std::filesystem::create_directories(base.out);
    json points = json::array();
    for (const auto& pt : result.points)
      points.push_back({{"overrides", pt.overrides},
                        {"mean_accuracy", pt.mean_accuracy},
                        {"run_accuracies", pt.run_accuracies},
                        {"failed", pt.failed},
                        {"error", pt.error}});
    const json summary{{"points", points},
                       {"best_index", result.best_index},
                       {"best_config", experiment_to_json(result.best_config)}};
    std::ofstream f(base.out / "grid.json");
    if (!f) throw std::runtime_error("cannot write grid summary");
    f << summary.dump(2) << "\n";
  }
  return result;
}

// ---------------------------------------------------------------------------
// Embedding export

void export_embedding(const ExperimentConfig& cfg,
                      const std::filesystem::path& checkpoint_file,
                      const std::filesystem::path& out_file) {
  cfg.validate();
  if (cfg.method != "mvgcca")
    throw std::invalid_argument("embedding export requires method 'mvgcca'");
  const Checkpoint ck = load_checkpoint(checkpoint_file);

  auto mismatch = [](const char* field) {
    throw std::runtime_error(std::string("checkpoint/config mismatch: ") + field);
  };
  if (ck.config.latent_dim != cfg.train.latent_dim) mismatch("latent_dim");
  if (ck.config.hops != cfg.train.hops) mismatch("hops");
  if (ck.config.layers != cfg.train.layers) mismatch("layers");
  if (ck.config.hidden != cfg.train.hidden) mismatch("hidden");
  if (ck.config.nonlinearity != cfg.train.nonlinearity) mismatch("nonlinearity");
  if (ck.config.propagation != cfg.train.propagation) mismatch("propagation");

  const MultiviewDataset ds = prepare_dataset(cfg);
  std::vector<Index> dims;
  dims.reserve(ds.views.size());
  for (const auto& v : ds.views) dims.push_back(v.rows());
  if (dims != ck.params.view_dims()) mismatch("view_dims");

  const Matrix z = embed(ds, ck.params, ck.config);

  std::ofstream out(out_file);
  if (!out) throw std::runtime_error("cannot write embedding: " + out_file.string());
  out << "id\tlabel";
  for (Index r = 0; r < z.rows(); ++r) out << "\tz" << r;
  out << "\n";
  out << std::setprecision(17);
  for (Index i = 0; i < z.cols(); ++i) {
    out << i << '\t' << (ds.labels.empty() ? -1 : ds.labels[static_cast<size_t>(i)]);
    for (Index r = 0; r < z.rows(); ++r) out << '\t' << z(r, i);
    out << '\n';
  }
}

EmbeddingTable read_embedding_tsv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open embedding: " + file.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("embedding file is empty: " + file.string());
  Index d = 0;
  {
    std::istringstream hdr(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(hdr, tok, '\t')) cols.push_back(tok);
    if (cols.size() < 3 || cols[0] != "id" || cols[1] != "label")
      throw std::runtime_error("bad embedding header in " + file.string());
    d = static_cast<Index>(cols.size()) - 2;
  }

  EmbeddingTable table;
  std::vector<double> buffer;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    Index id;
    int label;
    if (!(row >> id >> label))
      throw std::runtime_error("bad embedding row in " + file.string());
    table.ids.push_back(id);
    table.labels.push_back(label);
    for (Index r = 0; r < d; ++r) {
      double v;
      if (!(row >> v))
        throw std::runtime_error("bad embedding row in " + file.string());
      buffer.push_back(v);
    }
  }
  const Index n = static_cast<Index>(table.ids.size());
  table.z = Eigen::Map<Matrix>(buffer.data(), d, n);
  return table;
}

// ---------------------------------------------------------------------------
// Reports

json report_to_json(const EvalReport& report, const ExperimentConfig& cfg) {
  json rows = json::array();
  for (const auto& m : report.metrics)
    rows.push_back({{"method", report.method},
                    {"dataset", report.dataset},
                    {"metric", m.metric},
                    {"mean", m.mean},
                    {"std", m.stddev},
                    {"seed", report.seed}});
  return json{{"config", experiment_to_json(cfg)}, {"rows", rows}};
}

void write_report(const EvalReport& report, const ExperimentConfig& cfg,
                  const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write report: " + file.string());
  out << report_to_json(report, cfg).dump(2) << "\n";
}

std::string format_report(const EvalReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "method" << std::setw(9) << "dataset"
     << std::setw(11) << "metric" << std::right << std::setw(9) << "mean"
     << std::setw(9) << "std" << std::setw(7) << "seed" << "\n";
  for (const auto& m : report.metrics) {
    os << std::left << std::setw(8) << report.method << std::setw(9)
       << report.dataset << std::setw(11) << m.metric << std::right << std::fixed
       << std::setprecision(4) << std::setw(9) << m.mean << std::setw(9)
       << m.stddev << std::setw(7) << report.seed << "\n";
    os.unsetf(std::ios::fixed);
  }
  return os.str();
}

} // namespace mvgcca
