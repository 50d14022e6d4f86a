// Command-line front end. Talks to the engine only through the C API.
//
// Exit codes: 0 success, 1 usage error, 2 runtime or numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lgl/latentgraph.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// Failure inside the library; carries the message from lgl_last_error().
struct RuntimeFailure {
  std::string message;
};

void check(lgl_status s, const char* what) {
  if (s != LGL_OK) {
    throw RuntimeFailure{std::string(what) + ": " + lgl_status_name(s) + ": " + lgl_last_error()};
  }
}

struct ConfigDeleter {
  void operator()(lgl_config* c) const { lgl_config_destroy(c); }
};
struct DatasetDeleter {
  void operator()(lgl_dataset* d) const { lgl_dataset_destroy(d); }
};
struct ModelDeleter {
  void operator()(lgl_model* m) const { lgl_model_destroy(m); }
};
using ConfigPtr = std::unique_ptr<lgl_config, ConfigDeleter>;
using DatasetPtr = std::unique_ptr<lgl_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<lgl_model, ModelDeleter>;

struct DataArgs {
  std::string path;
  std::string id_col;
  std::string label_col;
  std::vector<std::string> features{"rest"};
};

struct TrainArgs {
  std::uint64_t seed = 0;
  std::size_t epochs = 600;
  double lr0 = 0.01;
  double lr_min = 1e-4;
  std::size_t lr_step = 100;
  std::size_t embed_dim = 16;
  std::vector<std::size_t> embed_hidden;
  std::vector<std::size_t> gc_widths{16, 8};
  bool no_standardize = false;
};

void add_data_options(CLI::App* app, DataArgs& a, bool labels_required) {
  app->add_option("--data", a.path, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  app->add_option("--id-col", a.id_col, "Column holding node ids (default: row numbers)");
  auto* label = app->add_option("--label-col", a.label_col, "Column holding class labels");
  if (labels_required) label->required();
  app->add_option("--features", a.features,
                  "Feature columns, comma separated, or 'rest' for every other column")
      ->delimiter(',')
      ->capture_default_str();
}

void add_train_options(CLI::App* app, TrainArgs& a) {
  app->add_option("--seed", a.seed, "Random seed")->capture_default_str();
  app->add_option("--epochs", a.epochs, "Training epochs")->capture_default_str();
  app->add_option("--lr", a.lr0, "Initial learning rate")->capture_default_str();
  app->add_option("--lr-min", a.lr_min, "Final learning rate")->capture_default_str();
  app->add_option("--lr-step", a.lr_step, "Epochs between learning-rate decays")->capture_default_str();
  app->add_option("--embed-dim", a.embed_dim, "Latent embedding dimension")->capture_default_str();
  app->add_option("--embed-hidden", a.embed_hidden,
                  "Hidden widths of the embedding MLP, comma separated (default: none)")
      ->delimiter(',');
  app->add_option("--gc-widths", a.gc_widths, "Graph convolution widths, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  app->add_flag("--no-standardize", a.no_standardize, "Use features without z-scoring");
}

ConfigPtr make_config(const TrainArgs& a) {
  lgl_config* raw = nullptr;
  check(lgl_config_create(&raw), "config");
  ConfigPtr cfg(raw);
  check(lgl_config_set_int(raw, "seed", static_cast<int64_t>(a.seed)), "--seed");
  check(lgl_config_set_int(raw, "epochs", static_cast<int64_t>(a.epochs)), "--epochs");
  check(lgl_config_set_real(raw, "lr0", a.lr0), "--lr");
  check(lgl_config_set_real(raw, "lr_min", a.lr_min), "--lr-min");
  check(lgl_config_set_int(raw, "lr_step", static_cast<int64_t>(a.lr_step)), "--lr-step");
  check(lgl_config_set_int(raw, "embed_dim", static_cast<int64_t>(a.embed_dim)), "--embed-dim");
  check(lgl_config_set_list(raw, "embed_hidden", a.embed_hidden.data(), a.embed_hidden.size()),
        "--embed-hidden");
  check(lgl_config_set_list(raw, "gc_widths", a.gc_widths.data(), a.gc_widths.size()),
        "--gc-widths");
  check(lgl_config_set_int(raw, "standardize", a.no_standardize ? 0 : 1), "--no-standardize");
  return cfg;
}

DatasetPtr load_data(const DataArgs& a) {
  std::vector<const char*> names;
  const bool rest = a.features.size() == 1 && a.features[0] == "rest";
  if (!rest) {
    for (const auto& f : a.features) names.push_back(f.c_str());
  }
  lgl_dataset* raw = nullptr;
  check(lgl_dataset_load_csv(a.path.c_str(), a.id_col.c_str(), a.label_col.c_str(),
                             rest ? nullptr : names.data(), names.size(), &raw),
        "loading data");
  DatasetPtr data(raw);
  std::cout << "data: " << lgl_dataset_rows(raw) << " rows, " << lgl_dataset_cols(raw)
            << " features";
  if (lgl_dataset_classes(raw) > 0) std::cout << ", " << lgl_dataset_classes(raw) << " classes";
  std::cout << " (dropped " << lgl_dataset_dropped_rows(raw) << " unlabeled rows, imputed "
            << lgl_dataset_imputed_cells(raw) << " cells)\n";
  return data;
}

ModelPtr load_model(const std::string& path) {
  lgl_model* raw = nullptr;
  check(lgl_model_load(path.c_str(), &raw), "loading model");
  return ModelPtr(raw);
}

// Rows to score with a saved model: only its feature columns are read, so
// label or other extra columns may stay in the file.
DatasetPtr load_for_model(DataArgs a, const lgl_model* model) {
  a.features.clear();
  for (std::size_t i = 0; i < lgl_model_features(model); ++i) {
    a.features.emplace_back(lgl_model_feature_name(model, i));
  }
  a.label_col.clear();
  return load_data(a);
}

std::filesystem::path out_path(const std::string& dir, const char* name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw RuntimeFailure{"cannot create '" + dir + "': " + ec.message()};
  return std::filesystem::path(dir) / name;
}

std::string pm(double mean, double std, bool percent) {
  if (std::isnan(mean)) return "n/a";
  const double k = percent ? 100.0 : 1.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, percent ? "%.2f ± %.2f" : "%.4f ± %.4f", mean * k,
                std * k);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent population graph learning for node classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lgl_version()));

  DataArgs data_args;
  TrainArgs train_args;
  std::string out_dir = ".";

  // train
  auto* train = app.add_subcommand("train", "Train on every labeled row and save the model");
  add_data_options(train, data_args, true);
  add_train_options(train, train_args);
  train->add_option("--out-dir", out_dir, "Directory for model.json and history.csv")
      ->capture_default_str();

  // cross-validate
  std::size_t folds = 10;
  std::string method = "latent";
  std::size_t knn_k = 10;
  auto* cv = app.add_subcommand("cross-validate", "Stratified k-fold evaluation");
  add_data_options(cv, data_args, true);
  add_train_options(cv, train_args);
  cv->add_option("--folds", folds, "Number of folds")->capture_default_str();
  cv->add_option("--method", method, "latent, inductive, linear or knn")
      ->check(CLI::IsMember({"latent", "inductive", "linear", "knn"}))
      ->capture_default_str();
  cv->add_option("--knn-k", knn_k, "Neighbours for the knn baseline")->capture_default_str();
  cv->add_option("--out-dir", out_dir, "Directory for metrics.json and fold histories")
      ->capture_default_str();

  // infer
  std::string model_path;
  auto* infer = app.add_subcommand("infer", "Predict unseen rows with a saved model");
  infer->add_option("--model", model_path, "Model file from 'train'")->required()->check(CLI::ExistingFile);
  infer->add_option("--data", data_args.path, "CSV containing the model's feature columns")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--id-col", data_args.id_col, "Column holding node ids");
  std::uint64_t infer_seed = 0;
  infer->add_option("--seed", infer_seed, "Echoed into the output (inference is deterministic)")
      ->capture_default_str();
  infer->add_option("--out-dir", out_dir, "Directory for predictions.csv")->capture_default_str();

  // synth-recover
  std::size_t nodes = 10, dim = 8, iterations = 2000;
  double edge_p = 0.3;
  std::uint64_t synth_seed = 0;
  auto* recover = app.add_subcommand("synth-recover", "Recover a random graph from identity features");
  recover->add_option("--nodes", nodes, "Graph size")->capture_default_str();
  recover->add_option("--dim", dim, "Embedding dimension")->capture_default_str();
  recover->add_option("--edge-probability", edge_p, "Edge probability")->capture_default_str();
  recover->add_option("--iterations", iterations, "Adam iterations")->capture_default_str();
  recover->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
  recover->add_option("--out-dir", out_dir, "Directory for the adjacency CSVs")->capture_default_str();

  // synth-curves
  std::vector<std::size_t> curve_nodes{5, 10, 20};
  std::vector<std::size_t> curve_dims{2, 4, 8, 16};
  std::size_t curve_seeds = 5;
  auto* curves = app.add_subcommand("synth-curves", "Recovery error over graph sizes and dimensions");
  curves->add_option("--nodes", curve_nodes, "Graph sizes, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  curves->add_option("--dims", curve_dims, "Embedding dimensions, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  curves->add_option("--seeds", curve_seeds, "Runs per cell (seeds seed..seed+n-1)")->capture_default_str();
  curves->add_option("--edge-probability", edge_p, "Edge probability")->capture_default_str();
  curves->add_option("--iterations", iterations, "Adam iterations")->capture_default_str();
  curves->add_option("--seed", synth_seed, "First seed")->capture_default_str();
  curves->add_option("--out-dir", out_dir, "Directory for the CSV tables")->capture_default_str();

  // synth-benchmark
  auto* bench = app.add_subcommand("synth-benchmark",
                                   "Write the clustered 300-node benchmark as a CSV");
  bench->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
  bench->add_option("--out-dir", out_dir, "Directory for benchmark.csv")->capture_default_str();

  // export-graph
  auto* graph = app.add_subcommand("export-graph", "Write the learned adjacency as a CSV");
  graph->add_option("--model", model_path, "Model file from 'train'")->required()->check(CLI::ExistingFile);
  graph->add_option("--data", data_args.path, "Rows to connect (default: the training rows)")
      ->check(CLI::ExistingFile);
  graph->add_option("--id-col", data_args.id_col, "Column holding node ids");
  std::uint64_t graph_seed = 0;
  graph->add_option("--seed", graph_seed, "Echoed into the output")->capture_default_str();
  graph->add_option("--out-dir", out_dir, "Directory for graph.csv")->capture_default_str();

  // gradcheck
  std::size_t instances = 10;
  std::uint64_t gc_seed = 0;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of all gradients");
  gradcheck->add_option("--instances", instances, "Random instances per op")->capture_default_str();
  gradcheck->add_option("--seed", gc_seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train) {
      const ConfigPtr cfg = make_config(train_args);
      const DatasetPtr data = load_data(data_args);
      const auto model_file = out_path(out_dir, "model.json");
      const auto history_file = out_path(out_dir, "history.csv");
      lgl_model* raw = nullptr;
      check(lgl_train(data.get(), cfg.get(), history_file.c_str(), &raw), "training");
      const ModelPtr model(raw);
      check(lgl_model_save(model.get(), model_file.c_str()), "saving model");
      std::cout << "seed: " << train_args.seed << "\n"
                << "temperature: " << lgl_model_temperature(model.get())
                << ", threshold: " << lgl_model_threshold(model.get()) << "\n"
                << "model: " << model_file.string() << "\n"
                << "history: " << history_file.string() << "\n";
    } else if (*cv) {
      const ConfigPtr cfg = make_config(train_args);
      check(lgl_config_set_int(cfg.get(), "folds", static_cast<int64_t>(folds)), "--folds");
      check(lgl_config_set_int(cfg.get(), "knn_k", static_cast<int64_t>(knn_k)), "--knn-k");
      const DatasetPtr data = load_data(data_args);
      lgl_cv_summary s{};
      out_path(out_dir, "metrics.json");
      check(lgl_cross_validate(data.get(), cfg.get(), method.c_str(), out_dir.c_str(), &s),
            "cross-validation");
      std::cout << "seed: " << train_args.seed << ", folds: " << s.folds << ", method: " << method
                << "\n"
                << "accuracy: " << pm(s.accuracy_mean, s.accuracy_std, true)
                << ", auc: " << pm(s.auc_mean, s.auc_std, true) << "\n"
                << "metrics: " << (std::filesystem::path(out_dir) / "metrics.json").string() << "\n";
    } else if (*infer) {
      const ModelPtr model = load_model(model_path);
      const DatasetPtr data = load_for_model(data_args, model.get());
      const auto file = out_path(out_dir, "predictions.csv");
      check(lgl_infer_csv(model.get(), data.get(), file.c_str()), "inference");
      std::cout << "seed: " << infer_seed << "\n"
                << "predictions: " << file.string() << "\n";
    } else if (*recover) {
      ConfigPtr cfg = make_config(train_args);
      check(lgl_config_set_int(cfg.get(), "seed", static_cast<int64_t>(synth_seed)), "--seed");
      check(lgl_config_set_int(cfg.get(), "iterations", static_cast<int64_t>(iterations)),
            "--iterations");
      check(lgl_config_set_real(cfg.get(), "edge_probability", edge_p), "--edge-probability");
      out_path(out_dir, "learned.csv");
      lgl_recovery_summary s{};
      check(lgl_synth_recover(nodes, dim, cfg.get(), out_dir.c_str(), &s), "graph recovery");
      std::cout << "seed: " << synth_seed << ", nodes: " << nodes << ", dim: " << dim
                << ", edges: " << s.edges << "\n"
                << "edge agreement: " << s.agreement << "\n"
                << "temperature: " << s.temperature << ", threshold: " << s.threshold << "\n"
                << "final mse: " << s.final_mse << "\n";
    } else if (*curves) {
      ConfigPtr cfg = make_config(train_args);
      check(lgl_config_set_int(cfg.get(), "seed", static_cast<int64_t>(synth_seed)), "--seed");
      check(lgl_config_set_int(cfg.get(), "iterations", static_cast<int64_t>(iterations)),
            "--iterations");
      check(lgl_config_set_real(cfg.get(), "edge_probability", edge_p), "--edge-probability");
      out_path(out_dir, "recovery_summary.csv");
      check(lgl_synth_curves(curve_nodes.data(), curve_nodes.size(), curve_dims.data(),
                             curve_dims.size(), curve_seeds, cfg.get(), out_dir.c_str()),
            "recovery curves");
      std::cout << "seed: " << synth_seed << "\n"
                << "runs: " << (std::filesystem::path(out_dir) / "recovery_runs.csv").string() << "\n"
                << "summary: " << (std::filesystem::path(out_dir) / "recovery_summary.csv").string()
                << "\n";
    } else if (*bench) {
      lgl_dataset* raw = nullptr;
      check(lgl_dataset_benchmark(synth_seed, &raw), "benchmark");
      const DatasetPtr data(raw);
      const auto file = out_path(out_dir, "benchmark.csv");
      check(lgl_dataset_save_csv(data.get(), file.c_str()), "writing benchmark");
      std::cout << "seed: " << synth_seed << "\n"
                << "benchmark: " << file.string() << " (id column 'id', label column 'label')\n";
    } else if (*graph) {
      const ModelPtr model = load_model(model_path);
      DatasetPtr data;
      if (!data_args.path.empty()) data = load_for_model(data_args, model.get());
      const auto file = out_path(out_dir, "graph.csv");
      check(lgl_export_graph(model.get(), data.get(), file.c_str()), "exporting graph");
      std::cout << "seed: " << graph_seed << "\n"
                << "graph: " << file.string() << "\n";
    } else if (*gradcheck) {
      double worst_op = 0.0, end_to_end = 0.0;
      check(lgl_gradcheck(gc_seed, instances, &worst_op, &end_to_end), "gradient check");
      std::cout << "seed: " << gc_seed << "\n"
                << "max relative error (ops): " << worst_op << "\n"
                << "max relative error (end-to-end): " << end_to_end << "\n";
      if (!(worst_op < 1e-4 && end_to_end < 1e-3)) {
        std::cerr << "gradient check failed: tolerance 1e-4 per op, 1e-3 end-to-end\n";
        return kExitRuntime;
      }
    }
  } catch (const RuntimeFailure& f) {
    std::cerr << "error: " << f.message << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
