#include "lgl/latentgraph.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "lgl/data_io.hpp"
#include "lgl/errors.hpp"
#include "lgl/gradcheck.hpp"
#include "lgl/synthetic.hpp"
#include "lgl/trainer.hpp"

using nlohmann::json;

struct lgl_config {
  lgl::TrainConfig train;
  lgl::CVOptions cv;
  lgl::RecoveryConfig recovery;
  double edge_probability = 0.3;
};

struct lgl_dataset {
  lgl::TabularDataset table;
  bool named_columns = false;  // feature names came from a CSV header
};

struct lgl_model {
  lgl::TrainedModel model;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;
  std::vector<std::string> train_ids;
  lgl::Tensor train_features;  // raw, before standardization
  std::uint64_t seed = 0;
};

namespace {

constexpr const char* kModelFormat = "latentgraph-model";
constexpr int kModelVersion = 1;

thread_local std::string last_error;

lgl_status fail(lgl_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <typename F>
lgl_status guarded(F&& f) {
  try {
    f();
    return LGL_OK;
  } catch (const lgl::DimensionError& e) {
    return fail(LGL_ERR_DIMENSION, e.what());
  } catch (const lgl::ParseError& e) {
    return fail(LGL_ERR_PARSE, e.what());
  } catch (const lgl::IoError& e) {
    return fail(LGL_ERR_IO, e.what());
  } catch (const lgl::NumericalError& e) {
    return fail(LGL_ERR_NUMERICAL, e.what());
  } catch (const lgl::ContractError& e) {
    return fail(LGL_ERR_INVALID_ARGUMENT, e.what());
  } catch (const json::exception& e) {
    return fail(LGL_ERR_PARSE, std::string("model file: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(LGL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LGL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LGL_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw lgl::ContractError(msg);
}

std::string str_or_empty(const char* s) { return s ? std::string(s) : std::string(); }

std::filesystem::path prepare_dir(const char* dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw lgl::IoError("cannot create directory '" + p.string() + "': " + ec.message());
  return p;
}

std::vector<std::string> numbered_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return ids;
}

// ---- model (de)serialization ----

json tensor_json(const lgl::Tensor& t) {
  return json{{"rows", t.rows()},
              {"cols", t.cols()},
              {"values", std::vector<double>(t.values().begin(), t.values().end())}};
}

lgl::Tensor tensor_from_json(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != rows * cols) {
    throw lgl::ParseError("model file: tensor of " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " has " + std::to_string(values.size()) +
                          " values");
  }
  return lgl::Tensor::from(rows, cols, std::move(values), true);
}

json tensors_json(const std::vector<lgl::Tensor>& ts) {
  json arr = json::array();
  for (const auto& t : ts) arr.push_back(tensor_json(t));
  return arr;
}

std::vector<lgl::Tensor> tensors_from_json(const json& j) {
  std::vector<lgl::Tensor> out;
  for (const auto& e : j) out.push_back(tensor_from_json(e));
  return out;
}

json model_json(const lgl_model& m) {
  const auto& p = m.model.params;
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["seed"] = m.seed;
  j["num_classes"] = m.model.num_classes;
  j["class_names"] = m.class_names;
  j["feature_names"] = m.feature_names;
  j["arch"] = {{"embed_hidden", m.model.arch.embed_hidden},
               {"embed_dim", m.model.arch.embed_dim},
               {"gc_widths", m.model.arch.gc_widths}};
  j["standardizer"] = {{"mean", m.model.standardizer.mean}, {"scale", m.model.standardizer.scale}};
  j["params"] = {{"embed_weights", tensors_json(p.embedder.weights)},
                 {"embed_biases", tensors_json(p.embedder.biases)},
                 {"raw_temperature", p.edge.raw_temperature.item()},
                 {"threshold", p.edge.threshold.item()},
                 {"gc_weights", tensors_json(p.gcn.gc_weights)},
                 {"fc_weight", tensor_json(p.gcn.fc_weight)},
                 {"fc_bias", tensor_json(p.gcn.fc_bias)}};
  j["train_ids"] = m.train_ids;
  j["train_features"] = tensor_json(m.train_features);
  return j;
}

lgl_model model_from_json(const json& j) {
  if (j.at("format").get<std::string>() != kModelFormat) {
    throw lgl::ParseError("model file: unknown format '" + j.at("format").get<std::string>() + "'");
  }
  if (j.at("version").get<int>() != kModelVersion) {
    throw lgl::ParseError("model file: unsupported version " + j.at("version").dump());
  }
  lgl_model m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.model.num_classes = j.at("num_classes").get<std::size_t>();
  m.class_names = j.at("class_names").get<std::vector<std::string>>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  const json& a = j.at("arch");
  m.model.arch.embed_hidden = a.at("embed_hidden").get<std::vector<std::size_t>>();
  m.model.arch.embed_dim = a.at("embed_dim").get<std::size_t>();
  m.model.arch.gc_widths = a.at("gc_widths").get<std::vector<std::size_t>>();
  m.model.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
  m.model.standardizer.scale = j.at("standardizer").at("scale").get<std::vector<double>>();
  const json& p = j.at("params");
  auto& mp = m.model.params;
  mp.embedder.weights = tensors_from_json(p.at("embed_weights"));
  mp.embedder.biases = tensors_from_json(p.at("embed_biases"));
  mp.edge.raw_temperature = lgl::Tensor::scalar(p.at("raw_temperature").get<double>(), true);
  mp.edge.threshold = lgl::Tensor::scalar(p.at("threshold").get<double>(), true);
  mp.gcn.gc_weights = tensors_from_json(p.at("gc_weights"));
  mp.gcn.fc_weight = tensor_from_json(p.at("fc_weight"));
  mp.gcn.fc_bias = tensor_from_json(p.at("fc_bias"));
  m.train_ids = j.at("train_ids").get<std::vector<std::string>>();
  m.train_features = tensor_from_json(j.at("train_features")).detach();

  // Shape consistency, so that a damaged file fails here and not mid-forward.
  const std::size_t d = m.train_features.cols();
  if (mp.embedder.weights.empty() || mp.embedder.weights.size() != mp.embedder.biases.size() ||
      mp.gcn.gc_weights.empty() || m.feature_names.size() != d ||
      m.train_ids.size() != m.train_features.rows() || m.class_names.size() != m.model.num_classes ||
      mp.gcn.fc_weight.cols() != m.model.num_classes ||
      (!m.model.standardizer.empty() &&
       (m.model.standardizer.mean.size() != d || m.model.standardizer.scale.size() != d))) {
    throw lgl::ParseError("model file: inconsistent sizes");
  }
  std::size_t width = d;
  for (std::size_t l = 0; l < mp.embedder.weights.size(); ++l) {
    if (mp.embedder.weights[l].rows() != width ||
        mp.embedder.biases[l].cols() != mp.embedder.weights[l].cols()) {
      throw lgl::ParseError("model file: embedder layer " + std::to_string(l) + " has wrong shape");
    }
    width = mp.embedder.weights[l].cols();
  }
  width = d;
  for (std::size_t l = 0; l < mp.gcn.gc_weights.size(); ++l) {
    if (mp.gcn.gc_weights[l].rows() != width) {
      throw lgl::ParseError("model file: graph convolution " + std::to_string(l) +
                            " has wrong shape");
    }
    width = mp.gcn.gc_weights[l].cols();
  }
  if (mp.gcn.fc_weight.rows() != width || mp.gcn.fc_bias.cols() != m.model.num_classes) {
    throw lgl::ParseError("model file: classifier head has wrong shape");
  }
  return m;
}

// Features of `data` in the column order the model was trained on.
lgl::Tensor aligned_features(const lgl_model& m, const lgl_dataset& data) {
  const auto& t = data.table;
  if (!data.named_columns) {
    if (t.features.cols() != m.feature_names.size()) {
      throw lgl::DimensionError("model expects " + std::to_string(m.feature_names.size()) +
                                " features, data has " + std::to_string(t.features.cols()));
    }
    return t.features;
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < t.feature_names.size(); ++c) index[t.feature_names[c]] = c;
  std::vector<std::size_t> cols;
  for (const auto& name : m.feature_names) {
    const auto it = index.find(name);
    if (it == index.end()) throw lgl::DimensionError("data has no feature column '" + name + "'");
    cols.push_back(it->second);
  }
  const std::size_t n = t.features.rows(), d = cols.size();
  std::vector<double> v(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) v[i * d + j] = t.features(i, cols[j]);
  }
  return lgl::Tensor::from(n, d, std::move(v));
}

void check_labeled(const lgl_dataset* data) {
  require(data != nullptr, "dataset handle is NULL");
  require(!data->table.class_names.empty() && data->table.labels.size() == data->table.ids.size(),
          "dataset has no labels");
}

lgl::Method parse_method(const std::string& s) {
  if (s == "latent") return lgl::Method::kLatentGraph;
  if (s == "inductive") return lgl::Method::kInductive;
  if (s == "linear") return lgl::Method::kLinear;
  if (s == "knn") return lgl::Method::kKnnGraph;
  throw lgl::ContractError("unknown method '" + s + "' (expected latent, inductive, linear or knn)");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json cv_json(const lgl::CVResult& r, const lgl_config& cfg, const std::string& method) {
  json folds = json::array();
  for (std::size_t f = 0; f < r.report.folds.size(); ++f) {
    folds.push_back({{"fold", f},
                     {"train_size", r.split.folds[f].train.size()},
                     {"test_size", r.split.folds[f].test.size()},
                     {"accuracy", r.report.folds[f].accuracy},
                     {"auc", optional_number(r.report.folds[f].auc)}});
  }
  const lgl::MeanStd acc = r.report.accuracy();
  const lgl::MeanStd auc = r.report.auc();
  json j;
  j["method"] = method;
  j["seed"] = cfg.train.seed;
  j["folds"] = cfg.train.folds;
  j["epochs"] = cfg.train.epochs;
  j["per_fold"] = folds;
  j["accuracy"] = {{"mean", acc.mean}, {"std", acc.std}};
  if (auc.count > 0) {
    j["auc"] = {{"mean", auc.mean}, {"std", auc.std}, {"folds_defined", auc.count}};
  } else {
    j["auc"] = nullptr;
  }
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw lgl::IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw lgl::IoError("failed writing '" + path.string() + "'");
}

}  // namespace

extern "C" {

const char* lgl_version(void) { return "1.0.0"; }

const char* lgl_status_name(lgl_status status) {
  switch (status) {
    case LGL_OK: return "ok";
    case LGL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LGL_ERR_DIMENSION: return "dimension mismatch";
    case LGL_ERR_IO: return "i/o error";
    case LGL_ERR_PARSE: return "parse error";
    case LGL_ERR_NUMERICAL: return "numerical error";
    case LGL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lgl_last_error(void) { return last_error.c_str(); }

// ---- configuration ----

lgl_status lgl_config_create(lgl_config** out) {
  return guarded([&] {
    require(out != nullptr, "lgl_config_create: out is NULL");
    *out = new lgl_config();
  });
}

void lgl_config_destroy(lgl_config* cfg) { delete cfg; }

lgl_status lgl_config_set_int(lgl_config* cfg, const char* key, int64_t value) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr, "lgl_config_set_int: NULL argument");
    const std::string k(key);
    if (k == "seed") {
      // Any 64-bit pattern is a valid seed.
      cfg->train.seed = static_cast<std::uint64_t>(value);
      cfg->recovery.seed = cfg->train.seed;
      return;
    }
    require(value >= 0, "config key '" + k + "' must be non-negative");
    const auto v = static_cast<std::size_t>(value);
    if (k == "epochs") cfg->train.epochs = v;
    else if (k == "lr_step") cfg->train.lr_step = v;
    else if (k == "lr_decays") cfg->train.lr_decays = v;
    else if (k == "folds") cfg->train.folds = v;
    else if (k == "standardize") cfg->train.standardize = v != 0;
    else if (k == "embed_dim") cfg->train.arch.embed_dim = v;
    else if (k == "knn_k") cfg->cv.knn_k = v;
    else if (k == "workers") cfg->cv.workers = v;
    else if (k == "iterations") cfg->recovery.iterations = v;
    else throw lgl::ContractError("unknown integer config key '" + k + "'");
  });
}

lgl_status lgl_config_get_int(const lgl_config* cfg, const char* key, int64_t* value) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr && value != nullptr,
            "lgl_config_get_int: NULL argument");
    const std::string k(key);
    std::size_t v = 0;
    if (k == "seed") v = cfg->train.seed;
    else if (k == "epochs") v = cfg->train.epochs;
    else if (k == "lr_step") v = cfg->train.lr_step;
    else if (k == "lr_decays") v = cfg->train.lr_decays;
    else if (k == "folds") v = cfg->train.folds;
    else if (k == "standardize") v = cfg->train.standardize;
    else if (k == "embed_dim") v = cfg->train.arch.embed_dim;
    else if (k == "knn_k") v = cfg->cv.knn_k;
    else if (k == "workers") v = cfg->cv.workers;
    else if (k == "iterations") v = cfg->recovery.iterations;
    else throw lgl::ContractError("unknown integer config key '" + k + "'");
    *value = static_cast<int64_t>(v);
  });
}

lgl_status lgl_config_set_real(lgl_config* cfg, const char* key, double value) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr, "lgl_config_set_real: NULL argument");
    const std::string k(key);
    require(std::isfinite(value), "config key '" + k + "' must be finite");
    if (k == "lr0") cfg->train.lr0 = value;
    else if (k == "lr_min") cfg->train.lr_min = value;
    else if (k == "beta1") cfg->train.beta1 = cfg->recovery.adam.beta1 = value;
    else if (k == "beta2") cfg->train.beta2 = cfg->recovery.adam.beta2 = value;
    else if (k == "adam_eps") cfg->train.adam_eps = cfg->recovery.adam.eps = value;
    else if (k == "ridge_lambda") cfg->cv.ridge_lambda = value;
    else if (k == "edge_probability") cfg->edge_probability = value;
    else throw lgl::ContractError("unknown real config key '" + k + "'");
  });
}

lgl_status lgl_config_get_real(const lgl_config* cfg, const char* key, double* value) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr && value != nullptr,
            "lgl_config_get_real: NULL argument");
    const std::string k(key);
    if (k == "lr0") *value = cfg->train.lr0;
    else if (k == "lr_min") *value = cfg->train.lr_min;
    else if (k == "beta1") *value = cfg->train.beta1;
    else if (k == "beta2") *value = cfg->train.beta2;
    else if (k == "adam_eps") *value = cfg->train.adam_eps;
    else if (k == "ridge_lambda") *value = cfg->cv.ridge_lambda;
    else if (k == "edge_probability") *value = cfg->edge_probability;
    else throw lgl::ContractError("unknown real config key '" + k + "'");
  });
}

lgl_status lgl_config_set_list(lgl_config* cfg, const char* key, const size_t* values,
                               size_t count) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr && (values != nullptr || count == 0),
            "lgl_config_set_list: NULL argument");
    const std::string k(key);
    std::vector<std::size_t> v(values, values + count);
    for (std::size_t w : v) require(w > 0, "config list '" + k + "' has a zero width");
    if (k == "embed_hidden") cfg->train.arch.embed_hidden = std::move(v);
    else if (k == "recovery_hidden") cfg->recovery.embed_hidden = std::move(v);
    else if (k == "gc_widths") {
      require(!v.empty(), "gc_widths needs at least one layer");
      cfg->train.arch.gc_widths = std::move(v);
    } else {
      throw lgl::ContractError("unknown list config key '" + k + "'");
    }
  });
}

// ---- datasets ----

lgl_status lgl_dataset_load_csv(const char* path, const char* id_col, const char* label_col,
                                const char* const* features, size_t feature_count,
                                lgl_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "lgl_dataset_load_csv: NULL argument");
    lgl::CsvSchema schema;
    schema.id_col = str_or_empty(id_col);
    schema.label_col = str_or_empty(label_col);
    if (features != nullptr) {
      for (std::size_t i = 0; i < feature_count; ++i) {
        require(features[i] != nullptr, "feature name " + std::to_string(i) + " is NULL");
        schema.features.emplace_back(features[i]);
      }
    }
    auto d = std::make_unique<lgl_dataset>();
    d->table = lgl::load_csv(path, schema);
    d->named_columns = true;
    *out = d.release();
  });
}

lgl_status lgl_dataset_create(const double* features, size_t n, size_t d, const int* labels,
                              size_t num_classes, lgl_dataset** out) {
  return guarded([&] {
    require(features != nullptr && labels != nullptr && out != nullptr,
            "lgl_dataset_create: NULL argument");
    require(n > 0 && d > 0, "lgl_dataset_create: empty feature matrix");
    require(num_classes > 0, "lgl_dataset_create: need at least one class");
    auto ds = std::make_unique<lgl_dataset>();
    auto& t = ds->table;
    std::vector<double> x(features, features + n * d);
    for (double v : x) require(std::isfinite(v), "lgl_dataset_create: non-finite feature");
    t.features = lgl::Tensor::from(n, d, std::move(x));
    t.labels.assign(labels, labels + n);
    for (std::size_t i = 0; i < n; ++i) {
      require(t.labels[i] >= 0 && static_cast<std::size_t>(t.labels[i]) < num_classes,
              "lgl_dataset_create: label " + std::to_string(t.labels[i]) + " of row " +
                  std::to_string(i) + " outside [0, " + std::to_string(num_classes) + ")");
    }
    t.ids = numbered_ids(n);
    t.class_names = numbered_ids(num_classes);
    for (std::size_t j = 0; j < d; ++j) t.feature_names.push_back("f" + std::to_string(j));
    *out = ds.release();
  });
}

lgl_status lgl_dataset_benchmark(uint64_t seed, lgl_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "lgl_dataset_benchmark: out is NULL");
    lgl::ClusterBenchmarkConfig bc;
    bc.seed = seed;
    const lgl::Dataset data = lgl::make_cluster_benchmark(bc);
    auto ds = std::make_unique<lgl_dataset>();
    auto& t = ds->table;
    t.features = data.features;
    t.labels = data.labels;
    t.ids = numbered_ids(data.size());
    t.class_names = numbered_ids(data.num_classes);
    for (std::size_t j = 0; j < data.features.cols(); ++j) {
      t.feature_names.push_back((j < bc.informative ? "inf" : "nui") + std::to_string(j));
    }
    *out = ds.release();
  });
}

lgl_status lgl_dataset_save_csv(const lgl_dataset* data, const char* path) {
  return guarded([&] {
    require(data != nullptr && path != nullptr, "lgl_dataset_save_csv: NULL argument");
    lgl::save_csv(data->table, path);
  });
}

void lgl_dataset_destroy(lgl_dataset* data) { delete data; }

size_t lgl_dataset_rows(const lgl_dataset* data) { return data ? data->table.ids.size() : 0; }
size_t lgl_dataset_cols(const lgl_dataset* data) {
  return data ? data->table.feature_names.size() : 0;
}
size_t lgl_dataset_classes(const lgl_dataset* data) {
  return data ? data->table.class_names.size() : 0;
}
size_t lgl_dataset_dropped_rows(const lgl_dataset* data) {
  return data ? data->table.dropped_rows : 0;
}
size_t lgl_dataset_imputed_cells(const lgl_dataset* data) {
  return data ? data->table.imputed_cells : 0;
}

// ---- training and inference ----

lgl_status lgl_train(const lgl_dataset* data, const lgl_config* cfg, const char* history_csv,
                     lgl_model** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "lgl_train: NULL argument");
    check_labeled(data);
    lgl::TrainResult tr = lgl::train(data->table.dataset(), cfg->train);
    if (history_csv != nullptr && *history_csv != '\0') {
      lgl::write_history_csv(tr.history, history_csv);
    }
    auto m = std::make_unique<lgl_model>();
    m->model = std::move(tr.model);
    m->class_names = data->table.class_names;
    m->feature_names = data->table.feature_names;
    m->train_ids = data->table.ids;
    m->train_features = data->table.features.detach();
    m->seed = cfg->train.seed;
    *out = m.release();
  });
}

lgl_status lgl_model_save(const lgl_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "lgl_model_save: NULL argument");
    write_text(path, model_json(*model).dump() + "\n");
  });
}

lgl_status lgl_model_load(const char* path, lgl_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "lgl_model_load: NULL argument");
    std::ifstream in(path);
    if (!in) throw lgl::IoError(std::string("cannot open '") + path + "' for reading");
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw lgl::ParseError(std::string(path) + ": not a model file (" + e.what() + ")");
    }
    *out = new lgl_model(model_from_json(j));
  });
}

void lgl_model_destroy(lgl_model* model) { delete model; }

size_t lgl_model_classes(const lgl_model* model) { return model ? model->model.num_classes : 0; }
size_t lgl_model_features(const lgl_model* model) {
  return model ? model->feature_names.size() : 0;
}
const char* lgl_model_feature_name(const lgl_model* model, size_t i) {
  return model && i < model->feature_names.size() ? model->feature_names[i].c_str() : nullptr;
}
double lgl_model_temperature(const lgl_model* model) {
  return model ? model->model.params.edge.temperature()
               : std::numeric_limits<double>::quiet_NaN();
}
double lgl_model_threshold(const lgl_model* model) {
  return model ? model->model.params.edge.threshold_value()
               : std::numeric_limits<double>::quiet_NaN();
}

lgl_status lgl_infer(const lgl_model* model, const lgl_dataset* data, int* labels,
                     double* probabilities) {
  return guarded([&] {
    require(model != nullptr && data != nullptr && labels != nullptr, "lgl_infer: NULL argument");
    const lgl::Tensor x = aligned_features(*model, *data);
    const auto probs = lgl::inductive_proba(model->model, model->train_features, x);
    const std::size_t c = model->model.num_classes;
    const auto pred = lgl::predict(lgl::Tensor::from(x.rows(), c, probs));
    std::copy(pred.begin(), pred.end(), labels);
    if (probabilities != nullptr) std::copy(probs.begin(), probs.end(), probabilities);
  });
}

lgl_status lgl_infer_csv(const lgl_model* model, const lgl_dataset* data, const char* path) {
  return guarded([&] {
    require(model != nullptr && data != nullptr && path != nullptr,
            "lgl_infer_csv: NULL argument");
    const lgl::Tensor x = aligned_features(*model, *data);
    const auto probs = lgl::inductive_proba(model->model, model->train_features, x);
    const std::size_t c = model->model.num_classes;
    const auto pred = lgl::predict(lgl::Tensor::from(x.rows(), c, probs));
    std::ofstream out(path);
    if (!out) throw lgl::IoError(std::string("cannot open '") + path + "' for writing");
    out.precision(17);
    out << "id,predicted";
    for (const auto& name : model->class_names) out << ",p_" << name;
    out << '\n';
    for (std::size_t i = 0; i < x.rows(); ++i) {
      out << data->table.ids[i] << ',' << model->class_names[static_cast<std::size_t>(pred[i])];
      for (std::size_t k = 0; k < c; ++k) out << ',' << probs[i * c + k];
      out << '\n';
    }
    if (!out) throw lgl::IoError(std::string("failed writing '") + path + "'");
  });
}

lgl_status lgl_export_graph(const lgl_model* model, const lgl_dataset* data, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "lgl_export_graph: NULL argument");
    if (data == nullptr) {
      lgl::export_adjacency(lgl::model_adjacency(model->model, model->train_features),
                            model->train_ids, path);
    } else {
      lgl::export_adjacency(lgl::model_adjacency(model->model, aligned_features(*model, *data)),
                            data->table.ids, path);
    }
  });
}

// ---- workflows ----

lgl_status lgl_cross_validate(const lgl_dataset* data, const lgl_config* cfg, const char* method,
                              const char* out_dir, lgl_cv_summary* summary) {
  return guarded([&] {
    require(cfg != nullptr && method != nullptr, "lgl_cross_validate: NULL argument");
    check_labeled(data);
    lgl::CVOptions opts = cfg->cv;
    opts.method = parse_method(method);
    const lgl::CVResult r = lgl::cross_validate(data->table.dataset(), cfg->train, opts);
    if (out_dir != nullptr && *out_dir != '\0') {
      const auto dir = prepare_dir(out_dir);
      write_text(dir / "metrics.json", cv_json(r, *cfg, method).dump(2) + "\n");
      for (std::size_t f = 0; f < r.histories.size(); ++f) {
        if (!r.histories[f].empty()) {
          lgl::write_history_csv(r.histories[f], dir / ("history_fold" + std::to_string(f) + ".csv"));
        }
      }
    }
    if (summary != nullptr) {
      const lgl::MeanStd acc = r.report.accuracy();
      const lgl::MeanStd auc = r.report.auc();
      const double nan = std::numeric_limits<double>::quiet_NaN();
      *summary = {acc.mean, acc.std, auc.count ? auc.mean : nan, auc.count ? auc.std : nan,
                  r.report.folds.size()};
    }
  });
}

lgl_status lgl_synth_recover(size_t nodes, size_t embed_dim, const lgl_config* cfg,
                             const char* out_dir, lgl_recovery_summary* summary) {
  return guarded([&] {
    require(cfg != nullptr, "lgl_synth_recover: config is NULL");
    require(embed_dim > 0, "lgl_synth_recover: embedding dimension must be positive");
    const lgl::GroundTruthGraph g =
        lgl::generate_graph(nodes, cfg->edge_probability, cfg->recovery.seed);
    lgl::RecoveryConfig rc = cfg->recovery;
    rc.embed_dim = embed_dim;
    const lgl::RecoveryResult res =
        lgl::recover_graph(lgl::neighbor_sum_targets(g, lgl::Tensor::identity(nodes)), rc);
    if (out_dir != nullptr && *out_dir != '\0') {
      const auto dir = prepare_dir(out_dir);
      const auto ids = numbered_ids(nodes);
      lgl::export_adjacency(g.adjacency, ids, dir / "ground_truth.csv");
      lgl::export_adjacency(res.learned, ids, dir / "learned.csv");
      std::ofstream loss(dir / "loss.csv");
      if (!loss) throw lgl::IoError("cannot write '" + (dir / "loss.csv").string() + "'");
      loss.precision(17);
      loss << "iteration,loss\n";
      for (std::size_t i = 0; i < res.loss_history.size(); ++i) {
        loss << i << ',' << res.loss_history[i] << '\n';
      }
    }
    if (summary != nullptr) {
      *summary = {res.final_mse, res.agreement, res.temperature, res.threshold, g.edge_count()};
    }
  });
}

lgl_status lgl_synth_curves(const size_t* node_counts, size_t node_count_len, const size_t* dims,
                            size_t dims_len, size_t seeds, const lgl_config* cfg,
                            const char* out_dir) {
  return guarded([&] {
    require(cfg != nullptr && out_dir != nullptr && node_counts != nullptr && dims != nullptr,
            "lgl_synth_curves: NULL argument");
    require(seeds > 0, "lgl_synth_curves: need at least one seed");
    std::vector<std::size_t> n(node_counts, node_counts + node_count_len);
    std::vector<std::size_t> d(dims, dims + dims_len);
    std::vector<std::uint64_t> s(seeds);
    for (std::size_t i = 0; i < seeds; ++i) s[i] = cfg->recovery.seed + i;
    const lgl::RecoveryTable table =
        lgl::recovery_curves(n, d, s, cfg->edge_probability, cfg->recovery, cfg->cv.workers);
    const auto dir = prepare_dir(out_dir);
    lgl::write_recovery_csv(table, dir / "recovery_runs.csv");
    lgl::write_recovery_summary_csv(table, dir / "recovery_summary.csv");
  });
}

lgl_status lgl_gradcheck(uint64_t seed, size_t instances, double* worst_op, double* end_to_end) {
  return guarded([&] {
    const lgl::GradCheckReport r = lgl::run_gradcheck(seed, instances);
    if (worst_op != nullptr) *worst_op = r.max_op_error();
    if (end_to_end != nullptr) *end_to_end = r.end_to_end.max_rel_error;
  });
}

}  // extern "C"
