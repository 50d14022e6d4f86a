#pragma once

// Dataset ingestion, preprocessing and CSV exports.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lgl/tensor.hpp"

namespace lgl {

// Node features and labels as consumed by the trainer.
struct Dataset {
  Tensor features;          // N x d, no gradients
  std::vector<int> labels;  // dense in [0, num_classes)
  std::size_t num_classes = 0;

  std::size_t size() const { return labels.size(); }
  // Copy restricted to `rows`, in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;
};

struct CsvSchema {
  std::string id_col;                 // empty: ids are 0-based row numbers
  std::string label_col;               // empty: unlabeled, labels stay empty
  std::vector<std::string> features;  // empty: every remaining column
};

struct TabularDataset {
  std::vector<std::string> ids;
  Tensor features;
  std::vector<int> labels;
  std::vector<std::string> class_names;  // class_names[label]
  std::vector<std::string> feature_names;
  std::size_t dropped_rows = 0;   // rows without a label
  std::size_t imputed_cells = 0;  // missing features replaced by the column mean

  Dataset dataset() const;
};

// Missing cells are empty, "NA", "NaN" or "nan". Labels are mapped to dense
// indices in numeric order when every label parses as a number, otherwise in
// lexicographic order.
TabularDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

// Writes id, label and feature columns with round-trip precision. Unlabeled
// tables get no label column.
void save_csv(const TabularDataset& data, const std::filesystem::path& path,
              const std::string& id_col = "id", const std::string& label_col = "label");

// Bin b holds edges[b] <= v < edges[b+1]; the top bin also takes v == edges.back().
std::vector<int> quantize_labels(std::span<const double> values, std::span<const double> edges);

// Per-column affine map to zero mean and unit (population) variance.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // 0 for constant columns, which map to zero

  static Standardizer fit(const Tensor& x);
  Tensor apply(const Tensor& x) const;
  std::vector<std::size_t> constant_columns() const;
  bool empty() const { return mean.empty(); }
};

// Requires at least two rows. Constant columns become zero and are reported
// through `constant_columns` when given.
Tensor standardize(const Tensor& x, std::vector<std::size_t>* constant_columns = nullptr);

// Dense CSV with a header row and column of node ids, 6 significant digits.
void export_adjacency(const Tensor& adjacency, std::span<const std::string> node_ids,
                      const std::filesystem::path& path);

struct LabeledMatrix {
  std::vector<std::string> ids;
  Tensor values;
};
LabeledMatrix load_adjacency(const std::filesystem::path& path);

// Plain numeric matrix CSV without headers, round-trip precision.
void write_matrix_csv(const Tensor& m, const std::filesystem::path& path);

}  // namespace lgl
