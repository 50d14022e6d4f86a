#include "lgl/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "lgl/errors.hpp"

namespace lgl {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Splits one CSV record. Double quotes group fields and "" escapes a quote.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan";
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::string format_exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_6g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::filesystem::path& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw ParseError(path.string() + ": column '" + name + "' not found in header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features = gather_rows(features, rows).detach();
  out.num_classes = num_classes;
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels.at(r));
  return out;
}

Dataset TabularDataset::dataset() const {
  return Dataset{features, labels, class_names.size()};
}

TabularDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file, no header");
  const std::vector<std::string> header = split_csv_line(line);

  const std::optional<std::size_t> id_idx =
      schema.id_col.empty() ? std::nullopt
                            : std::optional<std::size_t>(column_index(header, schema.id_col, path));
  const std::optional<std::size_t> label_idx =
      schema.label_col.empty()
          ? std::nullopt
          : std::optional<std::size_t>(column_index(header, schema.label_col, path));

  std::vector<std::size_t> feature_idx;
  if (schema.features.empty()) {
    const std::size_t skip_label = label_idx.value_or(header.size());
    const std::size_t skip_id = id_idx.value_or(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != skip_label && c != skip_id) feature_idx.push_back(c);
    }
  } else {
    for (const auto& name : schema.features) feature_idx.push_back(column_index(header, name, path));
  }
  if (feature_idx.empty()) throw ParseError(path.string() + ": no feature columns");

  TabularDataset out;
  for (std::size_t c : feature_idx) out.feature_names.push_back(header[c]);

  const std::size_t d = feature_idx.size();
  std::vector<std::string> raw_labels;
  std::vector<std::optional<double>> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    if (label_idx) {
      if (is_missing(fields[*label_idx])) {
        ++out.dropped_rows;
        continue;
      }
      raw_labels.push_back(fields[*label_idx]);
    }
    out.ids.push_back(id_idx ? fields[*id_idx] : std::to_string(line_no - 2));
    for (std::size_t c : feature_idx) {
      if (is_missing(fields[c])) {
        cells.emplace_back(std::nullopt);
        continue;
      }
      const auto v = parse_double(fields[c]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": column '" +
                         header[c] + "' has non-numeric value '" + fields[c] + "'");
      }
      cells.emplace_back(*v);
    }
  }

  const std::size_t n = out.ids.size();
  std::vector<double> means(d, 0.0);
  std::vector<std::size_t> present(d, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (cells[i * d + j]) {
        means[j] += *cells[i * d + j];
        ++present[j];
      }
    }
  }
  for (std::size_t j = 0; j < d; ++j) means[j] = present[j] ? means[j] / static_cast<double>(present[j]) : 0.0;
  std::vector<double> values(n * d);
  for (std::size_t k = 0; k < n * d; ++k) {
    if (cells[k]) {
      values[k] = *cells[k];
    } else {
      values[k] = means[k % d];
      ++out.imputed_cells;
    }
  }
  out.features = Tensor::from(n, d, std::move(values));

  // Dense label indices.
  const bool numeric = std::all_of(raw_labels.begin(), raw_labels.end(),
                                   [](const std::string& s) { return parse_double(s).has_value(); });
  std::vector<std::string> names = raw_labels;
  if (numeric) {
    std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
      return *parse_double(a) < *parse_double(b);
    });
    names.erase(std::unique(names.begin(), names.end(),
                            [](const std::string& a, const std::string& b) {
                              return *parse_double(a) == *parse_double(b);
                            }),
                names.end());
  } else {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
  }
  out.class_names = names;
  out.labels.reserve(n);
  for (const auto& l : raw_labels) {
    const auto it = numeric ? std::find_if(names.begin(), names.end(),
                                           [&](const std::string& s) { return *parse_double(s) == *parse_double(l); })
                            : std::lower_bound(names.begin(), names.end(), l);
    out.labels.push_back(static_cast<int>(it - names.begin()));
  }
  return out;
}

void save_csv(const TabularDataset& data, const std::filesystem::path& path,
              const std::string& id_col, const std::string& label_col) {
  auto out = open_for_write(path);
  const bool labeled = !data.labels.empty();
  out << csv_escape(id_col);
  if (labeled) out << ',' << csv_escape(label_col);
  for (const auto& f : data.feature_names) out << ',' << csv_escape(f);
  out << '\n';
  const std::size_t n = data.features.rows(), d = data.features.cols();
  for (std::size_t i = 0; i < n; ++i) {
    out << csv_escape(i < data.ids.size() ? data.ids[i] : std::to_string(i));
    if (labeled) {
      const auto label = static_cast<std::size_t>(data.labels[i]);
      out << ',' << csv_escape(label < data.class_names.size() ? data.class_names[label]
                                                               : std::to_string(label));
    }
    for (std::size_t j = 0; j < d; ++j) out << ',' << format_exact(data.features(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<int> quantize_labels(std::span<const double> values, std::span<const double> edges) {
  if (edges.size() < 2) throw ContractError("quantize_labels: need at least two bin edges");
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    if (!(edges[b] < edges[b + 1])) {
      throw ContractError("quantize_labels: bin edges must be strictly increasing");
    }
  }
  std::vector<int> out;
  out.reserve(values.size());
  std::ostringstream offenders;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v >= edges.front() && v <= edges.back())) {
      if (bad++ < 10) offenders << (bad > 1 ? ", " : "") << "index " << i << " = " << v;
      continue;
    }
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    const auto bin = static_cast<int>(it - edges.begin()) - 1;
    out.push_back(std::min(bin, static_cast<int>(edges.size()) - 2));
  }
  if (bad) {
    throw ContractError("quantize_labels: " + std::to_string(bad) + " value(s) outside [" +
                        format_6g(edges.front()) + ", " + format_6g(edges.back()) +
                        "]: " + offenders.str());
  }
  return out;
}

Standardizer Standardizer::fit(const Tensor& x) {
  const std::size_t n = x.rows(), d = x.cols();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  if (n == 0) return s;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += x(i, j);
  }
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x(i, j) - s.mean[j];
      s.scale[j] += c * c;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(s.scale[j] / static_cast<double>(n));
    // Relative tolerance so that round-off in an already constant column does
    // not turn into unit-variance noise.
    s.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[j])) ? sd : 0.0;
  }
  return s;
}

Tensor Standardizer::apply(const Tensor& x) const {
  if (x.cols() != mean.size()) {
    throw DimensionError("Standardizer::apply: fitted on " + std::to_string(mean.size()) +
                         " columns, got " + x.shape().str());
  }
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> v(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      v[i * d + j] = scale[j] > 0.0 ? (x(i, j) - mean[j]) / scale[j] : 0.0;
    }
  }
  return Tensor::from(n, d, std::move(v));
}

std::vector<std::size_t> Standardizer::constant_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < scale.size(); ++j) {
    if (scale[j] == 0.0) out.push_back(j);
  }
  return out;
}

Tensor standardize(const Tensor& x, std::vector<std::size_t>* constant_columns) {
  if (x.rows() < 2) throw ContractError("standardize: need at least two rows");
  const Standardizer s = Standardizer::fit(x);
  if (constant_columns) *constant_columns = s.constant_columns();
  return s.apply(x);
}

void export_adjacency(const Tensor& adjacency, std::span<const std::string> node_ids,
                      const std::filesystem::path& path) {
  const std::size_t n = node_ids.size();
  if (adjacency.defined() && (adjacency.rows() != n || adjacency.cols() != n)) {
    throw DimensionError("export_adjacency: matrix " + adjacency.shape().str() + " with " +
                         std::to_string(n) + " node ids");
  }
  auto out = open_for_write(path);
  out << "id";
  for (const auto& id : node_ids) out << ',' << csv_escape(id);
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << csv_escape(node_ids[i]);
    for (std::size_t j = 0; j < n; ++j) out << ',' << format_6g(adjacency(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

LabeledMatrix load_adjacency(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  std::vector<std::string> header = split_csv_line(line);
  LabeledMatrix m;
  m.ids.assign(header.begin() + 1, header.end());
  const std::size_t n = m.ids.size();
  std::vector<double> values;
  values.reserve(n * n);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != n + 1 || row >= n) {
      throw ParseError(path.string() + ": malformed adjacency row " + std::to_string(row + 1));
    }
    for (std::size_t j = 1; j <= n; ++j) {
      const auto v = parse_double(fields[j]);
      if (!v) {
        throw ParseError(path.string() + ": row " + std::to_string(row + 1) + ", column " +
                         std::to_string(j) + " is not numeric");
      }
      values.push_back(*v);
    }
    ++row;
  }
  if (row != n) throw ParseError(path.string() + ": expected " + std::to_string(n) + " rows");
  m.values = Tensor::from(n, n, std::move(values));
  return m;
}

void write_matrix_csv(const Tensor& m, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_exact(m(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace lgl
