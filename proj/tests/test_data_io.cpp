#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lgl/data_io.hpp"
#include "lgl/errors.hpp"
#include "lgl/random.hpp"
#include "oracles.hpp"

using namespace lgl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lgl_data_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& body) {
  const fs::path p = scratch(name);
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST(LoadCsv, ImputesMissingCellsWithColumnMean) {
  const auto p = write_file("missing.csv",
                            "pid,dx,a,b\n"
                            "p1,CN,1.0,NA\n"
                            "p2,AD,,4\n"
                            "p3,MCI,3.0,8\n");
  TabularDataset t = load_csv(p, {"pid", "dx", {}});
  ASSERT_EQ(t.features.shape(), (Shape{3, 2}));
  EXPECT_EQ(t.feature_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.ids, (std::vector<std::string>{"p1", "p2", "p3"}));
  EXPECT_EQ(t.imputed_cells, 2u);
  EXPECT_DOUBLE_EQ(t.features(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(t.features(0, 1), 6.0);
  // lexicographic: AD, CN, MCI
  EXPECT_EQ(t.class_names, (std::vector<std::string>{"AD", "CN", "MCI"}));
  EXPECT_EQ(t.labels, (std::vector<int>{1, 0, 2}));
}

TEST(LoadCsv, NumericLabelsSortNumerically) {
  const auto p = write_file("numeric.csv",
                            "x,y\n1,10\n2,2\n3,2.0\n4,\n5,-1\n");
  TabularDataset t = load_csv(p, {"", "y", {}});
  EXPECT_EQ(t.dropped_rows, 1u);
  EXPECT_EQ(t.class_names.size(), 3u);
  EXPECT_EQ(t.labels, (std::vector<int>{2, 1, 1, 0}));
  // ids are file row numbers, so the dropped row leaves a gap
  EXPECT_EQ(t.ids, (std::vector<std::string>{"0", "1", "2", "4"}));
}

TEST(LoadCsv, SelectedFeaturesAndUnlabeled) {
  const auto p = write_file("select.csv", "id,c,b,a\nr1,1,2,3\nr2,4,5,6\n");
  TabularDataset t = load_csv(p, {"id", "", {"a", "c"}});
  EXPECT_TRUE(t.labels.empty());
  EXPECT_TRUE(t.class_names.empty());
  ASSERT_EQ(t.features.shape(), (Shape{2, 2}));
  EXPECT_EQ(t.features(1, 0), 6.0);
  EXPECT_EQ(t.features(1, 1), 4.0);
}

TEST(LoadCsv, ErrorsNameTheProblem) {
  const auto bad = write_file("bad.csv", "id,y,a\nr1,0,hello\n");
  try {
    load_csv(bad, {"id", "y", {}});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("hello"), std::string::npos);
  }
  EXPECT_THROW(load_csv(bad, {"id", "label", {}}), ParseError);
  EXPECT_THROW(load_csv(scratch("does_not_exist.csv"), {}), IoError);
  const auto ragged = write_file("ragged.csv", "id,y,a\nr1,0\n");
  EXPECT_THROW(load_csv(ragged, {"id", "y", {}}), ParseError);
}

TEST(SaveCsv, RoundTripsExactly) {
  Rng rng(1);
  TabularDataset t;
  t.ids = {"a", "b", "c"};
  t.features = oracle::random_tensor(3, 2, rng, -1e3, 1e3);
  t.labels = {1, 0, 1};
  t.class_names = {"neg", "pos"};
  t.feature_names = {"f1", "f2"};
  const auto p = scratch("roundtrip.csv");
  save_csv(t, p);
  TabularDataset back = load_csv(p, {"id", "label", {}});
  EXPECT_EQ(back.ids, t.ids);
  EXPECT_EQ(back.labels, t.labels);
  EXPECT_EQ(back.class_names, t.class_names);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(back.features.values()[i], t.features.values()[i]);

  t.labels.clear();
  t.class_names.clear();
  save_csv(t, p);
  back = load_csv(p, {"id", "", {}});
  EXPECT_EQ(back.features.rows(), 3u);
  EXPECT_EQ(back.feature_names, t.feature_names);
}

TEST(Quantize, BinsAndEdges) {
  const std::vector<double> edges{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> v{0.0, 0.5, 1.0, 2.999, 3.0};
  EXPECT_EQ(quantize_labels(v, edges), (std::vector<int>{0, 0, 1, 2, 2}));
  const std::vector<double> out{3.5};
  EXPECT_THROW(quantize_labels(out, edges), ContractError);
  const std::vector<double> unsorted{1.0, 0.0};
  EXPECT_THROW(quantize_labels(v, unsorted), ContractError);
}

TEST(Standardizer, ZeroMeanUnitVarianceAndConstantColumns) {
  Rng rng(2);
  Tensor x = oracle::random_tensor(50, 3, rng, -5, 10);
  for (std::size_t i = 0; i < 50; ++i) x.mutable_values()[i * 3 + 1] = 4.2;
  std::vector<std::size_t> constant;
  Tensor z = standardize(x, &constant);
  EXPECT_EQ(constant, (std::vector<std::size_t>{1}));
  for (std::size_t j = 0; j < 3; ++j) {
    double m = 0, s = 0;
    for (std::size_t i = 0; i < 50; ++i) m += z(i, j) / 50;
    for (std::size_t i = 0; i < 50; ++i) s += (z(i, j) - m) * (z(i, j) - m) / 50;
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(s, j == 1 ? 0.0 : 1.0, 1e-12);
  }
  EXPECT_THROW(standardize(Tensor::zeros(1, 3)), ContractError);
  Standardizer fit = Standardizer::fit(x);
  EXPECT_THROW(fit.apply(Tensor::zeros(2, 4)), DimensionError);
}

TEST(Adjacency, ExportAndLoadRoundTrip) {
  Tensor a = Tensor::from(3, 3, {0.9, 0.123456789, 0.0, 0.123456789, 0.9, 1e-7, 0.0, 1e-7, 0.9});
  const std::vector<std::string> ids{"x", "y", "z"};
  const auto p = scratch("adj.csv");
  export_adjacency(a, ids, p);
  LabeledMatrix m = load_adjacency(p);
  EXPECT_EQ(m.ids, ids);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(m.values.values()[i], a.values()[i], 5e-6 * std::abs(a.values()[i]) + 1e-12);
  EXPECT_THROW(export_adjacency(a, std::vector<std::string>{"x"}, p), DimensionError);
}
