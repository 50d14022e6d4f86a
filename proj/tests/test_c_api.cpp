#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lgl/latentgraph.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "lgl_c_api_tests";
  fs::create_directories(dir);
  return dir;
}

// 24 rows, two well separated classes, features a, b, c.
fs::path write_blobs(const std::string& name, bool reversed_columns = false) {
  const fs::path p = scratch() / name;
  std::ofstream out(p);
  out << (reversed_columns ? "id,c,b,a,dx\n" : "id,dx,a,b,c\n");
  for (int i = 0; i < 24; ++i) {
    const double s = i % 2 ? 3.0 : -3.0;
    const double a = s + 0.1 * (i % 5), b = 0.2 * (i % 3), c = -s + 0.05 * i;
    if (reversed_columns)
      out << "r" << i << ',' << c << ',' << b << ',' << a << ',' << (i % 2 ? "AD" : "CN") << '\n';
    else
      out << "r" << i << ',' << (i % 2 ? "AD" : "CN") << ',' << a << ',' << b << ',' << c << '\n';
  }
  return p;
}

lgl_config* quick_config() {
  lgl_config* cfg = nullptr;
  EXPECT_EQ(lgl_config_create(&cfg), LGL_OK);
  lgl_config_set_int(cfg, "epochs", 40);
  lgl_config_set_int(cfg, "embed_dim", 3);
  lgl_config_set_int(cfg, "workers", 1);
  return cfg;
}

}  // namespace

TEST(CApi, StatusNamesAndLastError) {
  EXPECT_STREQ(lgl_status_name(LGL_OK), "ok");
  EXPECT_NE(std::string(lgl_version()), "");
  lgl_dataset* d = nullptr;
  EXPECT_EQ(lgl_dataset_load_csv("/nonexistent/file.csv", "id", "y", nullptr, 0, &d), LGL_ERR_IO);
  EXPECT_EQ(d, nullptr);
  EXPECT_NE(std::string(lgl_last_error()).find("/nonexistent/file.csv"), std::string::npos);
  EXPECT_EQ(lgl_config_create(nullptr), LGL_ERR_INVALID_ARGUMENT);
}

TEST(CApi, ConfigKeys) {
  lgl_config* cfg = nullptr;
  ASSERT_EQ(lgl_config_create(&cfg), LGL_OK);
  int64_t iv = -1;
  ASSERT_EQ(lgl_config_get_int(cfg, "epochs", &iv), LGL_OK);
  EXPECT_EQ(iv, 600);
  lgl_config_get_int(cfg, "folds", &iv);
  EXPECT_EQ(iv, 10);
  lgl_config_get_int(cfg, "seed", &iv);
  EXPECT_EQ(iv, 0);
  double rv = 0;
  lgl_config_get_real(cfg, "lr0", &rv);
  EXPECT_EQ(rv, 0.01);
  lgl_config_get_real(cfg, "edge_probability", &rv);
  EXPECT_EQ(rv, 0.3);
  EXPECT_EQ(lgl_config_set_int(cfg, "epochz", 3), LGL_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(lgl_last_error()).find("epochz"), std::string::npos);
  EXPECT_EQ(lgl_config_set_int(cfg, "epochs", -3), LGL_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(lgl_config_set_real(cfg, "lr0", 0.02), LGL_OK);
  lgl_config_get_real(cfg, "lr0", &rv);
  EXPECT_EQ(rv, 0.02);
  const size_t widths[] = {5, 4};
  EXPECT_EQ(lgl_config_set_list(cfg, "gc_widths", widths, 2), LGL_OK);
  EXPECT_EQ(lgl_config_set_list(cfg, "embed_hidden", nullptr, 0), LGL_OK);
  EXPECT_EQ(lgl_config_set_list(cfg, "gc_widths", nullptr, 0), LGL_ERR_INVALID_ARGUMENT);
  lgl_config_destroy(cfg);
}

TEST(CApi, DatasetCreateValidates) {
  const double x[] = {1, 2, 3, 4};
  const int good[] = {0, 1}, bad[] = {0, 2};
  lgl_dataset* d = nullptr;
  EXPECT_EQ(lgl_dataset_create(x, 2, 2, bad, 2, &d), LGL_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(lgl_dataset_create(x, 2, 2, good, 2, &d), LGL_OK);
  EXPECT_EQ(lgl_dataset_rows(d), 2u);
  EXPECT_EQ(lgl_dataset_cols(d), 2u);
  EXPECT_EQ(lgl_dataset_classes(d), 2u);
  lgl_dataset_destroy(d);
  EXPECT_EQ(lgl_dataset_rows(nullptr), 0u);
}

TEST(CApi, TrainSaveLoadGivesIdenticalPredictions) {
  lgl_dataset* d = nullptr;
  ASSERT_EQ(lgl_dataset_load_csv(write_blobs("blobs.csv").c_str(), "id", "dx", nullptr, 0, &d), LGL_OK);
  EXPECT_EQ(lgl_dataset_classes(d), 2u);
  lgl_config* cfg = quick_config();
  const auto history = scratch() / "history.csv";
  lgl_model* m = nullptr;
  ASSERT_EQ(lgl_train(d, cfg, history.c_str(), &m), LGL_OK) << lgl_last_error();
  EXPECT_TRUE(fs::exists(history));
  EXPECT_EQ(lgl_model_classes(m), 2u);
  EXPECT_EQ(lgl_model_features(m), 3u);
  EXPECT_STREQ(lgl_model_feature_name(m, 2), "c");
  EXPECT_EQ(lgl_model_feature_name(m, 3), nullptr);
  EXPECT_GT(lgl_model_temperature(m), 0.0);

  const auto path = scratch() / "model.json";
  ASSERT_EQ(lgl_model_save(m, path.c_str()), LGL_OK);
  lgl_model* back = nullptr;
  ASSERT_EQ(lgl_model_load(path.c_str(), &back), LGL_OK) << lgl_last_error();

  std::vector<int> l1(24), l2(24);
  std::vector<double> p1(48), p2(48);
  ASSERT_EQ(lgl_infer(m, d, l1.data(), p1.data()), LGL_OK);
  ASSERT_EQ(lgl_infer(back, d, l2.data(), p2.data()), LGL_OK);
  EXPECT_EQ(l1, l2);
  for (std::size_t i = 0; i < 48; ++i) EXPECT_EQ(p1[i], p2[i]);
  for (std::size_t i = 0; i < 24; ++i) EXPECT_NEAR(p1[2 * i] + p1[2 * i + 1], 1.0, 1e-12);

  // same table with columns in another order
  lgl_dataset* shuffled = nullptr;
  const char* cols[] = {"c", "b", "a"};
  ASSERT_EQ(lgl_dataset_load_csv(write_blobs("reversed.csv", true).c_str(), "id", "", cols, 3,
                                 &shuffled),
            LGL_OK);
  std::vector<int> l3(24);
  std::vector<double> p3(48);
  ASSERT_EQ(lgl_infer(m, shuffled, l3.data(), p3.data()), LGL_OK) << lgl_last_error();
  for (std::size_t i = 0; i < 48; ++i) EXPECT_NEAR(p3[i], p1[i], 1e-12);

  const auto preds = scratch() / "pred.csv";
  ASSERT_EQ(lgl_infer_csv(m, shuffled, preds.c_str()), LGL_OK);
  std::ifstream in(preds);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "id,predicted,p_AD,p_CN");

  const auto graph = scratch() / "graph.csv";
  EXPECT_EQ(lgl_export_graph(m, nullptr, graph.c_str()), LGL_OK);
  EXPECT_TRUE(fs::exists(graph));

  lgl_model_destroy(back);
  lgl_model_destroy(m);
  lgl_dataset_destroy(shuffled);
  lgl_dataset_destroy(d);
  lgl_config_destroy(cfg);
}

TEST(CApi, CorruptModelFileIsAParseError) {
  const auto p = scratch() / "bad_model.json";
  std::ofstream(p) << "{\"format\": \"something-else\"}";
  lgl_model* m = nullptr;
  EXPECT_EQ(lgl_model_load(p.c_str(), &m), LGL_ERR_PARSE);
  std::ofstream(p) << "not json";
  EXPECT_EQ(lgl_model_load(p.c_str(), &m), LGL_ERR_PARSE);
  EXPECT_EQ(m, nullptr);
}

TEST(CApi, CrossValidateWritesMetrics) {
  lgl_dataset* d = nullptr;
  ASSERT_EQ(lgl_dataset_load_csv(write_blobs("cv.csv").c_str(), "id", "dx", nullptr, 0, &d), LGL_OK);
  lgl_config* cfg = quick_config();
  lgl_config_set_int(cfg, "folds", 3);
  const auto dir = scratch() / "cv_out";
  lgl_cv_summary s{};
  ASSERT_EQ(lgl_cross_validate(d, cfg, "latent", dir.c_str(), &s), LGL_OK) << lgl_last_error();
  EXPECT_EQ(s.folds, 3u);
  EXPECT_GE(s.accuracy_mean, 0.0);
  EXPECT_LE(s.accuracy_mean, 1.0);
  EXPECT_TRUE(fs::exists(dir / "metrics.json"));
  EXPECT_TRUE(fs::exists(dir / "history_fold0.csv"));
  EXPECT_EQ(lgl_cross_validate(d, cfg, "magic", nullptr, &s), LGL_ERR_INVALID_ARGUMENT);
  lgl_config_destroy(cfg);
  lgl_dataset_destroy(d);
}

TEST(CApi, RecoveryAndGradcheck) {
  lgl_config* cfg = nullptr;
  lgl_config_create(&cfg);
  lgl_config_set_int(cfg, "iterations", 300);
  lgl_recovery_summary s{};
  ASSERT_EQ(lgl_synth_recover(6, 4, cfg, nullptr, &s), LGL_OK) << lgl_last_error();
  EXPECT_TRUE(std::isfinite(s.final_mse));
  EXPECT_GT(s.edges, 0u);
  EXPECT_EQ(lgl_synth_recover(1, 4, cfg, nullptr, &s), LGL_ERR_INVALID_ARGUMENT);
  double op = 1, e2e = 1;
  ASSERT_EQ(lgl_gradcheck(0, 2, &op, &e2e), LGL_OK);
  EXPECT_LT(op, 1e-4);
  EXPECT_LT(e2e, 1e-3);
  lgl_config_destroy(cfg);
}
