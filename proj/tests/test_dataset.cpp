#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "hamnn/dataset.hpp"
#include "hamnn/errors.hpp"
#include "hamnn/rng.hpp"

using namespace hamnn;

namespace {

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

// donor/neighbor pair known, so the interpolation identity is checkable
// componentwise.
bool on_segment(const Dataset& ds, const Dataset& base, const SmoteProvenance& prov,
                std::size_t synth_row, double tol = 1e-12) {
  for (std::size_t c = 0; c < base.n_features(); ++c) {
    const double x0 = base.features.at(prov.donor, c);
    const double x1 = base.features.at(prov.neighbor, c);
    const double expected = x0 + prov.u * (x1 - x0);
    if (std::fabs(ds.features.at(synth_row, c) - expected) > tol) return false;
    const double lo = std::min(x0, x1) - tol, hi = std::max(x0, x1) + tol;
    if (ds.features.at(synth_row, c) < lo || ds.features.at(synth_row, c) > hi) return false;
  }
  return true;
}

Dataset tiny_dataset() {
  Dataset ds;
  ds.feature_names = {"a", "b"};
  ds.features = Tensor({10, 2});
  for (std::size_t r = 0; r < 10; ++r) {
    ds.features.at(r, 0) = static_cast<double>(r);
    ds.features.at(r, 1) = 10.0 - static_cast<double>(r);
    ds.labels.push_back(r < 2 ? 1 : 0);  // rows 0 and 1 are the minority
    ds.time_index.push_back(static_cast<long long>(r));
    ds.row_ids.push_back(static_cast<long long>(r));
  }
  return ds;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("load a small well-formed file") {
  const std::string path = temp_file("hamnn_ds_ok.csv");
  write_file(path,
             "x1,x2,default_flag,orig_period\n"
             "0.5,1.5,0,1\n"
             "-1.25,2.0,1,2\n"
             "3.0,-0.125,0,3\n");
  const Dataset ds = load_csv(path);
  CHECK(ds.n_rows() == 3);
  CHECK(ds.n_features() == 2);
  CHECK(ds.feature_names == std::vector<std::string>{"x1", "x2"});
  CHECK(ds.features.at(1, 0) == -1.25);
  CHECK(ds.labels == std::vector<int>{0, 1, 0});
  CHECK(ds.time_index == std::vector<long long>{1, 2, 3});
  std::filesystem::remove(path);
}

TEST_CASE("loader rejects bad files") {
  const std::string path = temp_file("hamnn_ds_bad.csv");

  write_file(path, "");
  CHECK_THROWS_AS(load_csv(path), io_error);

  write_file(path, "x1,default_flag,orig_period\n1.0,2,1\n");
  CHECK_THROWS_AS(load_csv(path), io_error);  // label outside {0,1}

  write_file(path, "x1,default_flag,orig_period\nabc,0,1\n");
  CHECK_THROWS_AS(load_csv(path), io_error);  // unparsable cell

  write_file(path, "x1,label,orig_period\n1.0,0,1\n");
  CHECK_THROWS_AS(load_csv(path), io_error);  // missing default_flag column

  write_file(path, "x1,default_flag,orig_period\n1.0,0\n");
  CHECK_THROWS_AS(load_csv(path), io_error);  // short row

  std::filesystem::remove(path);
}

TEST_CASE("csv round-trip preserves values") {
  RngStream rng(71);
  Dataset ds;
  ds.feature_names = {"f0", "f1", "f2"};
  ds.features = Tensor({20, 3});
  for (std::size_t i = 0; i < ds.features.size(); ++i)
    ds.features[i] = rng.normal(0.0, 3.0) * std::pow(10.0, static_cast<double>(rng.next_below(7)) - 3.0);
  for (std::size_t r = 0; r < 20; ++r) {
    ds.labels.push_back(static_cast<int>(rng.next_below(2)));
    ds.time_index.push_back(static_cast<long long>(rng.next_below(5)));
    ds.row_ids.push_back(static_cast<long long>(r));
  }
  const std::string path = temp_file("hamnn_ds_roundtrip.csv");
  write_csv(ds, path);
  const Dataset back = load_csv(path);
  CHECK(back.features == ds.features);  // %.17g round-trips doubles exactly
  CHECK(back.labels == ds.labels);
  CHECK(back.time_index == ds.time_index);
  std::filesystem::remove(path);
}

TEST_CASE("temporal split follows the cuts") {
  Dataset ds;
  ds.feature_names = {"x"};
  ds.features = Tensor({10, 1});
  for (std::size_t r = 0; r < 10; ++r) {
    ds.labels.push_back(0);
    ds.time_index.push_back(static_cast<long long>(r + 1));  // periods 1..10
    ds.row_ids.push_back(static_cast<long long>(r));
  }
  const TemporalSplit split = temporal_split(ds, 5, 8);
  CHECK(split.train == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(split.validation == std::vector<std::size_t>{4, 5, 6});
  CHECK(split.oot == std::vector<std::size_t>{7, 8, 9});

  CHECK_THROWS_AS(temporal_split(ds, 8, 5), std::invalid_argument);
  // One shared period leaves partitions empty.
  std::fill(ds.time_index.begin(), ds.time_index.end(), 3LL);
  CHECK_THROWS_AS(temporal_split(ds, 5, 8), std::invalid_argument);
}

TEST_CASE("temporal split sets are order independent") {
  RngStream rng(72);
  Dataset ds;
  ds.feature_names = {"x"};
  ds.features = Tensor({30, 1});
  for (std::size_t r = 0; r < 30; ++r) {
    ds.labels.push_back(0);
    ds.time_index.push_back(static_cast<long long>(rng.next_below(10)));
    ds.row_ids.push_back(static_cast<long long>(r));
  }
  std::vector<std::size_t> perm(30);
  for (std::size_t i = 0; i < 30; ++i) perm[i] = i;
  rng.shuffle(perm);
  const Dataset shuffled = ds.subset(perm);

  auto ids_of = [](const Dataset& d, const std::vector<std::size_t>& idx) {
    std::set<long long> ids;
    for (std::size_t i : idx) ids.insert(d.row_ids[i]);
    return ids;
  };
  const TemporalSplit a = temporal_split(ds, 4, 7);
  const TemporalSplit b = temporal_split(shuffled, 4, 7);
  CHECK(ids_of(ds, a.train) == ids_of(shuffled, b.train));
  CHECK(ids_of(ds, a.validation) == ids_of(shuffled, b.validation));
  CHECK(ids_of(ds, a.oot) == ids_of(shuffled, b.oot));
}

TEST_CASE("smote with two minority rows interpolates their segment") {
  const Dataset ds = tiny_dataset();  // 2 minority, 8 majority
  SmoteConfig cfg;
  cfg.k_neighbors = 1;
  cfg.target_ratio = 1.0;
  cfg.seed = 7;
  std::vector<SmoteProvenance> prov;
  const Dataset out = smote_oversample(ds, cfg, &prov);

  CHECK(out.n_rows() == 10 + 6);  // ratio 1.0 wants 8 minority, 2 exist
  CHECK(prov.size() == 6);
  for (std::size_t s = 0; s < prov.size(); ++s) {
    const std::size_t row = 10 + s;
    CHECK(out.labels[row] == 1);
    CHECK((prov[s].donor == 0 || prov[s].donor == 1));
    CHECK((prov[s].neighbor == 0 || prov[s].neighbor == 1));
    CHECK(prov[s].neighbor != prov[s].donor);
    CHECK(out.time_index[row] == ds.time_index[prov[s].donor]);
    CHECK(out.row_ids[row] == -1);
    CHECK(on_segment(out, ds, prov[s], row));
  }

  // Post-oversampling class ratio matches the target within one row.
  std::size_t minority = 0, majority = 0;
  for (int l : out.labels) (l == 1 ? minority : majority)++;
  CHECK(std::llabs(static_cast<long long>(minority) -
                   std::llround(cfg.target_ratio * static_cast<double>(majority))) <= 1);
}

TEST_CASE("identical minority rows synthesize exact copies") {
  Dataset ds = tiny_dataset();
  for (std::size_t c = 0; c < 2; ++c) ds.features.at(1, c) = ds.features.at(0, c);
  SmoteConfig cfg;
  cfg.k_neighbors = 1;
  cfg.seed = 3;
  const Dataset out = smote_oversample(ds, cfg);
  for (std::size_t r = 10; r < out.n_rows(); ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(out.features.at(r, c) == ds.features.at(0, c));
}

TEST_CASE("smote validates its preconditions") {
  Dataset ds = tiny_dataset();
  SmoteConfig cfg;
  cfg.k_neighbors = 2;  // only one other minority row exists
  CHECK_THROWS_AS(smote_oversample(ds, cfg), std::invalid_argument);

  ds.labels[1] = 0;  // single minority row
  cfg.k_neighbors = 1;
  CHECK_THROWS_AS(smote_oversample(ds, cfg), std::invalid_argument);

  cfg.target_ratio = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("smote leaves original rows untouched and never reduces the minority") {
  RngStream rng(73);
  Dataset ds;
  ds.feature_names = {"a", "b", "c"};
  ds.features = Tensor({60, 3});
  for (std::size_t i = 0; i < ds.features.size(); ++i) ds.features[i] = rng.normal(0, 1);
  for (std::size_t r = 0; r < 60; ++r) {
    ds.labels.push_back(r % 6 == 0 ? 1 : 0);
    ds.time_index.push_back(static_cast<long long>(r / 10));
    ds.row_ids.push_back(static_cast<long long>(r));
  }
  SmoteConfig cfg;
  cfg.k_neighbors = 3;
  cfg.target_ratio = 0.8;
  cfg.seed = 9;
  std::vector<SmoteProvenance> prov;
  const Dataset out = smote_oversample(ds, cfg, &prov);
  for (std::size_t r = 0; r < 60; ++r) {
    CHECK(out.labels[r] == ds.labels[r]);
    CHECK(out.time_index[r] == ds.time_index[r]);
    for (std::size_t c = 0; c < 3; ++c) CHECK(out.features.at(r, c) == ds.features.at(r, c));
  }
  for (std::size_t s = 0; s < prov.size(); ++s) CHECK(on_segment(out, ds, prov[s], 60 + s));
}

TEST_CASE("time folds form K-1 leakage-free pairs") {
  Dataset ds;
  ds.feature_names = {"x"};
  ds.features = Tensor({8, 1});
  for (std::size_t r = 0; r < 8; ++r) {
    ds.labels.push_back(0);
    ds.time_index.push_back(static_cast<long long>(r + 1));
    ds.row_ids.push_back(static_cast<long long>(r));
  }
  const auto pairs = time_based_folds(ds, 4);
  CHECK(pairs.size() == 3);
  CHECK(pairs[0].first == std::vector<std::size_t>{0, 1});
  CHECK(pairs[0].second == std::vector<std::size_t>{2, 3});
  CHECK(pairs[2].first.size() == 6);

  CHECK_THROWS_AS(time_based_folds(ds, 1), std::invalid_argument);
  CHECK_THROWS_AS(time_based_folds(ds, 9), std::invalid_argument);
}

TEST_CASE("fold monotonicity holds for random datasets and every K") {
  RngStream rng(74);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 2 + rng.next_below(7);
    const std::size_t n = k + rng.next_below(40);
    Dataset ds;
    ds.feature_names = {"x"};
    ds.features = Tensor({n, 1});
    for (std::size_t r = 0; r < n; ++r) {
      ds.labels.push_back(0);
      ds.time_index.push_back(static_cast<long long>(rng.next_below(12)));
      ds.row_ids.push_back(static_cast<long long>(r));
    }
    const auto pairs = time_based_folds(ds, k);
    CHECK(pairs.size() == k - 1);
    for (const auto& [train_idx, val_idx] : pairs) {
      long long max_train = -1000, min_val = 1000;
      for (std::size_t i : train_idx) max_train = std::max(max_train, ds.time_index[i]);
      for (std::size_t i : val_idx) min_val = std::min(min_val, ds.time_index[i]);
      CHECK(max_train <= min_val);
    }
  }
}

TEST_CASE("generator is deterministic and hits the base rate") {
  DriftGenConfig cfg;
  cfg.n_rows = 4000;
  cfg.n_features = 6;
  cfg.base_default_rate = 0.5;
  cfg.n_periods = 8;
  cfg.seed = 123;
  const Dataset a = synthesize_credit_data(cfg);
  const Dataset b = synthesize_credit_data(cfg);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.time_index == b.time_index);

  double rate = 0.0;
  for (int l : a.labels) rate += l;
  rate /= static_cast<double>(a.n_rows());
  CHECK(rate > 0.48);
  CHECK(rate < 0.52);

  // Periods are contiguous and cover the configured range.
  CHECK(a.time_index.front() == 0);
  CHECK(a.time_index.back() == 7);
}

TEST_CASE("generator respects the configured default rate away from one half") {
  DriftGenConfig cfg;
  cfg.n_rows = 6000;
  cfg.n_features = 8;
  cfg.base_default_rate = 0.2;
  cfg.drift_magnitude = 1.0;
  cfg.horizon_months = 60;
  cfg.n_periods = 10;
  cfg.seed = 5;
  const Dataset ds = synthesize_credit_data(cfg);
  double rate = 0.0;
  for (int l : ds.labels) rate += l;
  rate /= static_cast<double>(ds.n_rows());
  CHECK(rate == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("generator validates its configuration") {
  DriftGenConfig cfg;
  cfg.horizon_months = 24;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.horizon_months = 12;
  cfg.base_default_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.base_default_rate = 0.2;
  cfg.n_rows = 4;
  cfg.n_periods = 10;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

}  // TEST_SUITE
