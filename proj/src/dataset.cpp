#include "hamnn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hamnn/errors.hpp"
#include "hamnn/rng.hpp"

namespace hamnn {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double_cell(const std::string& cell, const std::string& context) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw io_error("unparsable numeric cell '" + cell + "' " + context);
  return value;
}

long long parse_int_cell(const std::string& cell, const std::string& context) {
  long long value = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw io_error("unparsable integer cell '" + cell + "' " + context);
  return value;
}

}  // namespace

Dataset Dataset::subset(const std::vector<std::size_t>& idx) const {
  Dataset out;
  out.feature_names = feature_names;
  const std::size_t d = n_features();
  out.features = Tensor({idx.size(), d});
  out.labels.reserve(idx.size());
  out.time_index.reserve(idx.size());
  out.row_ids.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const std::size_t src = idx[r];
    for (std::size_t c = 0; c < d; ++c) out.features.at(r, c) = features.at(src, c);
    out.labels.push_back(labels[src]);
    out.time_index.push_back(time_index[src]);
    out.row_ids.push_back(row_ids[src]);
  }
  return out;
}

void Dataset::validate() const {
  const std::size_t n = labels.size();
  if (features.rank() != 2 || features.rows() != n || time_index.size() != n ||
      row_ids.size() != n || features.cols() != feature_names.size())
    throw std::invalid_argument("Dataset: inconsistent field lengths");
  for (int l : labels)
    if (l != 0 && l != 1) throw std::invalid_argument("Dataset: labels must be 0 or 1");
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw io_error("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);

  auto column_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw io_error("'" + path + "': missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t label_col = column_of(schema.label_column);
  const std::size_t time_col = column_of(schema.time_column);

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == label_col || c == time_col) continue;
      feature_cols.push_back(c);
      feature_names.push_back(header[c]);
    }
  } else {
    for (const std::string& name : schema.feature_columns) {
      feature_cols.push_back(column_of(name));
      feature_names.push_back(name);
    }
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::vector<long long> times;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    const std::string where = "at " + path + ":" + std::to_string(line_no);
    if (cells.size() != header.size())
      throw io_error("row has " + std::to_string(cells.size()) + " cells, expected " +
                     std::to_string(header.size()) + " " + where);
    for (std::size_t c : feature_cols) values.push_back(parse_double_cell(cells[c], where));
    const long long label = parse_int_cell(cells[label_col], where);
    if (label != 0 && label != 1)
      throw io_error("label value " + std::to_string(label) + " outside {0,1} " + where);
    labels.push_back(static_cast<int>(label));
    times.push_back(parse_int_cell(cells[time_col], where));
  }

  Dataset ds;
  ds.feature_names = feature_names;
  ds.features = Tensor({labels.size(), feature_names.size()}, std::move(values));
  ds.labels = std::move(labels);
  ds.time_index = std::move(times);
  ds.row_ids.resize(ds.labels.size());
  std::iota(ds.row_ids.begin(), ds.row_ids.end(), 0LL);
  ds.validate();
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  for (std::size_t c = 0; c < ds.n_features(); ++c) out << ds.feature_names[c] << ",";
  out << "default_flag,orig_period\n";
  char buf[40];
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    for (std::size_t c = 0; c < ds.n_features(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.features.at(r, c));
      out << buf << ",";
    }
    out << ds.labels[r] << "," << ds.time_index[r] << "\n";
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

TemporalSplit temporal_split(const Dataset& ds, long long val_cut, long long oot_cut) {
  if (!(val_cut < oot_cut))
    throw std::invalid_argument("temporal_split: val_cut must be < oot_cut");
  TemporalSplit split;
  split.val_cut = val_cut;
  split.oot_cut = oot_cut;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    const long long t = ds.time_index[i];
    if (t < val_cut)
      split.train.push_back(i);
    else if (t < oot_cut)
      split.validation.push_back(i);
    else
      split.oot.push_back(i);
  }
  if (split.train.empty() || split.validation.empty() || split.oot.empty())
    throw std::invalid_argument("temporal_split: a partition is empty");
  return split;
}

void SmoteConfig::validate() const {
  if (k_neighbors < 1) throw std::invalid_argument("SmoteConfig: k_neighbors must be >= 1");
  if (!(target_ratio > 0.0 && target_ratio <= 1.0))
    throw std::invalid_argument("SmoteConfig: target_ratio must be in (0, 1]");
}

Dataset smote_oversample(const Dataset& train, const SmoteConfig& cfg,
                         std::vector<SmoteProvenance>* provenance) {
  cfg.validate();
  train.validate();
  if (provenance) provenance->clear();

  std::vector<std::size_t> minority;  // the oversampled class: label 1 (defaults)
  std::size_t n_majority = 0;
  for (std::size_t i = 0; i < train.n_rows(); ++i) {
    if (train.labels[i] == 1)
      minority.push_back(i);
    else
      ++n_majority;
  }
  if (minority.size() < 2)
    throw std::invalid_argument("smote: minority class needs at least 2 rows");
  if (cfg.k_neighbors >= minority.size())
    throw std::invalid_argument("smote: k_neighbors must be < minority count");

  const long long want =
      std::llround(cfg.target_ratio * static_cast<double>(n_majority)) -
      static_cast<long long>(minority.size());
  const std::size_t n_synthetic = want > 0 ? static_cast<std::size_t>(want) : 0;

  const std::size_t d = train.n_features();

  // Per-feature scale for the neighbor metric only; interpolation stays in
  // raw feature space.
  std::vector<double> mean(d, 0.0), inv_scale(d, 1.0);
  if (cfg.standardize && train.n_rows() > 0) {
    for (std::size_t r = 0; r < train.n_rows(); ++r)
      for (std::size_t c = 0; c < d; ++c) mean[c] += train.features.at(r, c);
    for (std::size_t c = 0; c < d; ++c) mean[c] /= static_cast<double>(train.n_rows());
    std::vector<double> var(d, 0.0);
    for (std::size_t r = 0; r < train.n_rows(); ++r)
      for (std::size_t c = 0; c < d; ++c) {
        const double dv = train.features.at(r, c) - mean[c];
        var[c] += dv * dv;
      }
    for (std::size_t c = 0; c < d; ++c) {
      const double sd = std::sqrt(var[c] / static_cast<double>(train.n_rows()));
      inv_scale[c] = sd > 0.0 ? 1.0 / sd : 0.0;  // constant features carry no distance
    }
  } else {
    std::fill(inv_scale.begin(), inv_scale.end(), 1.0);
    std::fill(mean.begin(), mean.end(), 0.0);
  }

  auto scaled_dist2 = [&](std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = (train.features.at(a, c) - train.features.at(b, c)) * inv_scale[c];
      acc += dv * dv;
    }
    return acc;
  };

  // k nearest minority neighbors of every minority row, ties broken by index.
  std::vector<std::vector<std::size_t>> neighbors(minority.size());
  for (std::size_t mi = 0; mi < minority.size(); ++mi) {
    std::vector<std::pair<double, std::size_t>> dists;
    dists.reserve(minority.size() - 1);
    for (std::size_t mj = 0; mj < minority.size(); ++mj) {
      if (mj == mi) continue;
      dists.emplace_back(scaled_dist2(minority[mi], minority[mj]), minority[mj]);
    }
    std::sort(dists.begin(), dists.end());
    neighbors[mi].reserve(cfg.k_neighbors);
    for (std::size_t k = 0; k < cfg.k_neighbors; ++k) neighbors[mi].push_back(dists[k].second);
  }

  Dataset out;
  out.feature_names = train.feature_names;
  out.features = Tensor({train.n_rows() + n_synthetic, d});
  for (std::size_t r = 0; r < train.n_rows(); ++r)
    for (std::size_t c = 0; c < d; ++c) out.features.at(r, c) = train.features.at(r, c);
  out.labels = train.labels;
  out.time_index = train.time_index;
  out.row_ids = train.row_ids;

  RngStream rng(cfg.seed);
  for (std::size_t s = 0; s < n_synthetic; ++s) {
    const std::size_t mi = static_cast<std::size_t>(rng.next_below(minority.size()));
    const std::size_t donor = minority[mi];
    const std::size_t nn = neighbors[mi][rng.next_below(cfg.k_neighbors)];
    const double u = rng.next_double();
    const std::size_t r = train.n_rows() + s;
    for (std::size_t c = 0; c < d; ++c) {
      const double x0 = train.features.at(donor, c);
      out.features.at(r, c) = x0 + u * (train.features.at(nn, c) - x0);
    }
    out.labels.push_back(1);
    out.time_index.push_back(train.time_index[donor]);
    out.row_ids.push_back(-1);
    if (provenance) provenance->push_back({donor, nn, u});
  }
  return out;
}

std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> time_based_folds(
    const Dataset& ds, std::size_t k) {
  if (k < 2) throw std::invalid_argument("time_based_folds: K must be >= 2");
  const std::size_t n = ds.n_rows();
  if (n < k) throw std::invalid_argument("time_based_folds: fewer rows than folds");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ds.time_index[a] < ds.time_index[b]; });

  // Contiguous folds of near-equal size, remainder spread over the earliest.
  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + pos, order.begin() + pos + len);
    pos += len;
  }

  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> pairs;
  std::vector<std::size_t> train_acc;
  for (std::size_t f = 0; f + 1 < k; ++f) {
    train_acc.insert(train_acc.end(), folds[f].begin(), folds[f].end());
    pairs.emplace_back(train_acc, folds[f + 1]);
  }
  return pairs;
}

void DriftGenConfig::validate() const {
  if (n_rows < 1) throw std::invalid_argument("DriftGenConfig: n_rows must be >= 1");
  if (n_features < 1) throw std::invalid_argument("DriftGenConfig: n_features must be >= 1");
  if (!(base_default_rate > 0.0 && base_default_rate < 1.0))
    throw std::invalid_argument("DriftGenConfig: base_default_rate must be in (0, 1)");
  if (!(drift_magnitude >= 0.0))
    throw std::invalid_argument("DriftGenConfig: drift_magnitude must be >= 0");
  if (n_periods < 1) throw std::invalid_argument("DriftGenConfig: n_periods must be >= 1");
  if (n_rows < n_periods)
    throw std::invalid_argument("DriftGenConfig: need at least one row per period");
  if (horizon_months != 12 && horizon_months != 36 && horizon_months != 60)
    throw std::invalid_argument("DriftGenConfig: horizon_months must be 12, 36 or 60");
}

Dataset synthesize_credit_data(const DriftGenConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_rows, d = cfg.n_features;

  RngStream master(cfg.seed);
  RngStream feat_rng = master.fork(0);
  RngStream dir_rng = master.fork(1);
  RngStream label_rng = master.fork(2);

  Dataset ds;
  ds.features = Tensor({n, d});
  for (std::size_t i = 0; i < ds.features.size(); ++i) ds.features[i] = feat_rng.normal(0.0, 1.0);

  // Coefficient plane: unit base direction and a unit orthogonal direction.
  const double kSignal = 2.0;
  std::vector<double> w0(d), v0(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) w0[c] = dir_rng.normal(0.0, 1.0);
  double n0 = std::sqrt(std::inner_product(w0.begin(), w0.end(), w0.begin(), 0.0));
  for (std::size_t c = 0; c < d; ++c) w0[c] /= n0;
  if (d >= 2) {
    for (std::size_t c = 0; c < d; ++c) v0[c] = dir_rng.normal(0.0, 1.0);
    const double proj = std::inner_product(v0.begin(), v0.end(), w0.begin(), 0.0);
    for (std::size_t c = 0; c < d; ++c) v0[c] -= proj * w0[c];
    const double nv = std::sqrt(std::inner_product(v0.begin(), v0.end(), v0.begin(), 0.0));
    if (nv > 1e-12)
      for (std::size_t c = 0; c < d; ++c) v0[c] /= nv;
  }

  // Rotation per period, proportional to drift magnitude and horizon length.
  const double kRotationPerPeriod = 0.03;
  const double rate =
      kRotationPerPeriod * cfg.drift_magnitude * (static_cast<double>(cfg.horizon_months) / 12.0);

  ds.labels.resize(n);
  ds.time_index.resize(n);
  ds.row_ids.resize(n);
  std::iota(ds.row_ids.begin(), ds.row_ids.end(), 0LL);
  for (std::size_t r = 0; r < n; ++r)
    ds.time_index[r] = static_cast<long long>(r * cfg.n_periods / n);

  ds.feature_names.resize(d);
  for (std::size_t c = 0; c < d; ++c) ds.feature_names[c] = "f" + std::to_string(c);

  // Per period: rotate the coefficients, then bisect the intercept so the
  // expected default rate matches the configured base rate.
  std::vector<double> scores(n, 0.0);
  std::size_t row = 0;
  for (std::size_t t = 0; t < cfg.n_periods; ++t) {
    const double phi = rate * static_cast<double>(t);
    std::vector<double> w(d);
    for (std::size_t c = 0; c < d; ++c)
      w[c] = kSignal * (std::cos(phi) * w0[c] + std::sin(phi) * v0[c]);

    const std::size_t begin = row;
    while (row < n && ds.time_index[row] == static_cast<long long>(t)) ++row;
    const std::size_t end = row;
    if (begin == end) continue;

    for (std::size_t r = begin; r < end; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += w[c] * ds.features.at(r, c);
      scores[r] = s;
    }

    auto mean_prob = [&](double b) {
      double acc = 0.0;
      for (std::size_t r = begin; r < end; ++r) acc += 1.0 / (1.0 + std::exp(-(scores[r] + b)));
      return acc / static_cast<double>(end - begin);
    };
    double lo = -40.0, hi = 40.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mean_prob(mid) < cfg.base_default_rate)
        lo = mid;
      else
        hi = mid;
    }
    const double b = 0.5 * (lo + hi);

    for (std::size_t r = begin; r < end; ++r) {
      const double p = 1.0 / (1.0 + std::exp(-(scores[r] + b)));
      ds.labels[r] = label_rng.next_double() < p ? 1 : 0;
    }
  }

  ds.validate();
  return ds;
}

}  // namespace hamnn
