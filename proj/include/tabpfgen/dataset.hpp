#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tabpfgen/error.hpp"
#include "tabpfgen/random.hpp"

namespace tabpfgen {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline std::vector<std::string> default_feature_names(Eigen::Index dim) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index j = 0; j < dim; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

inline std::vector<std::string> default_label_names(int class_count) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(class_count));
  for (int k = 0; k < class_count; ++k) names.push_back(std::to_string(k));
  return names;
}

// Rows of real-valued features with dense integer class ids. `label_names`
// keeps the original label text per class id so CSV exports round-trip.
// `synthetic` is row provenance: empty means all-real.
struct Dataset {
  Matrix features;                         // n x D
  std::vector<int> labels;                 // values in [0, class_count)
  std::vector<std::string> feature_names;  // D entries
  std::vector<std::string> label_names;    // class id -> original label text
  std::string label_name = "label";
  int class_count = 0;
  bool partial = false;  // set when a class id may have no rows (e.g. split halves)
  std::vector<std::uint8_t> synthetic;

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }

  std::vector<long> class_histogram() const {
    std::vector<long> h(static_cast<std::size_t>(class_count), 0);
    for (int y : labels) ++h[static_cast<std::size_t>(y)];
    return h;
  }

  bool row_is_synthetic(Eigen::Index row) const {
    return !synthetic.empty() && synthetic[static_cast<std::size_t>(row)] != 0;
  }

  void validate() const {
    require(class_count >= 1, ErrorCode::bad_argument, "dataset: class_count must be >= 1");
    require(dim() >= 1, ErrorCode::bad_argument, "dataset: needs at least one feature column");
    require(static_cast<Eigen::Index>(labels.size()) == n(), ErrorCode::bad_argument,
            "dataset: labels.size() != row count");
    require(features.allFinite(), ErrorCode::bad_argument, "dataset: non-finite feature entry");
    require(feature_names.size() == static_cast<std::size_t>(dim()), ErrorCode::bad_argument,
            "dataset: feature_names.size() != column count");
    require(label_names.size() == static_cast<std::size_t>(class_count), ErrorCode::bad_argument,
            "dataset: label_names.size() != class_count");
    require(synthetic.empty() || synthetic.size() == static_cast<std::size_t>(n()),
            ErrorCode::bad_argument, "dataset: provenance size mismatch");
    std::vector<bool> seen(static_cast<std::size_t>(class_count), false);
    for (int y : labels) {
      require(y >= 0 && y < class_count, ErrorCode::label_out_of_range,
              "dataset: label " + std::to_string(y) + " out of range");
      seen[static_cast<std::size_t>(y)] = true;
    }
    if (!partial) {
      for (int k = 0; k < class_count; ++k)
        require(seen[static_cast<std::size_t>(k)], ErrorCode::missing_class,
                "dataset: class " + std::to_string(k) + " has no rows");
    }
  }
};

inline Dataset make_dataset(Matrix features, std::vector<int> labels, int class_count) {
  Dataset d;
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.class_count = class_count;
  d.feature_names = default_feature_names(d.dim());
  d.label_names = default_label_names(class_count);
  d.validate();
  return d;
}

// Row subset preserving schema; `partial` is recomputed from what survives.
inline Dataset subset_rows(const Dataset& d, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), d.dim());
  out.labels.reserve(rows.size());
  if (!d.synthetic.empty()) out.synthetic.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = d.features.row(rows[i]);
    out.labels.push_back(d.labels[static_cast<std::size_t>(rows[i])]);
    if (!d.synthetic.empty()) out.synthetic.push_back(d.synthetic[static_cast<std::size_t>(rows[i])]);
  }
  out.feature_names = d.feature_names;
  out.label_names = d.label_names;
  out.label_name = d.label_name;
  out.class_count = d.class_count;
  std::vector<bool> seen(static_cast<std::size_t>(d.class_count), false);
  for (int y : out.labels) seen[static_cast<std::size_t>(y)] = true;
  out.partial = std::find(seen.begin(), seen.end(), false) != seen.end();
  return out;
}

// Appends rows of `extra` to `base`; schemas must agree. Provenance is kept
// when either side carries it (absent flags default to real).
inline Dataset concat_rows(const Dataset& base, const Dataset& extra) {
  require(base.dim() == extra.dim(), ErrorCode::bad_argument, "concat: column count mismatch");
  require(base.class_count == extra.class_count, ErrorCode::bad_argument,
          "concat: class_count mismatch");
  Dataset out = base;
  const Eigen::Index n0 = base.n();
  out.features.conservativeResize(n0 + extra.n(), base.dim());
  out.features.bottomRows(extra.n()) = extra.features;
  out.labels.insert(out.labels.end(), extra.labels.begin(), extra.labels.end());
  if (!base.synthetic.empty() || !extra.synthetic.empty()) {
    out.synthetic = base.synthetic;
    out.synthetic.resize(static_cast<std::size_t>(n0), 0);
    if (!extra.synthetic.empty())
      out.synthetic.insert(out.synthetic.end(), extra.synthetic.begin(), extra.synthetic.end());
    else
      out.synthetic.insert(out.synthetic.end(), static_cast<std::size_t>(extra.n()), 0);
  }
  std::vector<bool> seen(static_cast<std::size_t>(out.class_count), false);
  for (int y : out.labels) seen[static_cast<std::size_t>(y)] = true;
  out.partial = std::find(seen.begin(), seen.end(), false) != seen.end();
  return out;
}

// Per-column affine map to zero mean / unit population std. Constant columns
// (std == 0) are flagged and passed through unchanged by apply/invert.
struct Standardizer {
  Vector means;
  Vector stds;
  std::vector<std::uint8_t> constant;

  Eigen::Index dim() const { return means.size(); }
  bool is_constant(Eigen::Index j) const { return constant[static_cast<std::size_t>(j)] != 0; }

  Matrix apply(const Matrix& x) const {
    require(x.cols() == dim(), ErrorCode::bad_argument, "standardizer: column count mismatch");
    Matrix out = x;
    for (Eigen::Index j = 0; j < dim(); ++j) {
      if (is_constant(j)) continue;
      out.col(j) = (x.col(j).array() - means(j)) / stds(j);
    }
    return out;
  }

  Matrix invert(const Matrix& z) const {
    require(z.cols() == dim(), ErrorCode::bad_argument, "standardizer: column count mismatch");
    Matrix out = z;
    for (Eigen::Index j = 0; j < dim(); ++j) {
      if (is_constant(j)) continue;
      out.col(j) = z.col(j).array() * stds(j) + means(j);
    }
    return out;
  }
};

inline Standardizer fit_standardizer(const Matrix& x) {
  require(x.rows() >= 1, ErrorCode::bad_argument, "fit_standardizer: empty matrix");
  Standardizer s;
  const double n = static_cast<double>(x.rows());
  s.means = x.colwise().mean();
  s.stds.resize(x.cols());
  s.constant.assign(static_cast<std::size_t>(x.cols()), 0);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.means(j)).square().sum() / n;
    s.stds(j) = std::sqrt(var);
    if (s.stds(j) == 0.0) s.constant[static_cast<std::size_t>(j)] = 1;
  }
  return s;
}

inline Standardizer fit_standardizer(const Dataset& d) { return fit_standardizer(d.features); }

struct SplitSpec {
  double test_fraction = 0.5;
  bool stratified = true;
  std::uint64_t seed = 0;
};

// Partitions rows into (train, test). Stratified mode shuffles each class
// separately so per-class counts land within one row of the target fraction.
// Output rows keep their original relative order.
inline std::pair<Dataset, Dataset> stratified_split(const Dataset& d, const SplitSpec& spec) {
  require(spec.test_fraction > 0.0 && spec.test_fraction < 1.0, ErrorCode::bad_argument,
          "split: test_fraction must lie in (0, 1)");
  Rng rng(spec.seed);
  std::vector<Eigen::Index> test_rows, train_rows;
  if (spec.stratified) {
    for (int k = 0; k < d.class_count; ++k) {
      std::vector<Eigen::Index> rows;
      for (Eigen::Index i = 0; i < d.n(); ++i)
        if (d.labels[static_cast<std::size_t>(i)] == k) rows.push_back(i);
      if (rows.empty() && d.partial) continue;
      require(rows.size() >= 2, ErrorCode::class_too_small,
              "split: class " + std::to_string(k) + " needs at least 2 rows for stratification");
      rng.shuffle(rows);
      const auto n_test = static_cast<std::size_t>(
          std::llround(static_cast<double>(rows.size()) * spec.test_fraction));
      test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + static_cast<long>(n_test));
      train_rows.insert(train_rows.end(), rows.begin() + static_cast<long>(n_test), rows.end());
    }
  } else {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(d.n()));
    for (Eigen::Index i = 0; i < d.n(); ++i) rows[static_cast<std::size_t>(i)] = i;
    rng.shuffle(rows);
    const auto n_test = static_cast<std::size_t>(
        std::llround(static_cast<double>(rows.size()) * spec.test_fraction));
    test_rows.assign(rows.begin(), rows.begin() + static_cast<long>(n_test));
    train_rows.assign(rows.begin() + static_cast<long>(n_test), rows.end());
  }
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  return {subset_rows(d, train_rows), subset_rows(d, test_rows)};
}

// Two interleaved unit half-circles; the second moon is the reflected arc
// whose lowest point sits at (1, -0.5). Gaussian noise is added per
// coordinate, drawn row-major from the seed.
inline Dataset make_two_moons(Eigen::Index n, double noise_std, std::uint64_t seed) {
  require(n >= 2, ErrorCode::bad_argument, "two_moons: n must be >= 2");
  require(noise_std >= 0.0, ErrorCode::bad_argument, "two_moons: noise_std must be >= 0");
  const Eigen::Index n1 = n / 2;
  const Eigen::Index n0 = n - n1;
  Matrix x(n, 2);
  std::vector<int> y(static_cast<std::size_t>(n), 0);
  const double pi = 3.14159265358979323846;
  for (Eigen::Index i = 0; i < n0; ++i) {
    const double t = n0 > 1 ? pi * static_cast<double>(i) / static_cast<double>(n0 - 1) : 0.0;
    x(i, 0) = std::cos(t);
    x(i, 1) = std::sin(t);
  }
  for (Eigen::Index i = 0; i < n1; ++i) {
    const double t = n1 > 1 ? pi * static_cast<double>(i) / static_cast<double>(n1 - 1) : 0.0;
    x(n0 + i, 0) = 1.0 - std::cos(t);
    x(n0 + i, 1) = 0.5 - std::sin(t);
    y[static_cast<std::size_t>(n0 + i)] = 1;
  }
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) x(i, j) += noise_std * rng.normal();
  return make_dataset(std::move(x), std::move(y), 2);
}

// K spherical Gaussians with a shared std; exactly n_per_class rows per
// class, grouped by class, draws ordered (class, row, coordinate).
inline Dataset make_gaussian_mixture(const Matrix& means, double shared_std,
                                     Eigen::Index n_per_class, std::uint64_t seed) {
  require(shared_std > 0.0, ErrorCode::bad_argument, "gaussian_mixture: shared_std must be > 0");
  require(n_per_class >= 1, ErrorCode::bad_argument,
          "gaussian_mixture: n_per_class of 0 would make an empty dataset");
  const auto k_count = static_cast<int>(means.rows());
  require(k_count >= 1, ErrorCode::bad_argument, "gaussian_mixture: needs at least one mean");
  Matrix x(means.rows() * n_per_class, means.cols());
  std::vector<int> y;
  y.reserve(static_cast<std::size_t>(x.rows()));
  Rng rng(seed);
  Eigen::Index row = 0;
  for (int k = 0; k < k_count; ++k) {
    for (Eigen::Index i = 0; i < n_per_class; ++i, ++row) {
      for (Eigen::Index j = 0; j < means.cols(); ++j)
        x(row, j) = means(k, j) + shared_std * rng.normal();
      y.push_back(k);
    }
  }
  return make_dataset(std::move(x), std::move(y), k_count);
}

}  // namespace tabpfgen
