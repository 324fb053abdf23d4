#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace tabpfgen;
using namespace testsupport;

namespace {

Dataset imbalanced_blobs(long n0, long n1, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n0 + n1, 2);
  std::vector<int> y;
  for (long i = 0; i < n0 + n1; ++i) {
    const int cls = i < n0 ? 0 : 1;
    x(i, 0) = (cls == 0 ? -1.5 : 1.5) + rng.normal();
    x(i, 1) = rng.normal();
    y.push_back(cls);
  }
  return make_dataset(std::move(x), std::move(y), 2);
}

}  // namespace

TEST_CASE("augment doubles the data preserving the class ratio", "[tasks]") {
  const Dataset train = imbalanced_blobs(60, 40, 1);
  const Dataset before = train;
  const Dataset out = augment(train, offset_resampler(5));
  REQUIRE(out.n() == 200);
  CHECK(out.class_histogram() == std::vector<long>{120, 80});
  // Original rows first, provenance-flagged real; the rest synthetic.
  std::vector<Eigen::Index> real_rows;
  for (Eigen::Index i = 0; i < out.n(); ++i)
    if (!out.row_is_synthetic(i)) real_rows.push_back(i);
  REQUIRE(real_rows.size() == 100);
  const Dataset real_part = subset_rows(out, real_rows);
  CHECK(real_part.features == train.features);
  CHECK(real_part.labels == train.labels);
  // Inputs are never mutated.
  CHECK(train.features == before.features);
  CHECK(train.synthetic.empty());
}

TEST_CASE("replace emits only synthetic rows with the training histogram", "[tasks]") {
  const Dataset train = imbalanced_blobs(30, 20, 2);
  const Dataset out = replace(train, offset_resampler(9));
  REQUIRE(out.n() == train.n());
  CHECK(out.class_histogram() == train.class_histogram());
  for (Eigen::Index i = 0; i < out.n(); ++i) REQUIRE(out.row_is_synthetic(i));
}

TEST_CASE("sgld replacement rows never coincide with training rows", "[tasks]") {
  const Dataset train = make_two_moons(60, 0.1, 7);
  SgldConfig cfg;
  cfg.eta = 25;
  cfg.seed = 11;
  ScorerConfig sc;
  const GenerateFn gen = [&](const Dataset& tr, const std::vector<long>& counts) {
    return synth_to_dataset(generate(tr, counts, sc, cfg), tr);
  };
  const Dataset out = replace(train, gen);
  for (Eigen::Index i = 0; i < out.n(); ++i)
    for (Eigen::Index j = 0; j < train.n(); ++j)
      REQUIRE(out.features.row(i) != train.features.row(j));
}

TEST_CASE("balance equalizes counts by adding minority synthetics", "[tasks]") {
  const Dataset train = imbalanced_blobs(90, 10, 3);
  const Dataset out = balance(train, BalanceSpec{}, offset_resampler(4));
  CHECK(out.class_histogram() == std::vector<long>{90, 90});
  long synth = 0;
  for (Eigen::Index i = 0; i < out.n(); ++i)
    if (out.row_is_synthetic(i)) {
      ++synth;
      CHECK(out.labels[static_cast<std::size_t>(i)] == 1);  // only the minority grows
    }
  CHECK(synth == 80);
}

TEST_CASE("balancing an already balanced set is a no-op", "[tasks]") {
  const Dataset train = imbalanced_blobs(25, 25, 6);
  const Dataset out = balance(train, BalanceSpec{}, offset_resampler(4));
  CHECK(out.features == train.features);
  CHECK(out.labels == train.labels);
  CHECK(out.n() == 50);
}

TEST_CASE("explicit balance targets must not shrink classes", "[tasks]") {
  const Dataset train = imbalanced_blobs(30, 10, 8);
  BalanceSpec spec;
  spec.equalize = false;
  spec.explicit_counts = {30, 5};
  CHECK_THROWS_AS(balance(train, spec, offset_resampler(1)), Error);
  spec.explicit_counts = {35, 20};
  const Dataset out = balance(train, spec, offset_resampler(1));
  CHECK(out.class_histogram() == std::vector<long>{35, 20});
}

TEST_CASE("sampling balance duplicates existing minority rows", "[tasks]") {
  const Dataset train = imbalanced_blobs(40, 10, 12);
  const Dataset out = sampling_balance(train, BalanceSpec{}, 77);
  CHECK(out.class_histogram() == std::vector<long>{40, 40});
  for (Eigen::Index i = train.n(); i < out.n(); ++i) {
    REQUIRE(out.row_is_synthetic(i));
    bool found = false;
    for (Eigen::Index j = 0; j < train.n(); ++j)
      if (out.features.row(i) == train.features.row(j)) {
        found = true;
        break;
      }
    REQUIRE(found);
  }
}

TEST_CASE("smote with u forced to zero returns class members", "[tasks]") {
  const Dataset train = imbalanced_blobs(20, 20, 9);
  const Dataset out = smote(train, {6, 6}, 3, 123, 0.0);
  REQUIRE(out.n() == 12);
  for (Eigen::Index i = 0; i < out.n(); ++i) {
    bool found = false;
    for (Eigen::Index j = 0; j < train.n(); ++j)
      if (out.features.row(i) == train.features.row(j) &&
          out.labels[static_cast<std::size_t>(i)] == train.labels[static_cast<std::size_t>(j)]) {
        found = true;
        break;
      }
    REQUIRE(found);
  }
}

TEST_CASE("1-D smote rows stay inside the class hull", "[tasks]") {
  Rng rng(14);
  Matrix x(24, 1);
  std::vector<int> y;
  for (Eigen::Index i = 0; i < 24; ++i) {
    const int cls = i < 12 ? 0 : 1;
    x(i, 0) = (cls == 0 ? -3.0 : 3.0) + rng.normal();
    y.push_back(cls);
  }
  const Dataset train = make_dataset(x, y, 2);
  const Dataset out = smote(train, {50, 50}, 5, 3);
  for (int cls = 0; cls < 2; ++cls) {
    double lo = 1e300, hi = -1e300;
    for (Eigen::Index i = 0; i < train.n(); ++i)
      if (train.labels[static_cast<std::size_t>(i)] == cls) {
        lo = std::min(lo, train.features(i, 0));
        hi = std::max(hi, train.features(i, 0));
      }
    for (Eigen::Index i = 0; i < out.n(); ++i)
      if (out.labels[static_cast<std::size_t>(i)] == cls) {
        REQUIRE(out.features(i, 0) >= lo);
        REQUIRE(out.features(i, 0) <= hi);
      }
  }
}

TEST_CASE("smote on two colinear points interpolates the segment", "[tasks]") {
  Matrix x(4, 2);
  x << 0.0, 0.0, 2.0, 1.0,  // class 0 segment
      5.0, 5.0, 6.0, 7.0;   // class 1 segment
  const Dataset train = make_dataset(x, {0, 0, 1, 1}, 2);
  const Dataset out = smote(train, {40, 40}, 1, 4);
  for (Eigen::Index i = 0; i < out.n(); ++i) {
    const int cls = out.labels[static_cast<std::size_t>(i)];
    const Eigen::RowVector2d a = x.row(2 * cls);
    const Eigen::RowVector2d b = x.row(2 * cls + 1);
    const Eigen::RowVector2d dir = (b - a).normalized();
    const Eigen::RowVector2d rel = out.features.row(i) - a;
    const double along = rel.dot(dir);
    const Eigen::RowVector2d residual = rel - along * dir;
    REQUIRE(residual.norm() < 1e-12);
    REQUIRE(along >= -1e-12);
    REQUIRE(along <= (b - a).norm() + 1e-12);
  }
}

TEST_CASE("smote rejects classes smaller than k+1", "[tasks]") {
  const Dataset train = imbalanced_blobs(10, 3, 5);
  CHECK_THROWS_MATCHES(smote(train, {0, 5}, 3, 1), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::class_too_small;
                       }));
}

TEST_CASE("an empty mask makes imputation the identity", "[tasks]") {
  const Dataset data = make_correlated_gaussian(30, 0.9, 3);
  const MissingMask mask = make_missing_mask(data.n(), data.dim(), 0.0, 1);
  ScorerConfig sc;
  SgldConfig cfg;
  cfg.eta = 10;
  const ImputeResult res = impute(data, mask, sc, cfg, EnergyVariant::core, 1.0, &data.features);
  CHECK(res.completed.features == data.features);
  REQUIRE(res.rmse.has_value());
  CHECK(*res.rmse == 0.0);
}

TEST_CASE("imputation never touches observed coordinates", "[tasks]") {
  const Dataset data = make_correlated_gaussian(60, 0.9, 8);
  const MissingMask mask = make_missing_mask(data.n(), data.dim(), 0.3, 21);
  ScorerConfig sc;
  SgldConfig cfg;
  cfg.eta = 40;
  cfg.seed = 5;
  const ImputeResult res = impute(data, mask, sc, cfg);
  for (Eigen::Index i = 0; i < data.n(); ++i)
    for (Eigen::Index j = 0; j < data.dim(); ++j)
      if (!mask.missing(i, j)) REQUIRE(res.completed.features(i, j) == data.features(i, j));
}

TEST_CASE("sgld imputation beats the column-mean baseline on correlated data", "[tasks]") {
  const Dataset truth = make_correlated_gaussian(200, 0.9, 15);
  const MissingMask mask = make_missing_mask(truth.n(), truth.dim(), 0.3, 9);
  ScorerConfig sc;
  SgldConfig cfg;
  cfg.eta = 300;
  cfg.alpha = 0.05;
  cfg.seed = 2;

  const ImputeResult ours = impute(truth, mask, sc, cfg, EnergyVariant::core, 1.0, &truth.features);
  const Dataset mean_done = mean_impute(truth, mask);
  const Standardizer stats = fit_masked_standardizer(truth.features, mask);
  const double rmse_mean = masked_rmse(mean_done, truth.features, mask, stats);
  REQUIRE(ours.rmse.has_value());
  CHECK(*ours.rmse < rmse_mean);
}

TEST_CASE("imputation re-run on its own output is stable in the degenerate case", "[tasks]") {
  // Single-class data: the soft-knn energy is constant, so with zero noise the
  // completion is exactly the projected initialization both times.
  Rng rng(19);
  Matrix x(20, 2);
  std::vector<int> y;
  for (Eigen::Index i = 0; i < 20; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    y.push_back(0);
  }
  const Dataset data = make_dataset(x, y, 1);
  const MissingMask mask = make_missing_mask(data.n(), data.dim(), 0.2, 4);
  ScorerConfig sc;
  SgldConfig cfg;
  cfg.sigma = 0.0;
  cfg.eta = 20;
  const ImputeResult first = impute(data, mask, sc, cfg);
  const ImputeResult second = impute(first.completed, mask, sc, cfg);
  CHECK(second.completed.features == first.completed.features);
}

TEST_CASE("mean imputation fills with the observed column mean", "[tasks]") {
  Matrix x(3, 2);
  x << 1.0, 9.0, 100.0, 9.0, 3.0, 9.0;
  const Dataset data = make_dataset(x, {0, 0, 0}, 1);
  MissingMask mask;
  mask.missing.setZero(3, 2);
  mask.missing(1, 0) = 1;  // hide the 100
  const Dataset out = mean_impute(data, mask);
  CHECK(out.features(1, 0) == 2.0);  // mean of 1 and 3
  CHECK(out.features(0, 0) == 1.0);

  // No mask: identity.
  MissingMask none;
  none.missing.setZero(3, 2);
  CHECK(mean_impute(data, none).features == data.features);
}

TEST_CASE("mean imputation of standardized data fills with zeros", "[tasks]") {
  const Dataset raw = make_correlated_gaussian(50, 0.5, 22);
  Dataset data = raw;
  data.features = fit_standardizer(raw.features).apply(raw.features);
  MissingMask mask = make_missing_mask(data.n(), data.dim(), 0.25, 6);
  // Standardize, then re-fit on the observed cells: imputed values sit at the
  // observed-cell mean, which is near zero but not exactly; compare against
  // that exact mean instead.
  const Standardizer stats = fit_masked_standardizer(data.features, mask);
  const Dataset out = mean_impute(data, mask);
  for (Eigen::Index i = 0; i < data.n(); ++i)
    for (Eigen::Index j = 0; j < data.dim(); ++j)
      if (mask.missing(i, j)) REQUIRE(out.features(i, j) == stats.means(j));
}

TEST_CASE("a fully missing column is rejected", "[tasks]") {
  const Dataset data = make_correlated_gaussian(10, 0.5, 2);
  MissingMask mask;
  mask.missing.setZero(data.n(), data.dim());
  for (Eigen::Index i = 0; i < data.n(); ++i) mask.missing(i, 1) = 1;
  CHECK_THROWS_MATCHES(mean_impute(data, mask), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::column_all_missing;
                       }));
}

TEST_CASE("impute requires fully observed context rows per class", "[tasks]") {
  Matrix x(4, 2);
  x << 0.0, 0.0, 1.0, 1.0, 5.0, 5.0, 6.0, 6.0;
  const Dataset data = make_dataset(x, {0, 0, 1, 1}, 2);
  MissingMask mask;
  mask.missing.setZero(4, 2);
  mask.missing(2, 0) = 1;  // both class-1 rows incomplete
  mask.missing(3, 1) = 1;
  ScorerConfig sc;
  SgldConfig cfg;
  cfg.eta = 5;
  CHECK_THROWS_MATCHES(impute(data, mask, sc, cfg), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::missing_class;
                       }));
}

TEST_CASE("missing masks hit the requested fraction exactly", "[tasks]") {
  const MissingMask m = make_missing_mask(40, 5, 0.3, 11);
  CHECK(m.count() == 60);  // round(0.3 * 200)
  const MissingMask m2 = make_missing_mask(40, 5, 0.3, 11);
  Matrix a = m.missing.cast<double>();
  Matrix b = m2.missing.cast<double>();
  CHECK(a == b);  // seeded determinism
}
