#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tabpfgen/dataset.hpp"
#include "tabpfgen/error.hpp"
#include "tabpfgen/random.hpp"
#include "tabpfgen/sampler.hpp"

namespace tabpfgen {

// Produces synthetic rows for the requested per-class counts, sharing the
// training schema and flagged as synthetic. Tasks are written against this
// signature so any generator (sgld-based, smote, resampling) plugs in.
using GenerateFn = std::function<Dataset(const Dataset& train, const std::vector<long>& counts)>;

// Doubles the training set with synthetic rows matching the real per-class
// counts. Original rows come first and keep provenance flag 0.
inline Dataset augment(const Dataset& train, const GenerateFn& gen) {
  require(train.n() >= 1, ErrorCode::bad_argument, "augment: empty training set");
  const Dataset synth = gen(train, train.class_histogram());
  Dataset base = train;
  base.synthetic.assign(static_cast<std::size_t>(base.n()), 0);
  return concat_rows(base, synth);
}

// Replaces the training set with synthetic rows of the same class histogram.
inline Dataset replace(const Dataset& train, const GenerateFn& gen) {
  require(train.n() >= 1, ErrorCode::bad_argument, "replace: empty training set");
  return gen(train, train.class_histogram());
}

struct BalanceSpec {
  bool equalize = true;
  std::vector<long> explicit_counts;  // used when equalize == false
};

inline std::vector<long> balance_deficit(const Dataset& train, const BalanceSpec& spec) {
  const auto hist = train.class_histogram();
  std::vector<long> target;
  if (spec.equalize) {
    const long top = *std::max_element(hist.begin(), hist.end());
    target.assign(hist.size(), top);
  } else {
    require(spec.explicit_counts.size() == hist.size(), ErrorCode::bad_argument,
            "balance: one target count per class required");
    target = spec.explicit_counts;
    for (std::size_t k = 0; k < hist.size(); ++k)
      require(target[k] >= hist[k], ErrorCode::bad_argument,
              "balance: target for class " + std::to_string(k) +
                  " is below the current count (generation only adds rows)");
  }
  std::vector<long> need(hist.size());
  for (std::size_t k = 0; k < hist.size(); ++k) need[k] = target[k] - hist[k];
  return need;
}

// Tops up minority classes with synthetic rows until every class reaches the
// target count. Already-balanced input is returned unchanged.
inline Dataset balance(const Dataset& train, const BalanceSpec& spec, const GenerateFn& gen) {
  require(train.class_count >= 2, ErrorCode::bad_argument, "balance: needs at least two classes");
  const auto need = balance_deficit(train, spec);
  if (std::all_of(need.begin(), need.end(), [](long c) { return c == 0; })) return train;
  const Dataset synth = gen(train, need);
  Dataset base = train;
  base.synthetic.assign(static_cast<std::size_t>(base.n()), 0);
  return concat_rows(base, synth);
}

// The resampling baseline: duplicates seeded-uniform rows of each deficient
// class (sampling with replacement) until the target counts are met.
inline Dataset sampling_balance(const Dataset& train, const BalanceSpec& spec, std::uint64_t seed) {
  require(train.class_count >= 2, ErrorCode::bad_argument, "balance: needs at least two classes");
  const auto need = balance_deficit(train, spec);
  if (std::all_of(need.begin(), need.end(), [](long c) { return c == 0; })) return train;

  Rng rng(seed);
  std::vector<Eigen::Index> picked;
  for (int k = 0; k < train.class_count; ++k) {
    if (need[static_cast<std::size_t>(k)] == 0) continue;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < train.n(); ++i)
      if (train.labels[static_cast<std::size_t>(i)] == k) rows.push_back(i);
    require(!rows.empty(), ErrorCode::missing_class,
            "balance: class " + std::to_string(k) + " has no rows to resample");
    for (long c = 0; c < need[static_cast<std::size_t>(k)]; ++c)
      picked.push_back(rows[rng.index(rows.size())]);
  }
  Dataset extra = subset_rows(train, picked);
  extra.synthetic.assign(picked.size(), 1);
  Dataset base = train;
  base.synthetic.assign(static_cast<std::size_t>(base.n()), 0);
  return concat_rows(base, extra);
}

// Resampling counterpart of generate(): per-class bootstrap rows, usable as a
// GenerateFn for the replace/augment protocols.
inline Dataset sampling_generate(const Dataset& train, const std::vector<long>& counts,
                                 std::uint64_t seed) {
  require(counts.size() == static_cast<std::size_t>(train.class_count), ErrorCode::bad_argument,
          "sampling: one count per class required");
  Rng rng(seed);
  std::vector<Eigen::Index> picked;
  for (int k = 0; k < train.class_count; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0) continue;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < train.n(); ++i)
      if (train.labels[static_cast<std::size_t>(i)] == k) rows.push_back(i);
    require(!rows.empty(), ErrorCode::missing_class,
            "sampling: class " + std::to_string(k) + " has no rows");
    for (long c = 0; c < counts[static_cast<std::size_t>(k)]; ++c)
      picked.push_back(rows[rng.index(rows.size())]);
  }
  Dataset out = subset_rows(train, picked);
  out.synthetic.assign(picked.size(), 1);
  return out;
}

// Classic SMOTE: each synthetic row interpolates a seeded-uniform class member
// x_i toward one of its k nearest same-class neighbours x_j,
//   synth = x_i + u * (x_j - x_i),  u ~ Uniform(0, 1).
// Neighbour distances are Euclidean in standardized space; interpolation
// happens on the raw features. `u_override` pins u for tests.
inline Dataset smote(const Dataset& train, const std::vector<long>& counts, int k,
                     std::uint64_t seed, std::optional<double> u_override = std::nullopt) {
  require(counts.size() == static_cast<std::size_t>(train.class_count), ErrorCode::bad_argument,
          "smote: one count per class required");
  require(k >= 1, ErrorCode::bad_argument, "smote: k must be >= 1");

  const Standardizer stdzr = fit_standardizer(train);
  const Matrix z = stdzr.apply(train.features);

  long total = 0;
  for (long c : counts) total += c;
  Matrix out_x(total, train.dim());
  std::vector<int> out_y;
  out_y.reserve(static_cast<std::size_t>(total));

  Rng rng(seed);
  Eigen::Index row = 0;
  for (int cls = 0; cls < train.class_count; ++cls) {
    const long want = counts[static_cast<std::size_t>(cls)];
    if (want == 0) continue;
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < train.n(); ++i)
      if (train.labels[static_cast<std::size_t>(i)] == cls) members.push_back(i);
    require(static_cast<long>(members.size()) >= k + 1, ErrorCode::class_too_small,
            "smote: class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                " rows, needs at least k+1 = " + std::to_string(k + 1));

    // k nearest same-class neighbours per member; ties break on row index.
    std::vector<std::vector<Eigen::Index>> neighbours(members.size());
    for (std::size_t a = 0; a < members.size(); ++a) {
      std::vector<std::pair<double, Eigen::Index>> dist;
      dist.reserve(members.size() - 1);
      for (std::size_t b = 0; b < members.size(); ++b) {
        if (a == b) continue;
        dist.emplace_back((z.row(members[a]) - z.row(members[b])).norm(), members[b]);
      }
      std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
      neighbours[a].reserve(static_cast<std::size_t>(k));
      for (int t = 0; t < k; ++t) neighbours[a].push_back(dist[static_cast<std::size_t>(t)].second);
    }

    for (long c = 0; c < want; ++c, ++row) {
      const std::size_t a = rng.index(members.size());
      const Eigen::Index j = neighbours[a][rng.index(static_cast<std::size_t>(k))];
      const double u = u_override ? *u_override : rng.uniform();
      out_x.row(row) =
          train.features.row(members[a]) + u * (train.features.row(j) - train.features.row(members[a]));
      out_y.push_back(cls);
    }
  }

  Dataset d;
  d.features = std::move(out_x);
  d.labels = std::move(out_y);
  d.feature_names = train.feature_names;
  d.label_names = train.label_names;
  d.label_name = train.label_name;
  d.class_count = train.class_count;
  d.synthetic.assign(static_cast<std::size_t>(total), 1);
  std::vector<bool> seen(static_cast<std::size_t>(train.class_count), false);
  for (int y : d.labels) seen[static_cast<std::size_t>(y)] = true;
  d.partial = std::find(seen.begin(), seen.end(), false) != seen.end();
  return d;
}

struct MissingMask {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> missing;  // true = missing
  double missing_fraction = 0.0;

  long count() const {
    long c = 0;
    for (Eigen::Index i = 0; i < missing.rows(); ++i)
      for (Eigen::Index j = 0; j < missing.cols(); ++j) c += missing(i, j) ? 1 : 0;
    return c;
  }
};

// Marks exactly round(fraction * n * D) uniformly chosen cells as missing.
inline MissingMask make_missing_mask(Eigen::Index n, Eigen::Index dim, double fraction,
                                     std::uint64_t seed) {
  require(fraction >= 0.0 && fraction < 1.0, ErrorCode::bad_argument,
          "mask: missing fraction must lie in [0, 1)");
  MissingMask m;
  m.missing.setZero(n, dim);
  m.missing_fraction = fraction;
  const long total = n * dim;
  const long want = std::llround(fraction * static_cast<double>(total));
  std::vector<long> cells(static_cast<std::size_t>(total));
  for (long i = 0; i < total; ++i) cells[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(cells);
  for (long i = 0; i < want; ++i) {
    const long cell = cells[static_cast<std::size_t>(i)];
    m.missing(cell / dim, cell % dim) = 1;
  }
  return m;
}

// Per-column mean/std over the observed cells only.
inline Standardizer fit_masked_standardizer(const Matrix& x, const MissingMask& mask) {
  Standardizer s;
  s.means.resize(x.cols());
  s.stds.resize(x.cols());
  s.constant.assign(static_cast<std::size_t>(x.cols()), 0);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double sum = 0.0;
    long cnt = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (!mask.missing(i, j)) {
        sum += x(i, j);
        ++cnt;
      }
    require(cnt > 0, ErrorCode::column_all_missing,
            "impute: column " + std::to_string(j) + " has no observed entries");
    const double mean = sum / static_cast<double>(cnt);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (!mask.missing(i, j)) ss += (x(i, j) - mean) * (x(i, j) - mean);
    s.means(j) = mean;
    s.stds(j) = std::sqrt(ss / static_cast<double>(cnt));
    if (s.stds(j) == 0.0) s.constant[static_cast<std::size_t>(j)] = 1;
  }
  return s;
}

// Replaces each missing cell with its column mean over observed cells.
inline Dataset mean_impute(const Dataset& data, const MissingMask& mask) {
  require(mask.missing.rows() == data.n() && mask.missing.cols() == data.dim(),
          ErrorCode::bad_argument, "impute: mask shape mismatch");
  const Standardizer stats = fit_masked_standardizer(data.features, mask);
  Dataset out = data;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    for (Eigen::Index j = 0; j < data.dim(); ++j)
      if (mask.missing(i, j)) out.features(i, j) = stats.means(j);
  return out;
}

struct ImputeResult {
  Dataset completed;
  std::optional<double> rmse;  // standardized space, over masked cells
  SgldTrace trace;
};

// Projected Langevin imputation: rows with missing cells form the synthetic
// batch (conditioned on their labels), fully observed rows form the context.
// Missing cells start at the column mean; observed coordinates are reset to
// their true standardized values after every SGLD update. The completion is
// the final projected state (the AUC-guided snapshot selection belongs to
// generation, where the monitor carries signal; here it saturates). RMSE
// against the optional ground truth is measured in standardized space over
// masked cells.
inline ImputeResult impute(const Dataset& data, const MissingMask& mask,
                           const ScorerConfig& scorer_cfg, const SgldConfig& sgld_cfg,
                           EnergyVariant variant = EnergyVariant::core, double swap_weight = 1.0,
                           const Matrix* ground_truth = nullptr) {
  data.validate();
  require(mask.missing.rows() == data.n() && mask.missing.cols() == data.dim(),
          ErrorCode::bad_argument, "impute: mask shape mismatch");
  if (ground_truth)
    require(ground_truth->rows() == data.n() && ground_truth->cols() == data.dim(),
            ErrorCode::bad_argument, "impute: ground truth shape mismatch");

  std::vector<Eigen::Index> holey, complete;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < data.dim(); ++j) any = any || mask.missing(i, j);
    (any ? holey : complete).push_back(i);
  }

  ImputeResult res;
  if (holey.empty()) {
    res.completed = data;
    if (ground_truth) res.rmse = 0.0;
    return res;
  }
  require(!complete.empty(), ErrorCode::missing_class,
          "impute: no fully observed rows to condition on");

  const Standardizer stats = fit_masked_standardizer(data.features, mask);

  // Context: fully observed rows. Every class among the incomplete rows needs
  // at least one fully observed representative.
  std::vector<bool> ctx_has(static_cast<std::size_t>(data.class_count), false);
  for (Eigen::Index i : complete) ctx_has[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)])] = true;
  for (Eigen::Index i : holey)
    require(ctx_has[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)])],
            ErrorCode::missing_class,
            "impute: class " + std::to_string(data.labels[static_cast<std::size_t>(i)]) +
                " has no fully observed rows");

  EnergyModel model;
  model.ctx_x.resize(static_cast<Eigen::Index>(complete.size()), data.dim());
  model.ctx_y.reserve(complete.size());
  for (std::size_t i = 0; i < complete.size(); ++i) {
    model.ctx_x.row(static_cast<Eigen::Index>(i)) = data.features.row(complete[i]);
    model.ctx_y.push_back(data.labels[static_cast<std::size_t>(complete[i])]);
  }
  model.ctx_x = stats.apply(model.ctx_x);
  model.class_count = data.class_count;
  model.scorer = make_scorer(scorer_cfg, model.ctx_x);
  model.variant = variant;
  model.swap_weight = swap_weight;

  // Synthetic batch: standardized incomplete rows, missing cells at the
  // column mean (zero in standardized space).
  const auto m = static_cast<Eigen::Index>(holey.size());
  Matrix batch(m, data.dim());
  SgldClamp clamp;
  clamp.keep.resize(m, data.dim());
  clamp.values.resize(m, data.dim());
  std::vector<int> y_synth;
  y_synth.reserve(holey.size());
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index src = holey[static_cast<std::size_t>(r)];
    y_synth.push_back(data.labels[static_cast<std::size_t>(src)]);
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      const bool missing = mask.missing(src, j) != 0;
      const double z = stats.is_constant(j)
                           ? data.features(src, j)
                           : (data.features(src, j) - stats.means(j)) / stats.stds(j);
      const double z_mean = stats.is_constant(j) ? stats.means(j) : 0.0;
      batch(r, j) = missing ? z_mean : z;
      clamp.keep(r, j) = missing ? 0 : 1;
      clamp.values(r, j) = z;
    }
  }

  SgldHooks hooks;
  hooks.init = &batch;
  hooks.clamp = &clamp;
  SgldConfig cfg = sgld_cfg;
  cfg.auc_stride = cfg.eta;  // final-state snapshot
  SynthResult synth = run_sgld(model, stats, y_synth, cfg, hooks);

  res.completed = data;
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index src = holey[static_cast<std::size_t>(r)];
    for (Eigen::Index j = 0; j < data.dim(); ++j)
      if (mask.missing(src, j)) res.completed.features(src, j) = synth.x_synth(r, j);
  }
  res.trace = std::move(synth.trace);

  if (ground_truth) {
    double ss = 0.0;
    long cnt = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i)
      for (Eigen::Index j = 0; j < data.dim(); ++j)
        if (mask.missing(i, j)) {
          const double scale = stats.is_constant(j) ? 1.0 : stats.stds(j);
          const double diff = (res.completed.features(i, j) - (*ground_truth)(i, j)) / scale;
          ss += diff * diff;
          ++cnt;
        }
    res.rmse = cnt > 0 ? std::sqrt(ss / static_cast<double>(cnt)) : 0.0;
  }
  return res;
}

// Standardized-space RMSE of an already-completed table against the truth,
// measured over the masked cells; shares the impute() convention.
inline double masked_rmse(const Dataset& completed, const Matrix& truth, const MissingMask& mask,
                          const Standardizer& stats) {
  double ss = 0.0;
  long cnt = 0;
  for (Eigen::Index i = 0; i < completed.n(); ++i)
    for (Eigen::Index j = 0; j < completed.dim(); ++j)
      if (mask.missing(i, j)) {
        const double scale = stats.is_constant(j) ? 1.0 : stats.stds(j);
        const double diff = (completed.features(i, j) - truth(i, j)) / scale;
        ss += diff * diff;
        ++cnt;
      }
  return cnt > 0 ? std::sqrt(ss / static_cast<double>(cnt)) : 0.0;
}

}  // namespace tabpfgen
