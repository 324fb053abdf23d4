#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tabpfgen/dataset.hpp"
#include "tabpfgen/energy.hpp"
#include "tabpfgen/error.hpp"
#include "tabpfgen/metrics.hpp"
#include "tabpfgen/random.hpp"

namespace tabpfgen {

struct SgldConfig {
  double alpha = 0.01;           // step size
  double sigma = 0.01;           // per-step noise scale (multiplies N(0, I) directly)
  long eta = 200;                // step budget
  double init_noise_std = 0.01;  // std of the Gaussian added to the seed rows
  long auc_stride = 1;           // evaluate the monitoring AUC every k-th step
  std::uint64_t seed = 0;

  void validate() const {
    require(std::isfinite(alpha) && alpha > 0.0, ErrorCode::bad_config, "sgld: alpha must be > 0");
    require(std::isfinite(sigma) && sigma >= 0.0, ErrorCode::bad_config, "sgld: sigma must be >= 0");
    require(eta >= 1, ErrorCode::bad_config, "sgld: eta must be >= 1");
    require(std::isfinite(init_noise_std) && init_noise_std >= 0.0, ErrorCode::bad_config,
            "sgld: init_noise_std must be >= 0");
    require(auc_stride >= 1, ErrorCode::bad_config, "sgld: auc_stride must be >= 1");
  }
};

struct SgldTrace {
  std::vector<long> auc_steps;     // steps at which the monitor ran
  std::vector<double> auc_values;  // macro one-vs-rest AUC per evaluated step
  std::vector<double> energies;    // total batch energy entering each step (eta entries)
  long best_step = -1;             // earliest step attaining the maximum AUC
  std::uint64_t seed = 0;
};

struct SynthResult {
  Matrix x_synth;  // destandardized
  std::vector<int> y_synth;
  SgldTrace trace;
};

// Pins chosen coordinates after every update: the coordinate (r, d) with
// keep(r, d) != 0 is reset to values(r, d). Cancels both the gradient step
// and the injected noise on observed entries.
struct SgldClamp {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> keep;
  Matrix values;
};

struct SgldHooks {
  const Matrix* init = nullptr;    // bypass the seeded row initialization
  const SgldClamp* clamp = nullptr;
  std::function<void(long step, const Matrix& x)> observer;  // after each update
};

namespace detail {

// Draw order: one row index per synthetic row, then the init noise row-major
// over the non-constant columns.
inline Matrix init_synth_rows(Rng& rng, const Matrix& train_x, const std::vector<int>& train_y,
                              const std::vector<int>& y_synth, double init_noise_std,
                              const std::vector<std::uint8_t>& constant_col) {
  int max_label = -1;
  for (int y : train_y) max_label = std::max(max_label, y);
  std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(max_label + 1));
  for (Eigen::Index i = 0; i < train_x.rows(); ++i)
    by_class[static_cast<std::size_t>(train_y[static_cast<std::size_t>(i)])].push_back(i);

  Matrix x(static_cast<Eigen::Index>(y_synth.size()), train_x.cols());
  for (std::size_t r = 0; r < y_synth.size(); ++r) {
    const int y = y_synth[r];
    require(y >= 0 && y <= max_label && !by_class[static_cast<std::size_t>(y)].empty(),
            ErrorCode::missing_class,
            "init: training data has no rows of class " + std::to_string(y));
    const auto& rows = by_class[static_cast<std::size_t>(y)];
    x.row(static_cast<Eigen::Index>(r)) = train_x.row(rows[rng.index(rows.size())]);
  }
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index d = 0; d < x.cols(); ++d) {
      if (!constant_col.empty() && constant_col[static_cast<std::size_t>(d)]) continue;
      x(r, d) += init_noise_std * rng.normal();
    }
  return x;
}

}  // namespace detail

// Seeds each synthetic row from a uniformly drawn training row of the same
// class and perturbs it with N(0, init_noise_std^2) per coordinate, all in
// standardized space.
inline Matrix init_synth(const Matrix& train_x_std, const std::vector<int>& train_y,
                         const std::vector<int>& y_synth, const SgldConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  return detail::init_synth_rows(rng, train_x_std, train_y, y_synth, cfg.init_noise_std, {});
}

// Runs the SGLD loop
//   x <- x - alpha * dE/dx + sigma * N(0, I)
// for exactly eta steps. Every auc_stride-th step (and the final step) the
// frozen scorer classifies the model context rows using the current synthetic
// batch as context; the snapshot with the best macro one-vs-rest AUC is
// returned, destandardized (ties resolved to the earliest step).
//
// All randomness comes from one stream seeded with cfg.seed, consumed in a
// fixed order: init row picks, init noise (row-major), then per-step noise
// (step-major, then row-major over non-constant columns).
inline SynthResult run_sgld(const EnergyModel& model, const Standardizer& stdzr,
                            const std::vector<int>& y_synth, const SgldConfig& cfg,
                            const SgldHooks& hooks = {}) {
  cfg.validate();
  require(!y_synth.empty(), ErrorCode::bad_argument, "sgld: empty synthetic batch");

  Rng rng(cfg.seed);
  Matrix x = hooks.init
                 ? *hooks.init
                 : detail::init_synth_rows(rng, model.ctx_x, model.ctx_y, y_synth,
                                           cfg.init_noise_std, stdzr.constant);
  require(x.rows() == static_cast<Eigen::Index>(y_synth.size()) && x.cols() == model.ctx_x.cols(),
          ErrorCode::bad_argument, "sgld: init shape mismatch");

  SynthResult res;
  res.y_synth = y_synth;
  res.trace.seed = cfg.seed;
  res.trace.energies.reserve(static_cast<std::size_t>(cfg.eta));

  double best_auc = -1.0;
  Matrix best_x = x;
  const bool monitorable = model.class_count >= 2;

  for (long t = 1; t <= cfg.eta; ++t) {
    const EnergyGrad eg = energy_and_grad(model, x, y_synth);
    if (!std::isfinite(eg.total) || !eg.grad.allFinite())
      fail(ErrorCode::sgld_nonfinite,
           "sgld: non-finite energy or gradient at step " + std::to_string(t) +
               " (step size likely too large)");
    res.trace.energies.push_back(eg.total);

    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index d = 0; d < x.cols(); ++d) {
        if (!stdzr.constant.empty() && stdzr.constant[static_cast<std::size_t>(d)]) continue;
        x(r, d) += -cfg.alpha * eg.grad(r, d) + cfg.sigma * rng.normal();
      }
    if (hooks.clamp)
      for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index d = 0; d < x.cols(); ++d)
          if (hooks.clamp->keep(r, d)) x(r, d) = hooks.clamp->values(r, d);
    if (hooks.observer) hooks.observer(t, x);

    if (t % cfg.auc_stride == 0 || t == cfg.eta) {
      double a = 0.5;
      if (monitorable) {
        const Matrix logits = model.scorer->score(x, y_synth, model.class_count, model.ctx_x);
        a = macro_ovr_auc(softmax_rows(logits), model.ctx_y);
      }
      res.trace.auc_steps.push_back(t);
      res.trace.auc_values.push_back(a);
      if (a > best_auc) {
        best_auc = a;
        best_x = x;
        res.trace.best_step = t;
      }
    }
  }

  res.x_synth = stdzr.invert(best_x);
  return res;
}

// End-to-end wrapper: assembles y_synth from per-class counts (class-major),
// standardizes the training data, resolves the scorer against it, and runs
// the SGLD sampler.
inline SynthResult generate(const Dataset& train, const std::vector<long>& per_class_counts,
                            const ScorerConfig& scorer_cfg, const SgldConfig& sgld_cfg,
                            EnergyVariant variant = EnergyVariant::full, double swap_weight = 1.0) {
  train.validate();
  require(per_class_counts.size() == static_cast<std::size_t>(train.class_count),
          ErrorCode::bad_argument, "generate: one count per class required");
  long total = 0;
  for (long c : per_class_counts) {
    require(c >= 0, ErrorCode::bad_argument, "generate: per-class counts must be >= 0");
    total += c;
  }
  require(total >= 1, ErrorCode::bad_argument, "generate: total count must be >= 1");
  require(swap_weight >= 0.0, ErrorCode::bad_config, "generate: swap weight must be >= 0");

  std::vector<int> y_synth;
  y_synth.reserve(static_cast<std::size_t>(total));
  for (int k = 0; k < train.class_count; ++k)
    for (long c = 0; c < per_class_counts[static_cast<std::size_t>(k)]; ++c) y_synth.push_back(k);

  const Standardizer stdzr = fit_standardizer(train);
  EnergyModel model;
  model.ctx_x = stdzr.apply(train.features);
  model.ctx_y = train.labels;
  model.class_count = train.class_count;
  model.scorer = make_scorer(scorer_cfg, model.ctx_x);
  model.variant = variant;
  model.swap_weight = swap_weight;
  return run_sgld(model, stdzr, y_synth, sgld_cfg);
}

// Synthetic rows from a generate() call repackaged as a Dataset that shares
// the training schema.
inline Dataset synth_to_dataset(const SynthResult& r, const Dataset& train) {
  Dataset d;
  d.features = r.x_synth;
  d.labels = r.y_synth;
  d.feature_names = train.feature_names;
  d.label_names = train.label_names;
  d.label_name = train.label_name;
  d.class_count = train.class_count;
  d.synthetic.assign(static_cast<std::size_t>(r.x_synth.rows()), 1);
  std::vector<bool> seen(static_cast<std::size_t>(train.class_count), false);
  for (int y : d.labels) seen[static_cast<std::size_t>(y)] = true;
  d.partial = std::find(seen.begin(), seen.end(), false) != seen.end();
  return d;
}

}  // namespace tabpfgen
