#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabpfgen/csv.hpp"
#include "tabpfgen/dataset.hpp"
#include "tabpfgen/downstream.hpp"
#include "tabpfgen/error.hpp"
#include "tabpfgen/metrics.hpp"
#include "tabpfgen/tasks.hpp"
#include "tabpfgen/version.hpp"

namespace tabpfgen {

enum class TaskKind { replace, augment, balance };
enum class GeneratorKind { original, sampling, smote, tabpfgen };
enum class DownstreamKind { logreg, knn, scorer };

inline const char* task_name(TaskKind t) {
  switch (t) {
    case TaskKind::replace: return "replace";
    case TaskKind::augment: return "augment";
    case TaskKind::balance: return "balance";
  }
  return "?";
}

inline const char* generator_name(GeneratorKind g) {
  switch (g) {
    case GeneratorKind::original: return "original";
    case GeneratorKind::sampling: return "sampling";
    case GeneratorKind::smote: return "smote";
    case GeneratorKind::tabpfgen: return "tabpfgen";
  }
  return "?";
}

inline const char* downstream_name(DownstreamKind d) {
  switch (d) {
    case DownstreamKind::logreg: return "logreg";
    case DownstreamKind::knn: return "knn";
    case DownstreamKind::scorer: return "scorer";
  }
  return "?";
}

struct EvalOptions {
  double test_fraction = 0.5;
  bool stratified = true;
  ScorerConfig scorer;
  SgldConfig sgld;
  EnergyVariant variant = EnergyVariant::full;
  double swap_weight = 1.0;
  int smote_k = 5;
  int knn_k = 5;
  double logreg_l2 = 1e-4;
  int logreg_max_iter = 100;
};

struct RunRecord {
  std::uint64_t seed = 0;
  double auc = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty on success
};

struct EvalCell {
  TaskKind task;
  GeneratorKind generator;
  DownstreamKind downstream;
  std::vector<RunRecord> runs;

  double mean_auc() const {
    double s = 0.0;
    int c = 0;
    for (const auto& r : runs)
      if (r.error.empty()) {
        s += r.auc;
        ++c;
      }
    return c ? s / c : std::numeric_limits<double>::quiet_NaN();
  }

  // Population std over the successful runs.
  double std_auc() const {
    const double m = mean_auc();
    double s = 0.0;
    int c = 0;
    for (const auto& r : runs)
      if (r.error.empty()) {
        s += (r.auc - m) * (r.auc - m);
        ++c;
      }
    return c ? std::sqrt(s / c) : std::numeric_limits<double>::quiet_NaN();
  }
};

struct EvalReport {
  std::vector<EvalCell> cells;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::string> config_echo;
  std::string version = kVersion;
};

namespace detail {

inline Matrix downstream_probs(DownstreamKind kind, const Dataset& train_data, const Matrix& x_test,
                               const EvalOptions& opt) {
  const Standardizer stdzr = fit_standardizer(train_data);
  const Matrix xtr = stdzr.apply(train_data.features);
  const Matrix xte = stdzr.apply(x_test);
  switch (kind) {
    case DownstreamKind::logreg: {
      const auto m = train_logreg(xtr, train_data.labels, train_data.class_count, opt.logreg_l2,
                                  opt.logreg_max_iter);
      return logreg_predict_proba(m, xte);
    }
    case DownstreamKind::knn: {
      const auto m = train_knn(xtr, train_data.labels, train_data.class_count, opt.knn_k);
      return knn_predict_proba(m, xte);
    }
    case DownstreamKind::scorer: {
      const auto scorer = make_scorer(opt.scorer, xtr);
      return softmax_rows(scorer->score(xtr, train_data.labels, train_data.class_count, xte));
    }
  }
  fail(ErrorCode::bad_argument, "unknown downstream model");
}

inline GenerateFn make_generator(GeneratorKind kind, const EvalOptions& opt, std::uint64_t seed) {
  switch (kind) {
    case GeneratorKind::tabpfgen:
      return [opt, seed](const Dataset& train, const std::vector<long>& counts) {
        SgldConfig cfg = opt.sgld;
        cfg.seed = seed;
        const SynthResult r =
            generate(train, counts, opt.scorer, cfg, opt.variant, opt.swap_weight);
        return synth_to_dataset(r, train);
      };
    case GeneratorKind::smote:
      return [opt, seed](const Dataset& train, const std::vector<long>& counts) {
        return smote(train, counts, opt.smote_k, seed);
      };
    case GeneratorKind::sampling:
      return [seed](const Dataset& train, const std::vector<long>& counts) {
        return sampling_generate(train, counts, seed);
      };
    case GeneratorKind::original:
      fail(ErrorCode::bad_argument, "the original pseudo-generator produces no rows");
  }
  fail(ErrorCode::bad_argument, "unknown generator");
}

}  // namespace detail

// Builds the training data a (task, generator) pair feeds to downstream
// models. `original` ignores the task and returns the training data itself.
inline Dataset build_task_data(TaskKind task, GeneratorKind generator, const Dataset& train,
                               const EvalOptions& opt, std::uint64_t seed) {
  if (generator == GeneratorKind::original) return train;
  if (task == TaskKind::balance && generator == GeneratorKind::sampling)
    return sampling_balance(train, BalanceSpec{}, seed);
  const GenerateFn gen = detail::make_generator(generator, opt, seed);
  switch (task) {
    case TaskKind::replace: return replace(train, gen);
    case TaskKind::augment: return augment(train, gen);
    case TaskKind::balance: return balance(train, BalanceSpec{}, gen);
  }
  fail(ErrorCode::bad_argument, "unknown task");
}

// Runs every (task, generator, downstream) cell for every seed: split, build
// the task's training data, fit the downstream model, record the test AUC.
// A failure inside one cell is recorded there and the sweep continues.
inline EvalReport run_experiment(const Dataset& data, const std::vector<TaskKind>& tasks,
                                 const std::vector<GeneratorKind>& generators,
                                 const std::vector<DownstreamKind>& downstreams,
                                 const std::vector<std::uint64_t>& seeds, const EvalOptions& opt) {
  require(!tasks.empty() && !generators.empty() && !downstreams.empty() && !seeds.empty(),
          ErrorCode::bad_argument, "eval: tasks, generators, downstreams and seeds must be non-empty");
  EvalReport report;
  report.seeds = seeds;
  for (TaskKind t : tasks)
    for (GeneratorKind g : generators)
      for (DownstreamKind d : downstreams) report.cells.push_back({t, g, d, {}});

  for (std::uint64_t seed : seeds) {
    const auto [train, test] = stratified_split(data, {opt.test_fraction, opt.stratified, seed});
    std::size_t cell = 0;
    for (TaskKind t : tasks)
      for (GeneratorKind g : generators) {
        Dataset task_data;
        std::string build_error;
        try {
          task_data = build_task_data(t, g, train, opt, seed);
        } catch (const std::exception& e) {
          build_error = e.what();
        }
        for (DownstreamKind d : downstreams) {
          RunRecord rec;
          rec.seed = seed;
          if (!build_error.empty()) {
            rec.error = build_error;
          } else {
            try {
              const Matrix probs = detail::downstream_probs(d, task_data, test.features, opt);
              rec.auc = macro_ovr_auc(probs, test.labels);
            } catch (const std::exception& e) {
              rec.error = e.what();
            }
          }
          report.cells[cell++].runs.push_back(rec);
        }
      }
  }
  return report;
}

// Stable-key-order JSON; the timestamp is the only field allowed to vary
// between identical runs.
inline nlohmann::ordered_json report_to_json(const EvalReport& r, const std::string& timestamp) {
  nlohmann::ordered_json j;
  j["version"] = r.version;
  j["timestamp"] = timestamp;
  j["seeds"] = r.seeds;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.config_echo) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& c : r.cells) {
    nlohmann::ordered_json jc;
    jc["task"] = task_name(c.task);
    jc["generator"] = generator_name(c.generator);
    jc["downstream"] = downstream_name(c.downstream);
    const double mean = c.mean_auc();
    const double sd = c.std_auc();
    jc["mean_auc"] = std::isfinite(mean) ? nlohmann::ordered_json(mean) : nlohmann::ordered_json();
    jc["std_auc"] = std::isfinite(sd) ? nlohmann::ordered_json(sd) : nlohmann::ordered_json();
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const auto& rec : c.runs) {
      nlohmann::ordered_json jr;
      jr["seed"] = rec.seed;
      if (rec.error.empty()) jr["auc"] = rec.auc;
      else jr["error"] = rec.error;
      runs.push_back(jr);
    }
    jc["runs"] = runs;
    cells.push_back(jc);
  }
  j["cells"] = cells;
  return j;
}

// Spreadsheet-friendly flattening: one row per cell.
inline std::string report_to_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "task,generator,downstream,mean_auc,std_auc,runs\n";
  for (const auto& c : r.cells) {
    out << task_name(c.task) << ',' << generator_name(c.generator) << ','
        << downstream_name(c.downstream) << ',';
    const double mean = c.mean_auc();
    const double sd = c.std_auc();
    if (std::isfinite(mean)) out << format_float(mean);
    out << ',';
    if (std::isfinite(sd)) out << format_float(sd);
    out << ',' << c.runs.size() << '\n';
  }
  return out.str();
}

}  // namespace tabpfgen
