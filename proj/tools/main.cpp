// tabpfgen command line: energy-based tabular data synthesis with a frozen
// in-context scorer, plus the task protocols (augment / replace / balance /
// impute), baselines, a two-moons demo, and the evaluation harness.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabpfgen/tabpfgen.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace tabpfgen;

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io_write_failed, "cannot write '" + path + "'");
  out << content;
  require(out.good(), ErrorCode::io_write_failed, "write to '" + path + "' failed");
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : cfg.resolved()) j[k] = v;
  return j;
}

ordered_json trace_json(const SgldTrace& trace) {
  ordered_json j;
  j["seed"] = trace.seed;
  j["best_step"] = trace.best_step;
  j["auc_steps"] = trace.auc_steps;
  j["auc_values"] = trace.auc_values;
  j["energies"] = trace.energies;
  return j;
}

// Options shared by every subcommand. Dotted flags cover the whole config
// schema; the shorthands (--seed, --label-col, --out-dir) are applied first
// so an explicit dotted flag still wins.
struct CommonArgs {
  std::string config_path;
  std::map<std::string, std::string> dotted;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> label_col;
  std::optional<std::string> out_dir;

  RunConfig build() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    if (seed) cfg.set("sgld.seed", std::to_string(*seed));
    if (label_col) cfg.set("data.label_col", *label_col);
    if (out_dir) cfg.set("io.out_dir", *out_dir);
    for (const auto& [k, v] : dotted) cfg.set(k, v);
    return cfg;
  }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value configuration file");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&args](const std::uint64_t& v) { args.seed = v; },
      "shorthand for --sgld.seed (also seeds splits and masks)");
  cmd->add_option_function<std::string>(
      "--label-col", [&args](const std::string& v) { args.label_col = v; },
      "label column name or 0-based index");
  cmd->add_option_function<std::string>(
      "--out-dir", [&args](const std::string& v) { args.out_dir = v; },
      "output directory (created if absent)");
  for (const auto& [key, def] : RunConfig::defaults()) {
    if (key == "data.label_col" || key == "io.out_dir") continue;
    cmd->add_option_function<std::string>(
        "--" + key,
        [&args, k = key](const std::string& v) { args.dotted[k] = v; },
        "config key (default: " + def + ")");
  }
}

std::string ensure_out_dir(const RunConfig& cfg) {
  const std::string dir = cfg.get("io.out_dir");
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::io_write_failed, "cannot create output directory '" + dir + "'");
  return dir;
}

std::vector<long> parse_counts(const std::string& text, int class_count) {
  std::vector<long> counts(static_cast<std::size_t>(class_count), 0);
  for (const auto& item : RunConfig::split_list(text)) {
    const auto colon = item.find(':');
    require(colon != std::string::npos, ErrorCode::bad_argument,
            "counts: expected class:count pairs, got '" + item + "'");
    try {
      const int cls = std::stoi(item.substr(0, colon));
      const long cnt = std::stol(item.substr(colon + 1));
      require(cls >= 0 && cls < class_count, ErrorCode::bad_argument,
              "counts: class " + std::to_string(cls) + " out of range");
      require(cnt >= 0, ErrorCode::bad_argument, "counts: negative count");
      counts[static_cast<std::size_t>(cls)] = cnt;
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(ErrorCode::bad_argument, "counts: cannot parse '" + item + "'");
    }
  }
  return counts;
}

BalanceSpec parse_balance_target(const std::string& text, int class_count) {
  BalanceSpec spec;
  if (text == "equalize") return spec;
  spec.equalize = false;
  spec.explicit_counts.assign(static_cast<std::size_t>(class_count), 0);
  const auto counts = parse_counts(text, class_count);
  spec.explicit_counts = counts;
  return spec;
}

GenerateFn make_cli_generator(const std::string& name, const RunConfig& cfg) {
  if (name == "tabpfgen")
    return [&cfg](const Dataset& train, const std::vector<long>& counts) {
      const SynthResult r = generate(train, counts, cfg.scorer_config(), cfg.sgld_config(),
                                     cfg.energy_variant(), cfg.energy_lambda());
      return synth_to_dataset(r, train);
    };
  if (name == "smote")
    return [&cfg](const Dataset& train, const std::vector<long>& counts) {
      return smote(train, counts, static_cast<int>(cfg.get_long("smote.k")),
                   cfg.get_u64("sgld.seed"));
    };
  if (name == "sampling")
    return [&cfg](const Dataset& train, const std::vector<long>& counts) {
      return sampling_generate(train, counts, cfg.get_u64("sgld.seed"));
    };
  fail(ErrorCode::bad_argument, "unknown generator '" + name + "'");
}

MissingMask load_mask_csv(const std::string& path, Eigen::Index n, Eigen::Index dim) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io_missing_file, "cannot open mask '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rows = parse_csv(buf.str());
  require(rows.size() == static_cast<std::size_t>(n) + 1, ErrorCode::bad_argument,
          "mask: expected header plus " + std::to_string(n) + " rows");
  MissingMask m;
  m.missing.setZero(n, dim);
  long missing_count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i) + 1];
    require(r.size() == static_cast<std::size_t>(dim), ErrorCode::bad_argument,
            "mask: row " + std::to_string(i + 1) + " has wrong field count");
    for (Eigen::Index j = 0; j < dim; ++j) {
      const auto& cell = r[static_cast<std::size_t>(j)];
      require(cell == "0" || cell == "1", ErrorCode::csv_bad_cell,
              "mask: entries must be 0 or 1");
      m.missing(i, j) = cell == "1" ? 1 : 0;
      missing_count += m.missing(i, j);
    }
  }
  m.missing_fraction = static_cast<double>(missing_count) / static_cast<double>(n * dim);
  return m;
}

ordered_json report_skeleton(const RunConfig& cfg) {
  ordered_json j;
  j["version"] = kVersion;
  j["timestamp"] = now_iso8601();
  j["config"] = config_json(cfg);
  return j;
}

// -------------------------------------------------------------------------
// Subcommand bodies
// -------------------------------------------------------------------------

int cmd_generate(const CommonArgs& common, const std::string& input, const std::string& counts_str,
                 bool emit_provenance) {
  const RunConfig cfg = common.build();
  const std::string out_dir = ensure_out_dir(cfg);
  const Dataset train = load_csv(input, cfg.get("data.label_col"));
  const auto counts = parse_counts(counts_str, train.class_count);
  const SynthResult res = generate(train, counts, cfg.scorer_config(), cfg.sgld_config(),
                                   cfg.energy_variant(), cfg.energy_lambda());
  const Dataset synth = synth_to_dataset(res, train);
  save_csv(out_dir + "/synthetic.csv", synth, emit_provenance);
  ordered_json j = report_skeleton(cfg);
  j["input"] = input;
  j["rows"] = synth.n();
  j["trace"] = trace_json(res.trace);
  write_text(out_dir + "/generate_report.json", j.dump(2) + "\n");
  std::cout << "wrote " << out_dir << "/synthetic.csv (" << synth.n() << " rows), best step "
            << res.trace.best_step << "\n";
  return 0;
}

int cmd_task_common(const CommonArgs& common, const std::string& task, const std::string& input,
                    const std::string& generator, const std::string& target,
                    bool emit_provenance) {
  const RunConfig cfg = common.build();
  const std::string out_dir = ensure_out_dir(cfg);
  const Dataset train = load_csv(input, cfg.get("data.label_col"));
  Dataset out;
  if (task == "augment") {
    out = augment(train, make_cli_generator(generator, cfg));
  } else if (task == "replace") {
    out = replace(train, make_cli_generator(generator, cfg));
  } else if (task == "balance") {
    const BalanceSpec spec = parse_balance_target(target, train.class_count);
    if (generator == "sampling") out = sampling_balance(train, spec, cfg.get_u64("sgld.seed"));
    else out = balance(train, spec, make_cli_generator(generator, cfg));
  } else if (task == "sampling") {
    const BalanceSpec spec = parse_balance_target(target, train.class_count);
    out = sampling_balance(train, spec, cfg.get_u64("sgld.seed"));
  } else if (task == "smote") {
    const auto counts = train.class_histogram();
    out = smote(train, counts, static_cast<int>(cfg.get_long("smote.k")),
                cfg.get_u64("sgld.seed"));
  } else {
    fail(ErrorCode::bad_argument, "unknown task '" + task + "'");
  }
  const std::string name = task == "augment"    ? "augmented"
                           : task == "replace"  ? "replaced"
                           : task == "balance"  ? "balanced"
                           : task == "sampling" ? "sampled"
                                                : "smote";
  const std::string out_path = out_dir + "/" + name + ".csv";
  save_csv(out_path, out, emit_provenance);
  ordered_json j = report_skeleton(cfg);
  j["task"] = task;
  j["input"] = input;
  j["generator"] = generator;
  j["rows"] = out.n();
  ordered_json hist = ordered_json::array();
  for (long c : out.class_histogram()) hist.push_back(c);
  j["class_histogram"] = hist;
  write_text(out_dir + "/" + name + "_report.json", j.dump(2) + "\n");
  std::cout << "wrote " << out_path << " (" << out.n() << " rows)\n";
  return 0;
}

int cmd_impute(const CommonArgs& common, const std::string& input, const std::string& fractions_str,
               const std::string& mask_path, const std::string& ground_truth_path,
               bool mean_only) {
  const RunConfig cfg = common.build();
  const std::string out_dir = ensure_out_dir(cfg);
  const Dataset data = load_csv(input, cfg.get("data.label_col"));

  // Ground truth: explicit file, or the input itself when masks are generated
  // here (the imputers never read masked cells).
  std::optional<Matrix> truth;
  if (!ground_truth_path.empty()) {
    const Dataset gt = load_csv(ground_truth_path, cfg.get("data.label_col"));
    require(gt.n() == data.n() && gt.dim() == data.dim(), ErrorCode::bad_argument,
            "impute: ground truth shape mismatch");
    truth = gt.features;
  } else if (mask_path.empty()) {
    truth = data.features;
  }

  std::vector<std::pair<std::string, MissingMask>> masks;
  if (!mask_path.empty()) {
    masks.emplace_back("mask", load_mask_csv(mask_path, data.n(), data.dim()));
  } else {
    const std::string spec = fractions_str.empty() ? cfg.get("impute.missing_fraction") : fractions_str;
    for (const auto& f : RunConfig::split_list(spec)) {
      RunConfig probe;
      probe.set("impute.missing_fraction", f);
      const double frac = probe.get_double("impute.missing_fraction");
      masks.emplace_back("p" + f, make_missing_mask(data.n(), data.dim(), frac,
                                                    cfg.get_u64("sgld.seed")));
    }
  }

  ordered_json j = report_skeleton(cfg);
  j["input"] = input;
  ordered_json results = ordered_json::array();
  for (const auto& [tag, mask] : masks) {
    ordered_json entry;
    entry["mask"] = tag;
    entry["missing_fraction"] = mask.missing_fraction;
    entry["missing_cells"] = mask.count();

    const Dataset mean_done = mean_impute(data, mask);
    if (truth) {
      const Standardizer stats = fit_masked_standardizer(data.features, mask);
      entry["rmse_mean"] = masked_rmse(mean_done, *truth, mask, stats);
    }
    if (mean_only) {
      save_csv(out_dir + "/mean_imputed_" + tag + ".csv", mean_done);
    } else {
      const ImputeResult res =
          impute(data, mask, cfg.scorer_config(), cfg.sgld_config(), cfg.energy_variant(),
                 cfg.energy_lambda(), truth ? &*truth : nullptr);
      save_csv(out_dir + "/imputed_" + tag + ".csv", res.completed);
      if (res.rmse) entry["rmse_tabpfgen"] = *res.rmse;
      entry["best_step"] = res.trace.best_step;
    }
    results.push_back(entry);
  }
  j["results"] = results;
  const std::string report = out_dir + (mean_only ? "/mean_impute_report.json" : "/impute_report.json");
  write_text(report, j.dump(2) + "\n");
  std::cout << "wrote " << report << "\n";
  return 0;
}

int cmd_demo_two_moons(const CommonArgs& common) {
  const RunConfig cfg = common.build();
  const std::string out_dir = ensure_out_dir(cfg);
  const auto n = cfg.get_long("demo.n");
  const double noise = cfg.get_double("demo.noise");
  const Dataset real = make_two_moons(n, noise, cfg.get_u64("sgld.seed"));

  const SynthResult res = generate(real, real.class_histogram(), cfg.scorer_config(),
                                   cfg.sgld_config(), cfg.energy_variant(), cfg.energy_lambda());
  const Dataset synth = synth_to_dataset(res, real);

  save_csv(out_dir + "/two_moons_real.csv", real);
  save_csv(out_dir + "/two_moons_synth.csv", synth);

  // One bandwidth (median heuristic on the real sample) for both densities so
  // the grids are comparable.
  const double h = median_pairwise_distance(real.features);
  const Kde2d kde_real = fit_kde(real.features, h);
  const Kde2d kde_synth = fit_kde(synth.features, h);
  const DensityGrid grid_real = kde_grid(kde_real, real.features, 100);
  const DensityGrid grid_synth = kde_grid(kde_synth, real.features, 100);

  {
    std::ostringstream csv;
    csv << "x,y,density_real,density_synth\n";
    for (std::size_t r = 0; r < grid_real.ys.size(); ++r)
      for (std::size_t c = 0; c < grid_real.xs.size(); ++c)
        csv << format_float(grid_real.xs[c]) << ',' << format_float(grid_real.ys[r]) << ','
            << format_float(grid_real.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)))
            << ','
            << format_float(grid_synth.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)))
            << '\n';
    write_text(out_dir + "/two_moons_grid.csv", csv.str());
  }

  const double x_min = grid_real.xs.front(), x_max = grid_real.xs.back();
  const double y_min = grid_real.ys.front(), y_max = grid_real.ys.back();

  {  // Scatter: real filled, synthetic ringed.
    SvgCanvas svg(x_min, x_max, y_min, y_max);
    for (Eigen::Index i = 0; i < real.n(); ++i)
      svg.circle(real.features(i, 0), real.features(i, 1), 3.0,
                 real.labels[static_cast<std::size_t>(i)] == 0 ? "steelblue" : "firebrick", 0.7);
    for (Eigen::Index i = 0; i < synth.n(); ++i)
      svg.circle(synth.features(i, 0), synth.features(i, 1), 3.0,
                 synth.labels[static_cast<std::size_t>(i)] == 0 ? "mediumseagreen" : "orange", 0.7);
    svg.frame();
    svg.text(45, 30, "two moons: real (blue/red) vs synthetic (green/orange)");
    svg.save(out_dir + "/two_moons_scatter.svg");
  }

  {  // Density contours of both samples.
    SvgCanvas svg(x_min, x_max, y_min, y_max);
    const double max_real = grid_real.values.maxCoeff();
    const double max_synth = grid_synth.values.maxCoeff();
    for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      for (const auto& seg : contour_segments(grid_real, frac * max_real))
        svg.polyline({seg.first, seg.second}, "steelblue", 1.2);
      for (const auto& seg : contour_segments(grid_synth, frac * max_synth))
        svg.polyline({seg.first, seg.second}, "orange", 1.2);
    }
    svg.frame();
    svg.text(45, 30, "density contours: real (blue) vs synthetic (orange)");
    svg.save(out_dir + "/two_moons_contours.svg");
  }

  for (int axis = 0; axis < 2; ++axis) {  // Marginal histograms, 30 bins.
    const double lo = axis == 0 ? x_min : y_min;
    const double hi = axis == 0 ? x_max : y_max;
    std::vector<double> vr, vs;
    for (Eigen::Index i = 0; i < real.n(); ++i) vr.push_back(real.features(i, axis));
    for (Eigen::Index i = 0; i < synth.n(); ++i) vs.push_back(synth.features(i, axis));
    const auto cr = histogram_counts(vr, lo, hi, 30);
    const auto cs = histogram_counts(vs, lo, hi, 30);
    long top = 1;
    for (long c : cr) top = std::max(top, c);
    for (long c : cs) top = std::max(top, c);
    SvgCanvas svg(lo, hi, 0.0, static_cast<double>(top) * 1.05);
    const double width = (hi - lo) / 30.0;
    for (int b = 0; b < 30; ++b) {
      const double x0 = lo + b * width;
      svg.bar(x0, x0 + width, 0.0, static_cast<double>(cr[static_cast<std::size_t>(b)]),
              "steelblue", 0.5);
      svg.bar(x0, x0 + width, 0.0, static_cast<double>(cs[static_cast<std::size_t>(b)]),
              "orange", 0.5);
    }
    svg.frame();
    svg.text(45, 30, std::string("marginal of ") + (axis == 0 ? "x0" : "x1") +
                         ": real (blue) vs synthetic (orange)");
    svg.save(out_dir + (axis == 0 ? "/two_moons_marginal_x.svg" : "/two_moons_marginal_y.svg"));
  }

  // Cross-likelihood diagnostics: how the synthetic sample's density explains
  // the real points, against the real sample's self-density.
  double ld_self = 0.0, ld_cross = 0.0;
  for (Eigen::Index i = 0; i < real.n(); ++i) {
    ld_self += kde_log_density(kde_real, real.features(i, 0), real.features(i, 1));
    ld_cross += kde_log_density(kde_synth, real.features(i, 0), real.features(i, 1));
  }
  ld_self /= static_cast<double>(real.n());
  ld_cross /= static_cast<double>(real.n());

  ordered_json j = report_skeleton(cfg);
  j["n"] = n;
  j["noise"] = noise;
  j["kde_bandwidth"] = h;
  j["mean_log_density_real_under_real"] = ld_self;
  j["mean_log_density_real_under_synth"] = ld_cross;
  j["best_step"] = res.trace.best_step;
  write_text(out_dir + "/demo_report.json", j.dump(2) + "\n");
  std::cout << "wrote two-moons demo to " << out_dir << " (cross log-density gap "
            << format_float(ld_self - ld_cross) << ")\n";
  return 0;
}

int cmd_eval(const CommonArgs& common, const std::string& input, const std::string& tasks_str,
             const std::string& generators_str, const std::string& downstreams_str,
             const std::string& seeds_str, bool emit_csv) {
  RunConfig cfg = common.build();
  if (!tasks_str.empty()) cfg.set("eval.tasks", tasks_str);
  if (!generators_str.empty()) cfg.set("eval.generators", generators_str);
  if (!downstreams_str.empty()) cfg.set("eval.downstreams", downstreams_str);
  if (!seeds_str.empty()) cfg.set("eval.seeds", seeds_str);
  const std::string out_dir = ensure_out_dir(cfg);
  const Dataset data = load_csv(input, cfg.get("data.label_col"));

  std::vector<TaskKind> tasks;
  for (const auto& t : RunConfig::split_list(cfg.get("eval.tasks"))) {
    if (t == "replace") tasks.push_back(TaskKind::replace);
    else if (t == "augment") tasks.push_back(TaskKind::augment);
    else if (t == "balance") tasks.push_back(TaskKind::balance);
    else fail(ErrorCode::bad_argument, "unknown eval task '" + t + "'");
  }
  std::vector<GeneratorKind> generators;
  for (const auto& g : RunConfig::split_list(cfg.get("eval.generators"))) {
    if (g == "original") generators.push_back(GeneratorKind::original);
    else if (g == "sampling") generators.push_back(GeneratorKind::sampling);
    else if (g == "smote") generators.push_back(GeneratorKind::smote);
    else if (g == "tabpfgen") generators.push_back(GeneratorKind::tabpfgen);
    else fail(ErrorCode::bad_argument, "unknown generator '" + g + "'");
  }
  std::vector<DownstreamKind> downstreams;
  for (const auto& d : RunConfig::split_list(cfg.get("eval.downstreams"))) {
    if (d == "logreg") downstreams.push_back(DownstreamKind::logreg);
    else if (d == "knn") downstreams.push_back(DownstreamKind::knn);
    else if (d == "scorer") downstreams.push_back(DownstreamKind::scorer);
    else fail(ErrorCode::bad_argument, "unknown downstream model '" + d + "'");
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& s : RunConfig::split_list(cfg.get("eval.seeds"))) {
    RunConfig probe;
    probe.set("sgld.seed", s);
    seeds.push_back(probe.get_u64("sgld.seed"));
  }

  EvalOptions opt;
  opt.test_fraction = cfg.get_double("data.test_fraction");
  opt.stratified = cfg.get_bool("data.stratified");
  opt.scorer = cfg.scorer_config();
  opt.sgld = cfg.sgld_config();
  opt.variant = cfg.energy_variant();
  opt.swap_weight = cfg.energy_lambda();
  opt.smote_k = static_cast<int>(cfg.get_long("smote.k"));
  opt.knn_k = static_cast<int>(cfg.get_long("knn.k"));
  opt.logreg_l2 = cfg.get_double("logreg.l2");
  opt.logreg_max_iter = static_cast<int>(cfg.get_long("logreg.max_iter"));

  EvalReport report = run_experiment(data, tasks, generators, downstreams, seeds, opt);
  report.config_echo = cfg.resolved();
  write_text(out_dir + "/eval_report.json", report_to_json(report, now_iso8601()).dump(2) + "\n");
  if (emit_csv) write_text(out_dir + "/eval_report.csv", report_to_csv(report));
  std::cout << "wrote " << out_dir << "/eval_report.json (" << report.cells.size()
            << " cells x " << seeds.size() << " runs)\n";
  return 0;
}

int cmd_inspect(const CommonArgs& common, const std::string& input) {
  const RunConfig cfg = common.build();
  const Dataset d = load_csv(input, cfg.get("data.label_col"));
  ordered_json j;
  j["rows"] = d.n();
  j["features"] = d.dim();
  j["feature_names"] = d.feature_names;
  j["label_column"] = d.label_name;
  j["class_count"] = d.class_count;
  ordered_json classes = ordered_json::array();
  const auto hist = d.class_histogram();
  for (int k = 0; k < d.class_count; ++k) {
    ordered_json c;
    c["label"] = d.label_names[static_cast<std::size_t>(k)];
    c["count"] = hist[static_cast<std::size_t>(k)];
    classes.push_back(c);
  }
  j["classes"] = classes;
  long synth_rows = 0;
  for (Eigen::Index i = 0; i < d.n(); ++i) synth_rows += d.row_is_synthetic(i) ? 1 : 0;
  j["synthetic_rows"] = synth_rows;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"energy-based tabular data synthesis with a frozen in-context scorer"};
  app.require_subcommand(1);

  struct SubState {
    CommonArgs common;
    std::string input, counts, generator = "tabpfgen", target = "equalize";
    std::string fractions, mask, ground_truth;
    std::string tasks, generators, downstreams, seeds;
    bool emit_provenance = false;
    bool emit_csv = false;
  };
  std::map<std::string, SubState> state;
  int rc = 0;

  auto* gen = app.add_subcommand("generate", "sample synthetic rows for per-class counts");
  {
    auto& s = state["generate"];
    add_common(gen, s.common);
    gen->add_option("--input", s.input, "training CSV")->required();
    gen->add_option("--counts", s.counts, "per-class counts, e.g. 0:5,1:5")->required();
    gen->add_flag("--emit-provenance", s.emit_provenance, "append the __synthetic__ column");
    gen->callback([&] {
      rc = cmd_generate(state["generate"].common, state["generate"].input,
                        state["generate"].counts, state["generate"].emit_provenance);
    });
  }

  for (const std::string task : {"augment", "replace", "balance", "smote", "sampling"}) {
    auto* cmd = app.add_subcommand(
        task, task == "augment"   ? "add synthetic rows matching the class ratio"
              : task == "replace" ? "replace the training set with synthetic rows"
              : task == "balance" ? "top up minority classes to the target counts"
              : task == "smote"   ? "interpolation baseline (class-ratio counts)"
                                  : "resampling-with-replacement balancing baseline");
    auto& s = state[task];
    add_common(cmd, s.common);
    cmd->add_option("--input", s.input, "training CSV")->required();
    if (task == "augment" || task == "replace" || task == "balance")
      cmd->add_option("--generator", s.generator, "tabpfgen | smote | sampling");
    if (task == "balance" || task == "sampling")
      cmd->add_option("--target", s.target, "equalize or explicit class:count list");
    cmd->add_flag("--emit-provenance", s.emit_provenance, "append the __synthetic__ column");
    cmd->callback([&, task] {
      const auto& t = state[task];
      rc = cmd_task_common(t.common, task, t.input, t.generator, t.target, t.emit_provenance);
    });
  }

  for (const std::string task : {"impute", "mean-impute"}) {
    auto* cmd = app.add_subcommand(task, task == "impute"
                                             ? "projected-SGLD imputation of masked cells"
                                             : "column-mean imputation baseline");
    auto& s = state[task];
    add_common(cmd, s.common);
    cmd->add_option("--input", s.input, "data CSV (masked cells are never read)")->required();
    cmd->add_option("--missing-fraction", s.fractions,
                    "fraction or comma list; masks are generated from the seed");
    cmd->add_option("--mask", s.mask, "explicit 0/1 mask CSV (header row, feature columns only)");
    cmd->add_option("--ground-truth", s.ground_truth, "full CSV for RMSE when using --mask");
    cmd->callback([&, task] {
      const auto& t = state[task];
      rc = cmd_impute(t.common, t.input, t.fractions, t.mask, t.ground_truth,
                      task == "mean-impute");
    });
  }

  auto* demo = app.add_subcommand("demo-two-moons", "generate, sample and plot the two-moons study");
  {
    auto& s = state["demo-two-moons"];
    add_common(demo, s.common);
    demo->callback([&] { rc = cmd_demo_two_moons(state["demo-two-moons"].common); });
  }

  auto* ev = app.add_subcommand("eval", "run the task x generator x downstream AUC grid");
  {
    auto& s = state["eval"];
    add_common(ev, s.common);
    ev->add_option("--input", s.input, "dataset CSV")->required();
    ev->add_option("--tasks", s.tasks, "subset of replace,augment,balance");
    ev->add_option("--generators", s.generators, "subset of original,sampling,smote,tabpfgen");
    ev->add_option("--downstreams", s.downstreams, "subset of logreg,knn,scorer");
    ev->add_option("--seeds", s.seeds, "comma list of run seeds");
    ev->add_flag("--emit-csv", s.emit_csv, "also write the flattened eval_report.csv");
    ev->callback([&] {
      const auto& t = state["eval"];
      rc = cmd_eval(t.common, t.input, t.tasks, t.generators, t.downstreams, t.seeds, t.emit_csv);
    });
  }

  auto* ins = app.add_subcommand("inspect", "print a JSON summary of a CSV dataset");
  {
    auto& s = state["inspect"];
    add_common(ins, s.common);
    ins->add_option("--input", s.input, "dataset CSV")->required();
    ins->callback([&] { rc = cmd_inspect(state["inspect"].common, state["inspect"].input); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      std::cerr << "error_code=bad_argument message=\"" << e.what() << "\"\n";
      return 1;
    }
    return app.exit(e);  // --help and friends
  } catch (const Error& e) {
    std::cerr << "error_code=" << error_name(e.code()) << " message=\"" << e.what() << "\"\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error_code=internal message=\"" << e.what() << "\"\n";
    return 1;
  }
  return rc;
}
