#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tabpfgen/energy.hpp"
#include "tabpfgen/error.hpp"
#include "tabpfgen/sampler.hpp"
#include "tabpfgen/scorer.hpp"

namespace tabpfgen {

// Flat key=value run configuration. Defaults < config file < command line;
// unknown keys are rejected naming the offender, and the fully resolved map
// is echoed into every report.
class RunConfig {
 public:
  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        {"scorer.kind", "soft_knn"},
        {"scorer.bandwidth", "median"},
        {"scorer.epsilon", "1e-12"},
        {"energy.variant", "full"},
        {"energy.lambda", "1"},
        {"sgld.alpha", "0.01"},
        {"sgld.sigma", "0.01"},
        {"sgld.eta", "200"},
        {"sgld.init_noise_std", "0.01"},
        {"sgld.auc_stride", "1"},
        {"sgld.seed", "0"},
        {"data.test_fraction", "0.5"},
        {"data.stratified", "true"},
        {"data.label_col", "label"},
        {"smote.k", "5"},
        {"knn.k", "5"},
        {"logreg.l2", "1e-4"},
        {"logreg.max_iter", "100"},
        {"eval.tasks", "replace,augment"},
        {"eval.generators", "original,sampling,smote,tabpfgen"},
        {"eval.downstreams", "logreg,knn,scorer"},
        {"eval.seeds", "1,2,3"},
        {"impute.missing_fraction", "0.3"},
        {"balance.target", "equalize"},
        {"demo.n", "500"},
        {"demo.noise", "0.1"},
        {"io.out_dir", "."},
    };
    return d;
  }

  void set(const std::string& key, const std::string& value) {
    require(defaults().count(key) > 0, ErrorCode::unknown_config_key,
            "unknown configuration key '" + key + "'");
    values_[key] = value;
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::io_missing_file, "cannot open config '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      require(eq != std::string::npos, ErrorCode::bad_config,
              "config '" + path + "' line " + std::to_string(lineno) + ": expected key=value");
      set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
    }
  }

  std::string get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    const auto dt = defaults().find(key);
    require(dt != defaults().end(), ErrorCode::unknown_config_key,
            "unknown configuration key '" + key + "'");
    return dt->second;
  }

  double get_double(const std::string& key) const {
    const std::string v = get(key);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    require(ec == std::errc() && ptr == v.data() + v.size(), ErrorCode::bad_config,
            "config key '" + key + "': '" + v + "' is not a number");
    return out;
  }

  long get_long(const std::string& key) const {
    const std::string v = get(key);
    long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    require(ec == std::errc() && ptr == v.data() + v.size(), ErrorCode::bad_config,
            "config key '" + key + "': '" + v + "' is not an integer");
    return out;
  }

  std::uint64_t get_u64(const std::string& key) const {
    const std::string v = get(key);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    require(ec == std::errc() && ptr == v.data() + v.size(), ErrorCode::bad_config,
            "config key '" + key + "': '" + v + "' is not a non-negative integer");
    return out;
  }

  bool get_bool(const std::string& key) const {
    const std::string v = get(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(ErrorCode::bad_config, "config key '" + key + "': '" + v + "' is not a boolean");
  }

  ScorerConfig scorer_config() const {
    ScorerConfig cfg;
    const std::string kind = get("scorer.kind");
    if (kind == "soft_knn") cfg.kind = ScorerKind::soft_knn;
    else if (kind == "linear_context") cfg.kind = ScorerKind::linear_context;
    else fail(ErrorCode::bad_config, "scorer.kind must be soft_knn or linear_context, got '" + kind + "'");
    const std::string bw = get("scorer.bandwidth");
    if (bw == "median") {
      cfg.median_bandwidth = true;
    } else {
      cfg.median_bandwidth = false;
      cfg.bandwidth = get_double("scorer.bandwidth");
      require(cfg.bandwidth > 0.0, ErrorCode::bad_config, "scorer.bandwidth must be > 0");
    }
    cfg.epsilon = get_double("scorer.epsilon");
    return cfg;
  }

  SgldConfig sgld_config() const {
    SgldConfig cfg;
    cfg.alpha = get_double("sgld.alpha");
    cfg.sigma = get_double("sgld.sigma");
    cfg.eta = get_long("sgld.eta");
    cfg.init_noise_std = get_double("sgld.init_noise_std");
    cfg.auc_stride = get_long("sgld.auc_stride");
    cfg.seed = get_u64("sgld.seed");
    cfg.validate();
    return cfg;
  }

  EnergyVariant energy_variant() const {
    const std::string v = get("energy.variant");
    if (v == "core") return EnergyVariant::core;
    if (v == "full") return EnergyVariant::full;
    fail(ErrorCode::bad_config, "energy.variant must be core or full, got '" + v + "'");
  }

  double energy_lambda() const {
    const double v = get_double("energy.lambda");
    require(v >= 0.0, ErrorCode::bad_config, "energy.lambda must be >= 0");
    return v;
  }

  // Full resolved view (defaults overlaid with explicit settings).
  std::map<std::string, std::string> resolved() const {
    std::map<std::string, std::string> out = defaults();
    for (const auto& [k, v] : values_) out[k] = v;
    return out;
  }

  static std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto t = trim(item);
      if (!t.empty()) out.push_back(t);
    }
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace tabpfgen
