#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcv/csv.hpp"
#include "qcv/qar.hpp"
#include "qcv/series.hpp"
#include "qcv/unit_root.hpp"
#include "qcv/volatility/spec.hpp"

namespace qcv {

struct DeflateRule {
  std::string series;
  std::string deflator;
};

struct CausalityPair {
  std::string cause;
  std::string effect;
};

/// Declarative description of one batch run, loaded from a JSON config file
/// (schema documented in the README). The master seed is mandatory: nothing
/// in the pipeline reads wall-clock entropy. All derived series names follow
/// the transform suffix rules: deflation appends "_real", log levels "_log",
/// log returns "_ret".
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  std::string input_file;
  CsvSchema schema;

  // Transforms, applied in this order: deflate, log levels, log returns.
  std::vector<DeflateRule> deflate;
  std::vector<std::string> log_series;
  std::vector<std::string> return_series;

  // Battery selection (any subset of pipeline_stage_names(), run in
  // dependency order) and its targets. analysis_series feeds every battery;
  // the summary and unit-root stages can widen their own target list (e.g.
  // to price levels) via the optional overrides.
  std::vector<std::string> stages;
  std::vector<std::string> analysis_series;
  std::vector<std::string> summary_series;    // empty: analysis_series
  std::vector<std::string> unit_root_series;  // empty: analysis_series
  std::vector<CausalityPair> pairs;

  // quantile-causality battery
  QuantileGrid grid = QuantileGrid::deciles();
  double subsample_k = 5.0;
  std::vector<int> quantile_lags = {1, 2, 3};
  int bootstrap_replicates = 500;

  // linear Granger battery; fixed_lag 0 means select by criterion
  int granger_max_lag = 8;
  int granger_fixed_lag = 0;
  InfoCriterion granger_criterion = InfoCriterion::AIC;

  // nonparametric causality battery
  std::vector<int> nonparam_lags = {1};

  // BDS battery
  int bds_max_dim = 6;

  // volatility stage: every model in the menu is fit to every analysis
  // series; the source model's posterior-mean volatility feeds the
  // causality-on-volatility battery.
  std::vector<std::string> models;
  std::string volatility_source = "SV-MA";
  vol::McmcConfig mcmc;
  int ml_is_draws = 1000;
  int ml_inner_draws = 100;
  bool causality_on_volatility = true;

  // Raw config file bytes, kept for the manifest hash.
  std::string raw_text;

  /// Parses and validates. Schema or semantic problems throw ConfigError.
  static PipelineConfig from_json_file(const std::string& path);

  /// Structural checks that need no data: seed present, k >= 1, known stage
  /// and model names, pairs and targets reference declared or derived
  /// series, volatility-dependent stages have a volatility stage to feed
  /// them. Throws ConfigError.
  void validate() const;
};

/// Canonical stage order; `stages` in the config selects a subset.
const std::vector<std::string>& pipeline_stage_names();

struct StageRecord {
  std::string name;
  std::string status;  // "ok", "failed" or "skipped"
  std::string error;   // failure or skip reason, empty when ok
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;  // paths relative to output_dir
};

/// Deterministic record of one run. Wall times live in the separate
/// timings.json sidecar (the one output that legitimately varies between
/// runs), so the manifest itself is byte-stable for a fixed config and seed.
struct RunManifest {
  std::string artifact_version;
  std::string config_hash;  // FNV-1a over the config file bytes, hex
  std::uint64_t seed = 0;
  std::vector<StageRecord> stages;
  std::vector<std::string> files;  // every emitted file, manifest included
  bool failed = false;

  std::string to_json() const;
};

/// Executes the selected stages in dependency order. Each stage's outputs
/// are pure functions of (inputs, config, seed): per-stage seeds derive from
/// the master seed via Rng::derive(seed, Rng::stream_of(label)) with the
/// labels documented in the README. A stage error is caught and recorded
/// with stage identity; dependent stages are skipped; partial outputs stay
/// on disk and the manifest carries the FAILED marker. Throws only for
/// problems outside any stage (unwritable output directory).
RunManifest run(const PipelineConfig& config);

}  // namespace qcv
