#include "qcv/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcv/bds.hpp"
#include "qcv/errors.hpp"
#include "qcv/math/rng.hpp"
#include "qcv/model_comparison.hpp"
#include "qcv/nonparam.hpp"
#include "qcv/quantile_causality.hpp"
#include "qcv/report.hpp"
#include "qcv/var.hpp"
#include "qcv/volatility/garch.hpp"
#include "qcv/volatility/priors.hpp"
#include "qcv/volatility/sv.hpp"

namespace qcv {

namespace {

constexpr const char* kArtifactVersion = "qcv 1.0.0";

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string slug(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else
      out += '_';
  }
  return out;
}

[[noreturn]] void config_fail(const std::string& msg) {
  throw Error(Errc::config_error, msg);
}

const json& need(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) config_fail(ctx + ": missing required key '" + key + "'");
  return *it;
}

std::vector<std::string> string_list(const json& j, const std::string& ctx) {
  if (!j.is_array()) config_fail(ctx + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) config_fail(ctx + ": expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<int> int_list(const json& j, const std::string& ctx) {
  if (!j.is_array()) config_fail(ctx + ": expected an array of integers");
  std::vector<int> out;
  for (const auto& e : j) {
    if (!e.is_number_integer()) config_fail(ctx + ": expected an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stage machinery

struct Ctx {
  const PipelineConfig& cfg;
  std::map<std::string, Series> store;
  std::map<std::string, vol::PosteriorDraws> fits;  // "<series>/<model>"
  std::uint64_t stage_seed = 0;
};

const Series& lookup(const Ctx& ctx, const std::string& name, const std::string& stage) {
  auto it = ctx.store.find(name);
  if (it == ctx.store.end())
    throw Error(Errc::unknown_variable, stage + ": series '" + name + "' is not defined");
  return it->second;
}

/// Renders every table in both formats and records the emitted file names.
void emit_tables(const Ctx& ctx, const std::vector<ReportTable>& tables,
                 StageRecord& record) {
  for (auto format : {ReportFormat::markdown, ReportFormat::csv}) {
    auto written = emit_report(tables, format, ctx.cfg.output_dir);
    for (const auto& path : written)
      record.outputs.push_back(std::filesystem::path(path).filename().string());
  }
}

std::string stars(const std::set<double>& reject_at) {
  if (reject_at.count(0.01)) return "***";
  if (reject_at.count(0.05)) return "**";
  if (reject_at.count(0.10)) return "*";
  return "";
}

std::uint64_t sub_seed(const Ctx& ctx, const std::string& label) {
  return Rng::derive(ctx.stage_seed, Rng::stream_of(label.c_str()));
}

// ---------------------------------------------------------------------------
// Stages

void stage_ingest(Ctx& ctx, StageRecord&) {
  auto loaded = load_csv(ctx.cfg.input_file, ctx.cfg.schema);
  for (auto& s : loaded) ctx.store.emplace(s.name, std::move(s));
}

void stage_transform(Ctx& ctx, StageRecord&) {
  for (const auto& rule : ctx.cfg.deflate) {
    const Series& nominal = lookup(ctx, rule.series, "transform");
    const Series& deflator = lookup(ctx, rule.deflator, "transform");
    Series real = deflate(nominal, deflator);
    ctx.store.emplace(real.name, std::move(real));
  }
  for (const auto& name : ctx.cfg.log_series) {
    Series logged = log_levels(lookup(ctx, name, "transform"));
    ctx.store.emplace(logged.name, std::move(logged));
  }
  for (const auto& name : ctx.cfg.return_series) {
    Series ret = log_returns(lookup(ctx, name, "transform"));
    ctx.store.emplace(ret.name, std::move(ret));
  }
}

const std::vector<std::string>& targets_or_default(const std::vector<std::string>& own,
                                                   const std::vector<std::string>& fallback) {
  return own.empty() ? fallback : own;
}

void stage_summary(Ctx& ctx, StageRecord& record) {
  ReportTable t;
  t.id = "summary_stats";
  t.title = "Summary statistics";
  t.columns = {"Series", "N",        "Mean",     "Median",   "Max",
               "Min",    "Std dev",  "Skewness", "Kurtosis", "Jarque-Bera",
               "JB p-value"};
  for (const auto& name :
       targets_or_default(ctx.cfg.summary_series, ctx.cfg.analysis_series)) {
    const Series& s = lookup(ctx, name, "summary");
    SummaryStats st = describe(s);
    t.rows.push_back({text_cell(name), number_cell(static_cast<double>(st.n)),
                      number_cell(st.mean), number_cell(st.median), number_cell(st.max),
                      number_cell(st.min), number_cell(st.std_dev), number_cell(st.skewness),
                      number_cell(st.kurtosis), number_cell(st.jarque_bera_stat),
                      p_value_cell(st.jarque_bera_p)});
  }
  t.notes = {"Kurtosis is the raw fourth standardized moment (3 under normality);",
             "skewness uses the n-denominator moment estimator;",
             "JB = n/6 (S^2 + (K-3)^2/4), chi-square(2) p-value."};

  ReportTable corr;
  corr.id = "rank_correlations";
  corr.title = "Spearman rank correlations";
  corr.columns = {"Series"};
  for (const auto& name : ctx.cfg.analysis_series) corr.columns.push_back(name);
  if (ctx.cfg.analysis_series.size() >= 2) {
    for (const auto& a : ctx.cfg.analysis_series) {
      std::vector<Cell> row = {text_cell(a)};
      for (const auto& b : ctx.cfg.analysis_series) {
        if (a == b) {
          row.push_back(number_cell(1.0));
          continue;
        }
        try {
          row.push_back(number_cell(spearman(lookup(ctx, a, "summary"),
                                              lookup(ctx, b, "summary"))));
        } catch (const Error&) {
          row.push_back(text_cell("n/a"));
        }
      }
      corr.rows.push_back(std::move(row));
    }
  }
  emit_tables(ctx, {t, corr}, record);
}

void stage_unit_root(Ctx& ctx, StageRecord& record) {
  ReportTable t;
  t.id = "unit_root_tests";
  t.title = "Unit root tests";
  t.columns = {"Series", "Test", "Deterministic", "Statistic",
               "Lag/BW", "Significance", "Break date"};
  auto add = [&](const std::string& name, const UnitRootResult& r) {
    t.rows.push_back(
        {text_cell(name), text_cell(r.test),
         text_cell(r.deterministic == Deterministic::constant ? "C" : "C+T"),
         number_cell(r.statistic), number_cell(r.lag_or_bandwidth),
         text_cell(stars(r.reject_at)),
         text_cell(r.break_date ? r.break_date->str() : "")});
  };
  for (const auto& name :
       targets_or_default(ctx.cfg.unit_root_series, ctx.cfg.analysis_series)) {
    const Series& s = lookup(ctx, name, "unit_root");
    add(name, adf_test(s, Deterministic::constant, 12));
    add(name, adf_test(s, Deterministic::constant_trend, 12));
    add(name, pp_test(s, Deterministic::constant));
    add(name, pp_test(s, Deterministic::constant_trend));
    add(name, perron_break_test(s));
  }
  t.notes = {"Stars mark rejection of the unit-root null: * 10%, ** 5%, *** 1%",
             "(critical-value decisions). Perron allows one break in intercept",
             "and trend at an estimated date."};
  emit_tables(ctx, {t}, record);
}

void stage_bds(Ctx& ctx, StageRecord& record) {
  ReportTable t;
  t.id = "bds_test";
  t.title = "BDS independence test";
  t.columns = {"Series", "Epsilon"};
  for (int m = 2; m <= ctx.cfg.bds_max_dim; ++m) {
    t.columns.push_back("m=" + std::to_string(m) + " z");
    t.columns.push_back("m=" + std::to_string(m) + " p");
  }
  auto add = [&](const std::string& name, const BdsResult& r) {
    std::vector<Cell> row = {text_cell(name), number_cell(r.epsilon)};
    for (int m = 2; m <= ctx.cfg.bds_max_dim; ++m) {
      const auto& d = r.per_dimension.at(m);
      row.push_back(number_cell(d.statistic));
      row.push_back(p_value_cell(d.p_value));
    }
    t.rows.push_back(std::move(row));
  };
  for (const auto& name : ctx.cfg.analysis_series)
    add(name, bds_test(lookup(ctx, name, "bds"), ctx.cfg.bds_max_dim, {}));

  if (ctx.cfg.analysis_series.size() >= 2) {
    std::vector<Series> system;
    for (const auto& name : ctx.cfg.analysis_series)
      system.push_back(lookup(ctx, name, "bds"));
    int lag = ctx.cfg.granger_fixed_lag > 0
                  ? ctx.cfg.granger_fixed_lag
                  : select_lag(system, ctx.cfg.granger_max_lag, ctx.cfg.granger_criterion);
    for (const auto& [name, r] : bds_on_var_residuals(system, lag, ctx.cfg.bds_max_dim))
      add(name + " VAR(" + std::to_string(lag) + ") resid", r);
  }
  t.notes = {"Epsilon rule: 0.7 sample standard deviations. Statistics are",
             "asymptotically N(0,1) under iid; two-sided p-values."};
  emit_tables(ctx, {t}, record);
}

void stage_linear_granger(Ctx& ctx, StageRecord& record) {
  ReportTable t;
  t.id = "linear_granger";
  t.title = "Linear Granger causality (VAR Wald tests)";
  t.columns = {"Cause", "Effect", "Lag", "Wald chi-sq", "p-value", "Reject at 10%"};
  for (const auto& pair : ctx.cfg.pairs) {
    std::vector<Series> system = {lookup(ctx, pair.cause, "linear_granger"),
                                  lookup(ctx, pair.effect, "linear_granger")};
    int lag = ctx.cfg.granger_fixed_lag > 0
                  ? ctx.cfg.granger_fixed_lag
                  : select_lag(system, ctx.cfg.granger_max_lag, ctx.cfg.granger_criterion);
    VarModel model = fit_var(system, lag);
    GrangerTestResult r = granger_wald(model, pair.cause, pair.effect);
    t.rows.push_back({text_cell(r.cause), text_cell(r.effect), number_cell(r.lag),
                      number_cell(r.chi_sq), p_value_cell(r.p_value),
                      text_cell(r.decision ? "yes" : "no")});
  }
  std::string rule = ctx.cfg.granger_fixed_lag > 0
                         ? "fixed at " + std::to_string(ctx.cfg.granger_fixed_lag)
                         : std::string(ctx.cfg.granger_criterion == InfoCriterion::AIC
                                           ? "AIC"
                                           : "SIC") +
                               "-selected up to " + std::to_string(ctx.cfg.granger_max_lag);
  t.notes = {"Bivariate VAR per pair, lag " + rule + "."};
  emit_tables(ctx, {t}, record);
}

void stage_nonparam(Ctx& ctx, StageRecord& record) {
  ReportTable t;
  t.id = "nonparam_causality";
  t.title = "Nonparametric Granger causality";
  t.columns = {"Test", "Cause", "Effect", "Lag", "Epsilon", "Statistic", "p-value"};
  auto add = [&](const NonparamCausalityResult& r) {
    t.rows.push_back({text_cell(r.test), text_cell(r.cause), text_cell(r.effect),
                      number_cell(r.lag), number_cell(r.epsilon), number_cell(r.statistic),
                      p_value_cell(r.p_value)});
  };
  for (const auto& pair : ctx.cfg.pairs) {
    const Series& cause = lookup(ctx, pair.cause, "nonparam_causality");
    const Series& effect = lookup(ctx, pair.effect, "nonparam_causality");
    for (int lag : ctx.cfg.nonparam_lags) {
      add(hj_test(cause, effect, lag));
      add(dp_test(cause, effect, lag));
    }
  }
  t.notes = {"Upper-tail rejection against N(0,1). Series standardized to unit",
             "variance; sup-norm distances."};
  emit_tables(ctx, {t}, record);
}

void write_draws_csv(const Ctx& ctx, const vol::PosteriorDraws& fit,
                     const std::string& stem, StageRecord& record) {
  std::string body;
  for (std::size_t i = 0; i < fit.param_names.size(); ++i) {
    if (i > 0) body += ",";
    body += fit.param_names[i];
  }
  body += "\n";
  for (Eigen::Index r = 0; r < fit.draws.rows(); ++r) {
    for (Eigen::Index c = 0; c < fit.draws.cols(); ++c) {
      if (c > 0) body += ",";
      body += format_number(fit.draws(r, c));
    }
    body += "\n";
  }
  std::string name = stem + ".csv";
  write_text_file((std::filesystem::path(ctx.cfg.output_dir) / name).string(), body);
  record.outputs.push_back(name);

  ordered_json side;
  side["model"] = fit.spec.name();
  side["param_names"] = fit.param_names;
  side["seed"] = fit.seed;
  side["n_draws"] = fit.draws.rows();
  json acc = json::array();
  for (double a : fit.acceptance_rates) acc.push_back(a);
  side["acceptance_rates"] = std::move(acc);
  vol::PriorConfig prior;
  side["priors"] = {{"mean_var", prior.mean_var},
                    {"var_sd", prior.var_sd},
                    {"nu_shape", prior.nu_shape},
                    {"nu_scale", prior.nu_scale},
                    {"kappa_max", prior.kappa_max},
                    {"mu_h_var", prior.mu_h_var},
                    {"phi_beta_a", prior.phi_beta_a},
                    {"phi_beta_b", prior.phi_beta_b},
                    {"sigma_h2_shape", prior.sigma_h2_shape},
                    {"sigma_h2_scale", prior.sigma_h2_scale}};
  std::string side_name = stem + ".manifest.json";
  write_text_file((std::filesystem::path(ctx.cfg.output_dir) / side_name).string(),
                  side.dump(2) + "\n");
  record.outputs.push_back(side_name);
}

void stage_volatility(Ctx& ctx, StageRecord& record) {
  ReportTable t;
  t.id = "posterior_summary";
  t.title = "Posterior parameter summaries";
  t.columns = {"Series", "Model", "Parameter", "Mean", "SD", "Acceptance"};
  for (const auto& name : ctx.cfg.analysis_series) {
    const Series& y = lookup(ctx, name, "volatility");
    for (const auto& model : ctx.cfg.models) {
      auto spec = vol::VolatilityModelSpec::from_name(model);
      vol::McmcConfig mc = ctx.cfg.mcmc;
      mc.seed = sub_seed(ctx, "fit-" + name + "-" + model);
      vol::PosteriorDraws fit = spec.family == vol::Family::garch
                                    ? vol::fit_garch_bayes(spec, y, {}, mc)
                                    : vol::fit_sv_bayes(spec, y, {}, mc);
      Eigen::VectorXd mean = fit.posterior_mean();
      Eigen::VectorXd sd = fit.posterior_sd();
      for (std::size_t i = 0; i < fit.param_names.size(); ++i) {
        double acc = i < fit.acceptance_rates.size() ? fit.acceptance_rates[i] : 1.0;
        t.rows.push_back({text_cell(name), text_cell(model), text_cell(fit.param_names[i]),
                          number_cell(mean[static_cast<Eigen::Index>(i)]),
                          number_cell(sd[static_cast<Eigen::Index>(i)]), number_cell(acc)});
      }
      if (fit.acceptance_rates.size() == fit.param_names.size() + 1)
        t.rows.push_back({text_cell(name), text_cell(model), text_cell("(states)"),
                          text_cell(""), text_cell(""),
                          number_cell(fit.acceptance_rates.back())});
      write_draws_csv(ctx, fit, "draws_" + slug(name) + "_" + slug(model), record);
      ctx.fits.emplace(name + "/" + model, std::move(fit));
    }
  }
  t.notes = {"Acceptance is the Metropolis rate per parameter block (1 for",
             "conjugate updates); the (states) row is the latent-path sampler."};
  emit_tables(ctx, {t}, record);

  std::vector<Series> vols;
  for (const auto& name : ctx.cfg.analysis_series) {
    auto it = ctx.fits.find(name + "/" + ctx.cfg.volatility_source);
    if (it == ctx.fits.end()) continue;
    Series v = vol::extract_volatility(it->second);
    v.name = name + "_vol";
    ctx.store.emplace(v.name, v);
    vols.push_back(std::move(v));
  }
  if (!vols.empty()) {
    write_csv((std::filesystem::path(ctx.cfg.output_dir) / "volatility.csv").string(), vols);
    record.outputs.push_back("volatility.csv");
  }
}

void stage_model_comparison(Ctx& ctx, StageRecord& record) {
  ReportTable t;
  t.id = "model_ranking";
  t.title = "Marginal-likelihood model ranking";
  t.columns = {"Series", "Rank", "Model", "log ML", "NSE", "ESS"};
  for (const auto& name : ctx.cfg.analysis_series) {
    const Series& y = lookup(ctx, name, "model_comparison");
    std::vector<vol::MarginalLikelihoodEstimate> estimates;
    for (const auto& model : ctx.cfg.models) {
      const auto& fit = ctx.fits.at(name + "/" + model);
      estimates.push_back(vol::marginal_likelihood(
          fit, y, ctx.cfg.ml_is_draws, sub_seed(ctx, "ml-" + name + "-" + model), {},
          ctx.cfg.ml_inner_draws));
    }
    auto ranked = vol::ranking_table(std::move(estimates));
    for (std::size_t i = 0; i < ranked.size(); ++i)
      t.rows.push_back({text_cell(name), number_cell(static_cast<double>(i + 1)),
                        text_cell(ranked[i].spec.name()), number_cell(ranked[i].log_ml),
                        number_cell(ranked[i].nse), number_cell(ranked[i].ess)});
  }
  t.notes = {"Importance-sampling estimates of log p(y | model) under the",
             "documented priors; NSE by the delta method on the weights."};
  emit_tables(ctx, {t}, record);
}

void quantile_battery(Ctx& ctx, const CausalityPair& pair,
                      const std::string& id_prefix, const std::string& label,
                      std::vector<ReportTable>& tables) {
  const Series& cause = lookup(ctx, pair.cause, "quantile_causality");
  const Series& effect = lookup(ctx, pair.effect, "quantile_causality");

  SubsamplingConfig sub;
  sub.k = ctx.cfg.subsample_k;
  sub.seed = sub_seed(ctx, "subsample-" + pair.cause + "-" + pair.effect);
  CausalityQuantileResult r =
      causality_table(effect, cause, sub, ctx.cfg.quantile_lags);

  ReportTable t;
  t.id = id_prefix + "_" + slug(pair.cause) + "_to_" + slug(pair.effect);
  t.title = label + ": " + pair.cause + " to " + pair.effect;
  t.columns = {"Lag", "[" + format_number(r.joint_interval.first) + ", " +
                          format_number(r.joint_interval.second) + "]"};
  for (double tau : ctx.cfg.grid.levels) t.columns.push_back(format_number(tau));
  for (int lag : ctx.cfg.quantile_lags) {
    std::vector<Cell> row = {number_cell(lag), p_value_cell(r.joint.at(lag).p_value)};
    for (double tau : ctx.cfg.grid.levels)
      row.push_back(p_value_cell(r.per_tau.at(lag).at(tau).p_value));
    t.rows.push_back(std::move(row));
  }
  t.notes = {"Subsampling p-values of the causality-in-quantiles statistic;",
             "bold marks p <= 0.10. Null: '" + pair.cause + "' does not cause '" +
                 pair.effect + "' in the given quantiles."};
  tables.push_back(std::move(t));

  AugmentedQarResult aq = augmented_qar(
      effect, cause, ctx.cfg.grid, ctx.cfg.bootstrap_replicates,
      sub_seed(ctx, "aqar-" + pair.cause + "-" + pair.effect));
  ReportTable a;
  a.id = "augmented_qar_" + slug(pair.cause) + "_to_" + slug(pair.effect);
  a.title = "Augmented QAR: " + pair.cause + " on lagged " + pair.effect + " quantiles";
  a.columns = {"tau", "beta", "95% lo", "95% hi"};
  for (std::size_t i = 0; i < aq.taus.size(); ++i)
    a.rows.push_back({number_cell(aq.taus[i]), number_cell(aq.beta[i]),
                      number_cell(aq.lo[i]), number_cell(aq.hi[i])});
  a.notes = {"Coefficient on lagged '" + pair.cause + "' in the quantile regression of '" +
                 pair.effect + "' on three own lags; studentized moving-block bootstrap " +
                 "bands (" + std::to_string(aq.bootstrap_replicates) + " replicates, block " +
                 std::to_string(aq.block_length) + ")."};
  if (aq.collinear) a.notes.push_back("Warning: collinear design detected.");
  tables.push_back(std::move(a));
}

void stage_quantile_causality(Ctx& ctx, StageRecord& record) {
  std::vector<ReportTable> tables;
  for (const auto& pair : ctx.cfg.pairs)
    quantile_battery(ctx, pair, "quantile_causality", "Causality in quantiles", tables);
  if (ctx.cfg.causality_on_volatility) {
    for (const auto& pair : ctx.cfg.pairs) {
      CausalityPair vol_pair{pair.cause + "_vol", pair.effect + "_vol"};
      quantile_battery(ctx, vol_pair, "quantile_causality_vol",
                       "Causality in quantiles (volatility, " +
                           ctx.cfg.volatility_source + ")",
                       tables);
    }
  }
  emit_tables(ctx, tables, record);
}

struct StageDef {
  std::string name;
  std::vector<std::string> deps;
  void (*fn)(Ctx&, StageRecord&);
};

const std::vector<StageDef>& stage_defs() {
  static const std::vector<StageDef> defs = {
      {"summary", {}, stage_summary},
      {"unit_root", {}, stage_unit_root},
      {"bds", {}, stage_bds},
      {"linear_granger", {}, stage_linear_granger},
      {"nonparam_causality", {}, stage_nonparam},
      {"volatility", {}, stage_volatility},
      {"model_comparison", {"volatility"}, stage_model_comparison},
      {"quantile_causality", {}, stage_quantile_causality},
  };
  return defs;
}

}  // namespace

const std::vector<std::string>& pipeline_stage_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& d : stage_defs()) out.push_back(d.name);
    return out;
  }();
  return names;
}

// ---------------------------------------------------------------------------
// Config loading

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) config_fail("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();

  PipelineConfig cfg;
  cfg.raw_text = buf.str();
  json j;
  try {
    j = json::parse(cfg.raw_text);
  } catch (const json::parse_error& e) {
    config_fail(path + ": " + e.what());
  }
  try {
    if (!j.contains("seed")) config_fail("'seed' is mandatory (no wall-clock default)");
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.output_dir = j.value("output_dir", cfg.output_dir);

    const json& input = need(j, "input", "config");
    cfg.input_file = need(input, "file", "input").get<std::string>();
    cfg.schema.date_column = input.value("date_column", cfg.schema.date_column);
    for (const auto& [name, col] : need(input, "columns", "input").items())
      cfg.schema.series_columns[name] = col.get<std::string>();

    if (j.contains("transforms")) {
      const json& tr = j.at("transforms");
      if (tr.contains("deflate"))
        for (const auto& d : tr.at("deflate"))
          cfg.deflate.push_back({need(d, "series", "deflate").get<std::string>(),
                                 need(d, "deflator", "deflate").get<std::string>()});
      if (tr.contains("log")) cfg.log_series = string_list(tr.at("log"), "transforms.log");
      if (tr.contains("returns"))
        cfg.return_series = string_list(tr.at("returns"), "transforms.returns");
    }

    cfg.stages = string_list(need(j, "stages", "config"), "stages");
    cfg.analysis_series =
        string_list(need(j, "analysis_series", "config"), "analysis_series");
    if (j.contains("summary_series"))
      cfg.summary_series = string_list(j.at("summary_series"), "summary_series");
    if (j.contains("unit_root_series"))
      cfg.unit_root_series = string_list(j.at("unit_root_series"), "unit_root_series");
    if (j.contains("pairs"))
      for (const auto& p : j.at("pairs"))
        cfg.pairs.push_back({need(p, "cause", "pairs").get<std::string>(),
                             need(p, "effect", "pairs").get<std::string>()});

    if (j.contains("quantile")) {
      const json& q = j.at("quantile");
      if (q.contains("grid")) {
        const json& g = q.at("grid");
        if (g.is_string()) {
          std::string kind = g.get<std::string>();
          if (kind == "deciles") cfg.grid = QuantileGrid::deciles();
          else if (kind == "vigintiles") cfg.grid = QuantileGrid::vigintiles();
          else config_fail("quantile.grid: unknown grid '" + kind + "'");
        } else if (g.is_array()) {
          std::vector<double> levels;
          for (const auto& e : g) levels.push_back(e.get<double>());
          cfg.grid = QuantileGrid::custom(std::move(levels));
        } else {
          config_fail("quantile.grid: expected a name or an array of levels");
        }
      }
      cfg.subsample_k = q.value("k", cfg.subsample_k);
      if (q.contains("lags")) cfg.quantile_lags = int_list(q.at("lags"), "quantile.lags");
      cfg.bootstrap_replicates = q.value("bootstrap_replicates", cfg.bootstrap_replicates);
    }

    if (j.contains("granger")) {
      const json& g = j.at("granger");
      cfg.granger_max_lag = g.value("max_lag", cfg.granger_max_lag);
      cfg.granger_fixed_lag = g.value("fixed_lag", cfg.granger_fixed_lag);
      std::string crit = g.value("criterion", std::string("AIC"));
      if (crit == "AIC") cfg.granger_criterion = InfoCriterion::AIC;
      else if (crit == "SIC") cfg.granger_criterion = InfoCriterion::SIC;
      else config_fail("granger.criterion: expected 'AIC' or 'SIC'");
    }
    if (j.contains("nonparam") && j.at("nonparam").contains("lags"))
      cfg.nonparam_lags = int_list(j.at("nonparam").at("lags"), "nonparam.lags");
    if (j.contains("bds_max_dim")) cfg.bds_max_dim = j.at("bds_max_dim").get<int>();

    if (j.contains("models")) cfg.models = string_list(j.at("models"), "models");
    cfg.volatility_source = j.value("volatility_source", cfg.volatility_source);
    if (j.contains("mcmc")) {
      const json& m = j.at("mcmc");
      cfg.mcmc.n_draws = m.value("n_draws", cfg.mcmc.n_draws);
      cfg.mcmc.n_burnin = m.value("n_burnin", cfg.mcmc.n_burnin);
      cfg.mcmc.n_chains = m.value("n_chains", cfg.mcmc.n_chains);
    }
    if (j.contains("marginal_likelihood")) {
      const json& m = j.at("marginal_likelihood");
      cfg.ml_is_draws = m.value("n_is_draws", cfg.ml_is_draws);
      cfg.ml_inner_draws = m.value("inner_draws", cfg.ml_inner_draws);
    }
    cfg.causality_on_volatility =
        j.value("causality_on_volatility", cfg.causality_on_volatility);
  } catch (const json::exception& e) {
    config_fail(path + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

void PipelineConfig::validate() const {
  if (input_file.empty()) config_fail("input.file must not be empty");
  if (schema.series_columns.empty()) config_fail("input.columns must not be empty");
  if (subsample_k < 1.0) config_fail("quantile.k must be >= 1");
  if (stages.empty()) config_fail("stages must not be empty");
  grid.validate();

  std::set<std::string> known(pipeline_stage_names().begin(), pipeline_stage_names().end());
  std::set<std::string> selected;
  for (const auto& s : stages) {
    if (!known.count(s)) config_fail("unknown stage '" + s + "'");
    selected.insert(s);
  }
  for (const auto& d : stage_defs())
    if (selected.count(d.name))
      for (const auto& dep : d.deps)
        if (!selected.count(dep))
          config_fail("stage '" + d.name + "' requires stage '" + dep + "'");

  std::set<std::string> defined;
  for (const auto& [name, col] : schema.series_columns) defined.insert(name);
  for (const auto& rule : deflate) {
    if (!defined.count(rule.series))
      config_fail("deflate: series '" + rule.series + "' is not defined");
    if (!defined.count(rule.deflator))
      config_fail("deflate: deflator '" + rule.deflator + "' is not defined");
    defined.insert(rule.series + "_real");
  }
  for (const auto& name : log_series) {
    if (!defined.count(name)) config_fail("log: series '" + name + "' is not defined");
    defined.insert(name + "_log");
  }
  for (const auto& name : return_series) {
    if (!defined.count(name)) config_fail("returns: series '" + name + "' is not defined");
    defined.insert(name + "_ret");
  }
  for (const auto& name : analysis_series)
    if (!defined.count(name))
      config_fail("analysis_series: series '" + name + "' is not defined");
  for (const auto& name : summary_series)
    if (!defined.count(name))
      config_fail("summary_series: series '" + name + "' is not defined");
  for (const auto& name : unit_root_series)
    if (!defined.count(name))
      config_fail("unit_root_series: series '" + name + "' is not defined");
  for (const auto& p : pairs) {
    if (!defined.count(p.cause)) config_fail("pairs: series '" + p.cause + "' is not defined");
    if (!defined.count(p.effect))
      config_fail("pairs: series '" + p.effect + "' is not defined");
  }

  bool needs_models = selected.count("volatility") || selected.count("model_comparison");
  if (needs_models) {
    if (models.empty()) config_fail("volatility stage selected but 'models' is empty");
    for (const auto& m : models) {
      try {
        (void)vol::VolatilityModelSpec::from_name(m);
      } catch (const std::exception&) {
        config_fail("models: unknown model '" + m + "'");
      }
    }
    if (std::find(models.begin(), models.end(), volatility_source) == models.end())
      config_fail("volatility_source '" + volatility_source + "' is not in the model menu");
  }
  if (selected.count("model_comparison") && models.size() < 2)
    config_fail("model_comparison needs a menu of at least 2 models");
  if (selected.count("quantile_causality") && causality_on_volatility &&
      !selected.count("volatility"))
    config_fail(
        "causality_on_volatility requires the volatility stage (or set it to false)");

  for (int lag : quantile_lags)
    if (lag < 1) config_fail("quantile.lags must be >= 1");
  if (quantile_lags.empty()) config_fail("quantile.lags must not be empty");
  for (int lag : nonparam_lags)
    if (lag < 1) config_fail("nonparam.lags must be >= 1");
  if (bootstrap_replicates < 1) config_fail("quantile.bootstrap_replicates must be >= 1");
  if (granger_max_lag < 1) config_fail("granger.max_lag must be >= 1");
  if (granger_fixed_lag < 0) config_fail("granger.fixed_lag must be >= 0");
  if (bds_max_dim < 2) config_fail("bds_max_dim must be >= 2");
  if (mcmc.n_draws < 1 || mcmc.n_burnin < 0 || mcmc.n_chains < 1)
    config_fail("mcmc settings must be positive");
  if (ml_is_draws < 2 || ml_inner_draws < 2)
    config_fail("marginal_likelihood draws must be >= 2");
}

// ---------------------------------------------------------------------------
// Run

std::string RunManifest::to_json() const {
  ordered_json j;
  j["artifact_version"] = artifact_version;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["failed"] = failed;
  ordered_json stage_list = ordered_json::array();
  for (const auto& s : stages) {
    ordered_json e;
    e["name"] = s.name;
    e["status"] = s.status;
    if (!s.error.empty()) e["error"] = s.error;
    e["seed"] = s.seed;
    e["outputs"] = s.outputs;
    stage_list.push_back(std::move(e));
  }
  j["stages"] = std::move(stage_list);
  j["files"] = files;
  return j.dump(2) + "\n";
}

RunManifest run(const PipelineConfig& config) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec)
    throw Error(Errc::io_error, "cannot create output directory '" + config.output_dir +
                                    "': " + ec.message());

  RunManifest manifest;
  manifest.artifact_version = kArtifactVersion;
  manifest.config_hash = hex64(fnv1a(config.raw_text));
  manifest.seed = config.seed;

  Ctx ctx{config, {}, {}, 0};
  ordered_json timings;
  std::set<std::string> failed_stages;
  std::set<std::string> selected(config.stages.begin(), config.stages.end());

  auto run_stage = [&](const std::string& name, const std::vector<std::string>& deps,
                       void (*fn)(Ctx&, StageRecord&)) {
    StageRecord record;
    record.name = name;
    record.seed = Rng::derive(config.seed, Rng::stream_of(("stage-" + name).c_str()));
    ctx.stage_seed = record.seed;
    std::vector<std::string> blocked;
    for (const auto& dep : deps)
      if (failed_stages.count(dep)) blocked.push_back(dep);
    auto start = std::chrono::steady_clock::now();
    if (!blocked.empty()) {
      record.status = "skipped";
      record.error = "dependency failed: " + blocked.front();
      failed_stages.insert(name);
    } else {
      try {
        fn(ctx, record);
        record.status = "ok";
      } catch (const std::exception& e) {
        record.status = "failed";
        record.error = e.what();
        failed_stages.insert(name);
        manifest.failed = true;
      }
    }
    auto stop = std::chrono::steady_clock::now();
    timings[name] =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start)
            .count();
    manifest.stages.push_back(std::move(record));
  };

  run_stage("ingest", {}, stage_ingest);
  run_stage("transform", {"ingest"}, stage_transform);
  for (const auto& def : stage_defs()) {
    if (!selected.count(def.name)) continue;
    std::vector<std::string> deps = {"transform"};
    deps.insert(deps.end(), def.deps.begin(), def.deps.end());
    if (def.name == "quantile_causality" && config.causality_on_volatility)
      deps.push_back("volatility");
    run_stage(def.name, deps, def.fn);
  }

  for (const auto& s : manifest.stages)
    for (const auto& f : s.outputs) manifest.files.push_back(f);
  manifest.files.push_back("manifest.json");
  manifest.files.push_back("timings.json");

  write_text_file((std::filesystem::path(config.output_dir) / "timings.json").string(),
                  timings.dump(2) + "\n");
  write_text_file((std::filesystem::path(config.output_dir) / "manifest.json").string(),
                  manifest.to_json());
  return manifest;
}

}  // namespace qcv
