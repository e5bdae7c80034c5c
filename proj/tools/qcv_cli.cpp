#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcv/csv.hpp"
#include "qcv/errors.hpp"
#include "qcv/pipeline.hpp"
#include "qcv/volatility/garch.hpp"
#include "qcv/volatility/sv.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitStageFailure = 3;

using json = nlohmann::json;

int cmd_validate(const std::string& config_path) {
  qcv::PipelineConfig::from_json_file(config_path);
  std::cout << "config ok: " << config_path << "\n";
  return kExitOk;
}

int cmd_run(const std::string& config_path) {
  auto config = qcv::PipelineConfig::from_json_file(config_path);
  qcv::RunManifest manifest = qcv::run(config);
  for (const auto& s : manifest.stages) {
    std::cout << s.name << ": " << s.status;
    if (!s.error.empty()) std::cout << " (" << s.error << ")";
    std::cout << "\n";
  }
  std::cout << (manifest.failed ? "FAILED" : "ok") << ", manifest at " << config.output_dir
            << "/manifest.json\n";
  return manifest.failed ? kExitStageFailure : kExitOk;
}

/// DGP spec: {"model": name, "t": length, "seed": n, "output": csv path,
/// "params": {field: value, ...}} with fields named like the model's
/// parameter vector (mu, alpha0, alpha1, beta1, beta2, gamma, lambda, psi,
/// nu, kappa, mu_j, sigma_j; SV: mu, mu_h, phi, phi2, sigma_h, rho, ...).
int cmd_simulate(const std::string& spec_path) {
  std::ifstream f(spec_path, std::ios::binary);
  if (!f) throw qcv::Error(qcv::Errc::config_error, "cannot open '" + spec_path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw qcv::Error(qcv::Errc::config_error, spec_path + ": " + e.what());
  }
  for (const char* key : {"model", "t", "seed", "output"})
    if (!j.contains(key))
      throw qcv::Error(qcv::Errc::config_error,
                       spec_path + ": missing required key '" + std::string(key) + "'");

  qcv::vol::VolatilityModelSpec spec;
  try {
    spec = qcv::vol::VolatilityModelSpec::from_name(j.at("model").get<std::string>());
  } catch (const std::exception& e) {
    throw qcv::Error(qcv::Errc::config_error, e.what());
  }
  int t_len = j.at("t").get<int>();
  std::uint64_t seed = j.at("seed").get<std::uint64_t>();
  std::string output = j.at("output").get<std::string>();
  json params = j.value("params", json::object());

  auto set_or_fail = [&](bool matched, const std::string& key) {
    if (!matched)
      throw qcv::Error(qcv::Errc::config_error,
                       "params: '" + key + "' is not a parameter of " + spec.name());
  };

  qcv::Series sim;
  if (spec.family == qcv::vol::Family::garch) {
    qcv::vol::GarchParams p;
    for (const auto& [key, value] : params.items()) {
      double v = value.get<double>();
      bool m = true;
      if (key == "mu") p.mu = v;
      else if (key == "alpha0") p.alpha0 = v;
      else if (key == "alpha1") p.alpha1 = v;
      else if (key == "beta1") p.beta1 = v;
      else if (key == "beta2") p.beta2 = v;
      else if (key == "gamma") p.gamma = v;
      else if (key == "lambda") p.lambda = v;
      else if (key == "psi") p.psi = v;
      else if (key == "nu") p.nu = v;
      else if (key == "kappa") p.kappa = v;
      else if (key == "mu_j") p.mu_j = v;
      else if (key == "sigma_j") p.sigma_j = v;
      else m = false;
      set_or_fail(m, key);
    }
    try {
      qcv::vol::validate_params(spec, p);
    } catch (const std::exception& e) {
      throw qcv::Error(qcv::Errc::config_error, e.what());
    }
    sim = qcv::vol::simulate_garch(spec, p, t_len, seed);
  } else {
    qcv::vol::SvParams p;
    for (const auto& [key, value] : params.items()) {
      double v = value.get<double>();
      bool m = true;
      if (key == "mu") p.mu = v;
      else if (key == "mu_h") p.mu_h = v;
      else if (key == "phi") p.phi = v;
      else if (key == "phi2") p.phi2 = v;
      else if (key == "sigma_h") p.sigma_h = v;
      else if (key == "lambda") p.lambda = v;
      else if (key == "psi") p.psi = v;
      else if (key == "nu") p.nu = v;
      else if (key == "rho") p.rho = v;
      else if (key == "kappa") p.kappa = v;
      else if (key == "mu_j") p.mu_j = v;
      else if (key == "sigma_j") p.sigma_j = v;
      else m = false;
      set_or_fail(m, key);
    }
    try {
      qcv::vol::validate_params(spec, p);
    } catch (const std::exception& e) {
      throw qcv::Error(qcv::Errc::config_error, e.what());
    }
    sim = qcv::vol::simulate_sv(spec, p, t_len, seed);
  }
  qcv::write_csv(output, {sim});
  std::cout << "wrote " << sim.size() << " observations of " << spec.name() << " to "
            << output << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcv: volatility and causality batch pipeline"};
  app.require_subcommand(1);

  std::string run_config, validate_config, simulate_spec;
  auto* run_cmd = app.add_subcommand("run", "execute a pipeline config");
  run_cmd->add_option("config", run_config, "JSON config file")->required();
  auto* validate_cmd = app.add_subcommand("validate", "check a config without running");
  validate_cmd->add_option("config", validate_config, "JSON config file")->required();
  auto* simulate_cmd = app.add_subcommand("simulate", "generate data from a model DGP");
  simulate_cmd->add_option("spec", simulate_spec, "JSON DGP spec")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_config);
    if (validate_cmd->parsed()) return cmd_validate(validate_config);
    if (simulate_cmd->parsed()) return cmd_simulate(simulate_spec);
  } catch (const qcv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == qcv::Errc::config_error ? kExitConfigError : kExitStageFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStageFailure;
  }
  return kExitConfigError;
}
