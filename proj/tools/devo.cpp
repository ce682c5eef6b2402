#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "devo/workbench.hpp"

namespace {

int run_simulate(const std::string& config, std::optional<std::string> out_dir)
{
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = devo::load_config(config);
  if (!out_dir)
    out_dir = cfg.output_dir;
  if (!out_dir)
    throw devo::ConfigError("output", "no output directory (use -o or the 'output' key)");
  const auto sim = devo::simulate(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  devo::write_outputs(sim, *out_dir, wall);
  if (sim.blew_up)
    std::cerr << "blow-up at t=" << sim.report["blow_up"]["time"].get<double>() << "\n";
  std::cout << "wrote " << sim.trajectory.size() << " rows to " << *out_dir << "\n";
  return sim.exit_code();
}

int run_certify(const std::string& config, std::optional<double> omega_prime, bool sweep)
{
  const auto cfg = devo::load_config(config);
  if (!omega_prime && !sweep)
    omega_prime = cfg.certificate.omega_prime;
  const auto r = devo::certify(cfg, sweep ? std::nullopt : omega_prime);
  std::cout << r.to_json().dump(2) << "\n";
  return r.certificate.holds_asymptotic ? devo::ExitOk : devo::ExitCertificate;
}

int run_convergence(const std::string& config, const std::vector<double>& dts)
{
  const auto cfg = devo::load_config(config);
  std::cout << devo::convergence(cfg, dts).to_json().dump(2) << "\n";
  return devo::ExitOk;
}

int run_epsilon(const std::string& config, const std::vector<double>& eps, std::optional<double> reference)
{
  const auto cfg = devo::load_config(config);
  std::cout << devo::epsilon_study(cfg, eps, reference).dump(2) << "\n";
  return devo::ExitOk;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"delay evolution workbench"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out_dir;
  std::optional<double> omega_prime, reference;
  bool sweep = false;
  std::vector<double> dts, eps;

  auto* sim = app.add_subcommand("simulate", "solve and write trajectory.csv, report.json, timing.json");
  sim->add_option("-c,--config", config, "config file")->required();
  sim->add_option("-o,--out", out_dir, "output directory");

  auto* cert = app.add_subcommand("certify", "evaluate the decay certificate");
  cert->add_option("-c,--config", config, "config file")->required();
  auto* op = cert->add_option("--omega-prime", omega_prime, "fixed omega'");
  cert->add_flag("--sweep", sweep, "search omega' for the largest predicted rate")->excludes(op);

  auto* conv = app.add_subcommand("convergence", "observed order over halving steps");
  conv->add_option("-c,--config", config, "config file")->required();
  conv->add_option("--dts", dts, "step sizes, each half the previous")->required()->delimiter(',');

  auto* epsc = app.add_subcommand("epsilon-study", "delay regularization study");
  epsc->add_option("-c,--config", config, "config file")->required();
  epsc->add_option("--eps", eps, "decreasing shifts")->required()->delimiter(',');
  epsc->add_option("--reference", reference, "reference shift (default: smallest eps)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : devo::ExitConfig;
  }

  try {
    if (*sim)
      return run_simulate(config, out_dir);
    if (*cert)
      return run_certify(config, omega_prime, sweep);
    if (*conv)
      return run_convergence(config, dts);
    return run_epsilon(config, eps, reference);
  } catch (const devo::BlowUpError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return devo::ExitBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return devo::ExitConfig;
  }
}
