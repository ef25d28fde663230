// rangewalk: batch driver for the range-penalised walk lab.
#include <iostream>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"
#include "rangewalk/errors.hpp"

using namespace rangewalk;
using namespace rangewalk::cli;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInfeasible = 2, kNumerical = 3 };

struct SubOptions {
  CLI::App* app = nullptr;
  std::string config_file;
  std::map<std::string, std::string> flags;
};

std::string flag_names(const std::string& key) {
  std::string names = "--" + key;
  std::string dashed = key;
  std::replace(dashed.begin(), dashed.end(), '_', '-');
  if (dashed != key) names += ",--" + dashed;
  return names;
}

int run(SubOptions& so) {
  const std::string sub = so.app->get_name();
  const std::string started = utc_now();
  Config cfg(sub);
  std::unique_ptr<RunContext> ctx;
  int status = kOk;
  std::string error;
  try {
    // the output directory is needed for the manifest even if the config file is rejected
    if (so.app->get_option("--out")->count() > 0) cfg.set("out", so.flags["out"]);
    if (!so.config_file.empty()) apply_config_file(cfg, so.config_file);
    for (const KeyDef& k : schema(sub)) {
      CLI::Option* opt = so.app->get_option("--" + k.name);
      if (opt->count() > 0) cfg.set(k.name, so.flags[k.name]);
    }
    ctx = std::make_unique<RunContext>(cfg);
    run_command(cfg, *ctx);
  } catch (const UsageError& e) {
    status = kUsage;
    error = e.what();
  } catch (const Infeasible& e) {
    status = kInfeasible;
    error = e.what();
  } catch (const InvalidInput& e) {
    status = kInfeasible;
    error = e.what();
  } catch (const NumericalFailure& e) {
    status = kNumerical;
    error = e.what();
  } catch (const std::exception& e) {
    status = kNumerical;
    error = e.what();
  }
  if (status != kOk) std::cerr << "rangewalk " << sub << ": " << error << "\n";
  try {
    write_manifest(cfg, output_directory(cfg), ctx ? ctx->outputs() : std::vector<std::string>{}, started, status,
                   error);
  } catch (const std::exception& e) {
    std::cerr << "rangewalk " << sub << ": manifest not written: " << e.what() << "\n";
    if (status == kOk) status = kNumerical;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range-penalised random walk lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  std::map<std::string, std::string> about = {
      {"constants", "ball constants lambda, omega, rho, chi per dimension"},
      {"sample", "Metropolis chains for the range-penalised measure"},
      {"zn", "partition function, exact or by annealed importance sampling"},
      {"shape", "shape statistics of a sample archive"},
      {"coarse", "coarse-graining pipeline on one walk snapshot"},
      {"dv-check", "occupation upper bound against simulation"},
      {"fk", "Faber-Krahn deficit and asymmetry of a voxel set"},
      {"ineq-check", "interpolation inequality ratios on random fields"}};

  std::map<std::string, SubOptions> subs;
  for (const std::string& name : subcommands()) {
    SubOptions& so = subs[name];
    so.app = app.add_subcommand(name, about[name]);
    so.app->add_option("--config", so.config_file, "key = value config file")->check(CLI::ExistingFile);
    for (const KeyDef& k : schema(name)) {
      std::string help = k.help;
      if (!k.fallback.empty()) help += " [" + k.fallback + "]";
      so.app->add_option(flag_names(k.name), so.flags[k.name], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  for (auto& [name, so] : subs)
    if (so.app->parsed()) return run(so);
  return kUsage;
}
