#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pinnctl/cli/config.hpp"
#include "pinnctl/cli/run.hpp"

using namespace pinnctl::cli;

namespace {

struct Flags {
  std::string problem;
  std::string engine;
  std::string config;
  std::vector<std::string> sets;
  std::string wj, epochs, seed, output, workers, control;
  bool nondeterministic = false;
};

void add_common(CLI::App* sub, Flags& f, bool with_engine) {
  sub->add_option("-p,--problem", f.problem, "laplace-fwd, laplace-ctl, burgers-fwd, burgers-ctl, ks-fwd, ks-ctl");
  if (with_engine) sub->add_option("-e,--engine", f.engine, "forward, control, linesearch, dal, evaluate, check-gradients");
  sub->add_option("-c,--config", f.config, "flat key = value config file");
  sub->add_option("-s,--set", f.sets, "override one key, e.g. pinn.epochs=100");
  sub->add_option("--wj", f.wj, "cost weight w_J (pinn.w_J)");
  sub->add_option("--epochs", f.epochs, "training epochs (pinn.epochs)");
  sub->add_option("--seed", f.seed, "root seed");
  sub->add_option("-o,--output", f.output, "output directory");
  sub->add_option("--workers", f.workers, "worker threads");
  sub->add_flag("--nondeterministic", f.nondeterministic, "record the run as non-deterministic");
}

Settings flag_settings(const Flags& f, const std::string& engine) {
  Settings s;
  auto put = [&s](const char* key, const std::string& v, const char* flag) {
    if (!v.empty()) add_flag(s, std::string(key) + "=" + v, flag);
  };
  put("problem", f.problem, "--problem");
  put("engine", engine, engine == f.engine ? "--engine" : "subcommand");
  put("pinn.w_J", f.wj, "--wj");
  put("pinn.epochs", f.epochs, "--epochs");
  put("seed", f.seed, "--seed");
  put("output", f.output, "--output");
  put("workers", f.workers, "--workers");
  put("evaluate.control", f.control, "--control");
  if (f.nondeterministic) add_flag(s, "deterministic=false", "--nondeterministic");
  for (const auto& a : f.sets) add_flag(s, a, "--set " + a);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PINN and adjoint optimal control runs"};
  app.require_subcommand(1);
  Flags f;
  std::string export_dir;

  const char* engines[] = {"forward", "control", "linesearch", "dal", "evaluate", "check-gradients"};
  std::vector<CLI::App*> subs;
  for (const char* e : engines) {
    CLI::App* sub = app.add_subcommand(e, std::string("run the ") + e + " engine");
    add_common(sub, f, false);
    if (std::string(e) == "evaluate") sub->add_option("--control", f.control, "control interchange file");
    subs.push_back(sub);
  }
  CLI::App* run_cmd = app.add_subcommand("run", "run the engine named by --engine or the config");
  add_common(run_cmd, f, true);
  run_cmd->add_option("--control", f.control, "control interchange file (evaluate engine)");
  CLI::App* exp = app.add_subcommand("export", "write plot-data CSVs for a finished run");
  exp->add_option("run_dir", export_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (exp->parsed()) {
    try {
      export_plotdata(export_dir, std::cout);
      return kExitOk;
    } catch (const std::exception& e) {
      nlohmann::json record;
      classify(e, record);
      std::cerr << record.dump() << '\n';
      return kExitUsage;
    }
  }

  std::string engine = f.engine;
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) engine = engines[i];

  RunConfig rc;
  try {
    const Settings file = f.config.empty() ? Settings{} : parse_config_file(f.config);
    rc = resolve(file, flag_settings(f, engine));
  } catch (const std::exception& e) {
    nlohmann::json record;
    const int code = classify(e, record);
    std::cerr << record.dump() << '\n';
    return code;
  }
  return run(rc, std::cout);
}
