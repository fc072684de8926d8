#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "pinnctl/cli/config.hpp"
#include "pinnctl/cli/run.hpp"
#include "pinnctl/problems/problems.hpp"

using namespace pinnctl;
using namespace pinnctl::cli;
namespace fs = std::filesystem;

namespace {

Settings flags(std::initializer_list<std::string> kv) {
  Settings s;
  for (const auto& a : kv) add_flag(s, a, "--set " + a);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const Settings& file, const Settings& fl) {
  try {
    resolve(file, fl);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Settings tiny_forward(const fs::path& out) {
  return flags({"problem=burgers-fwd", "engine=forward", "pinn.epochs=3", "pinn.n_residual=120",
                "pinn.state_hidden=8,8", "pinn.log_every=0", "output=" + out.string()});
}

}  // namespace

TEST(Config, EmptyConfigGivesDefaults) {
  const RunConfig rc = resolve({}, flags({"problem=burgers-ctl", "engine=control"}));
  EXPECT_EQ(rc.train.epochs, 30000);
  EXPECT_EQ(rc.train.n_residual, 20000);
  EXPECT_EQ(rc.train.state_hidden, (std::vector<int>{50, 50, 50, 50}));
  EXPECT_EQ(rc.train.control_hidden, (std::vector<int>{30, 30, 30}));
  EXPECT_DOUBLE_EQ(rc.train.schedule.at(19999), 1e-3);
  EXPECT_DOUBLE_EQ(rc.train.schedule.at(20000), 1e-4);
  EXPECT_DOUBLE_EQ(rc.train.schedule.at(25000), 1e-5);
  EXPECT_DOUBLE_EQ(rc.w_J, 1.0);
  EXPECT_EQ(rc.resolved.at("pinn.epochs").origin, "defaults");
}

TEST(Config, FlagOverridesFile) {
  const Settings file = parse_config_text("problem = burgers-ctl\nengine = control\npinn.w_J = 10\n", "run.cfg");
  Settings fl;
  add_flag(fl, "pinn.w_J=1e-3", "--wj");
  const RunConfig rc = resolve(file, fl);
  EXPECT_DOUBLE_EQ(rc.w_J, 1e-3);
  EXPECT_EQ(rc.resolved.at("pinn.w_J").origin, "--wj");
  EXPECT_DOUBLE_EQ(resolve(file, {}).w_J, 10.0);
  EXPECT_EQ(resolve(file, {}).resolved.at("pinn.w_J").origin, "run.cfg:3");
}

TEST(Config, MalformedNumberNamesKeyAndLine) {
  const Settings file = parse_config_text("problem = burgers-fwd\nengine = forward\n\npinn.epochs = 3x\n", "a.cfg");
  const std::string e = error_of(file, {});
  EXPECT_NE(e.find("pinn.epochs"), std::string::npos) << e;
  EXPECT_NE(e.find("a.cfg:4"), std::string::npos) << e;
}

TEST(Config, UnknownKeyRejectedWithLine) {
  try {
    parse_config_text("# comment\npinn.epoch = 3\n", "b.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("b.cfg:2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("pinn.epoch"), std::string::npos);
  }
  Settings s;
  EXPECT_THROW(add_flag(s, "nope=1", "--set"), ConfigError);
  EXPECT_THROW(parse_config_text("pinn.epochs 3\n", "c.cfg"), ConfigError);
  EXPECT_THROW(parse_config_text("seed = 1\nseed = 2\n", "c.cfg"), ConfigError);
}

TEST(Config, SectionsFollowEngine) {
  EXPECT_NE(error_of({}, flags({"problem=burgers-ctl", "engine=control", "dal.beta=2"})).find("does not apply"),
            std::string::npos);
  EXPECT_NE(error_of({}, flags({"problem=burgers-fwd", "engine=forward", "pinn.w_J=1"})).find("does not apply"),
            std::string::npos);
  const RunConfig d = resolve({}, flags({"problem=ks-ctl", "engine=dal"}));
  EXPECT_EQ(d.resolved.count("pinn.epochs"), 0u);
  EXPECT_DOUBLE_EQ(d.dal.beta, 1e-3);
  EXPECT_FALSE(error_of({}, flags({"problem=burgers-fwd", "engine=dal"})).empty());
  EXPECT_FALSE(error_of({}, flags({"problem=burgers-ctl", "engine=forward"})).empty());
  EXPECT_FALSE(error_of({}, flags({"engine=forward"})).empty());
  EXPECT_FALSE(error_of({}, flags({"problem=heat", "engine=forward"})).empty());
  EXPECT_FALSE(error_of({}, flags({"problem=ks-ctl", "engine=linesearch", "linesearch.grid=1,0.1"})).empty());
  EXPECT_FALSE(error_of({}, flags({"problem=ks-ctl", "engine=dal", "dal.sobolev=yes"})).empty());
}

TEST(Config, LinesearchDefaults) {
  const RunConfig l = resolve({}, flags({"problem=laplace-ctl", "engine=linesearch"}));
  ASSERT_EQ(l.grid.size(), 11u);
  EXPECT_NEAR(l.grid.front(), 1e-3, 1e-15);
  EXPECT_NEAR(l.grid.back(), 1e7, 1e-6);
  EXPECT_EQ(l.step2.epochs, 6000);  // forward-problem budget
  EXPECT_EQ(resolve({}, flags({"problem=burgers-ctl", "engine=linesearch"})).grid.size(), 10u);
  const auto ks = resolve({}, flags({"problem=ks-ctl", "engine=linesearch"})).grid;
  EXPECT_NEAR(ks.front(), 1e-8, 1e-20);
  EXPECT_NEAR(ks.back(), 10.0, 1e-12);
}

TEST(Config, TextRoundTrip) {
  const RunConfig a = resolve({}, flags({"problem=ks-ctl", "engine=linesearch", "seed=7", "pinn.epochs=12"}));
  const RunConfig b = resolve(parse_config_text(a.to_text(), "manifest"), {});
  EXPECT_EQ(a.to_text(), b.to_text());
  EXPECT_EQ(b.train.seeds.init, a.train.seeds.init);
  EXPECT_EQ(b.train.epochs, 12);
}

TEST(Seeds, CounterSplitting) {
  const auto s = split_seeds(1);
  EXPECT_EQ(s.init, split_seed(1, kSeedInit));
  EXPECT_NE(s.init, s.sampling);
  EXPECT_NE(s.sampling, s.shuffle);
  EXPECT_NE(split_seeds(2).init, s.init);
  EXPECT_EQ(split_seed(42, 3), split_seed(42, 3));
}

TEST(Run, ExitCodes) {
  nlohmann::json rec;
  EXPECT_EQ(classify(solvers::NumericalError("boom"), rec), kExitNumerical);
  EXPECT_EQ(rec["error"], "numerical");
  EXPECT_EQ(classify(ConfigError("bad"), rec), kExitUsage);
  EXPECT_EQ(rec["error"], "usage");
  EXPECT_EQ(classify(std::runtime_error("disk"), rec), kExitUsage);
}

TEST(Run, OutputRootFromEnvironment) {
  RunConfig rc = resolve({}, flags({"problem=burgers-fwd", "engine=forward", "seed=5"}));
  setenv("PINNCTL_OUTPUT_ROOT", "/tmp/root_x", 1);
  EXPECT_EQ(output_dir(rc), "/tmp/root_x/burgers-fwd-forward-seed5");
  unsetenv("PINNCTL_OUTPUT_ROOT");
  EXPECT_EQ(output_dir(rc), "runs/burgers-fwd-forward-seed5");
  rc.output = "/x";
  EXPECT_EQ(output_dir(rc), "/x");
}

TEST(Run, ForwardArtifactsAndManifestReproduces) {
  TempDir t("pinnctl_cli_fwd");
  std::ostringstream log;
  const RunConfig rc = resolve({}, tiny_forward(t.path / "a"));
  ASSERT_EQ(run(rc, log), kExitOk);
  for (const char* f : {"manifest.json", "config.cfg", "summary.json", "history.csv", "state.json"})
    EXPECT_TRUE(fs::exists(t.path / "a" / f)) << f;
  const auto m = nlohmann::json::parse(slurp(t.path / "a" / "manifest.json"));
  EXPECT_EQ(m["seeds"]["init"].get<std::uint64_t>(), split_seed(1, kSeedInit));
  EXPECT_TRUE(m["versions"].contains("fftw"));

  Settings out;
  add_flag(out, "output=" + (t.path / "b").string(), "--output");
  const RunConfig again = resolve(parse_config_file((t.path / "a" / "config.cfg").string()), out);
  ASSERT_EQ(run(again, log), kExitOk);
  const auto sa = nlohmann::json::parse(slurp(t.path / "a" / "summary.json"));
  const auto sb = nlohmann::json::parse(slurp(t.path / "b" / "summary.json"));
  EXPECT_EQ(sa["final_loss"], sb["final_loss"]);
  EXPECT_EQ(sa["relative_l2_vs_oracle"].get<double>(), sb["relative_l2_vs_oracle"].get<double>());

  export_plotdata((t.path / "a").string(), log);
  const std::string field = slurp(t.path / "a" / "plotdata" / "state_field.csv");
  EXPECT_EQ(field.substr(0, field.find('\n')), "x,t,u,u_exact,abs_error");
  EXPECT_EQ(std::count(field.begin(), field.end(), '\n'), 100 * 100 + 1);
  EXPECT_TRUE(fs::exists(t.path / "a" / "plotdata" / "loss_curves.csv"));
}

TEST(Run, NumericalFailureWritesErrorRecord) {
  TempDir t("pinnctl_cli_nan");
  Settings fl = tiny_forward(t.path / "r");
  add_flag(fl, "pinn.lr=1e300", "--set");
  std::ostringstream log;
  EXPECT_EQ(run(resolve({}, fl), log), kExitNumerical);
  const auto rec = nlohmann::json::parse(slurp(t.path / "r" / "error.json"));
  EXPECT_EQ(rec["error"], "numerical");
  EXPECT_FALSE(fs::exists(t.path / "r" / "summary.json"));
}

TEST(Run, EvaluateKnownOptimumAndRoundTrip) {
  TempDir t("pinnctl_cli_eval");
  const auto p = problems::burgers_control();
  const auto c = problems::ControlField::sample(problems::ControlKind::kInitial, 0.0, p.L, 256, p.initial);
  const fs::path in = t.path / "u0.ctl";
  c.save(in.string());
  std::ostringstream log;
  const RunConfig rc = resolve({}, flags({"problem=burgers-ctl", "engine=evaluate", "evaluate.control=" + in.string(),
                                          "output=" + (t.path / "r").string()}));
  ASSERT_EQ(run(rc, log), kExitOk);
  const auto s = nlohmann::json::parse(slurp(t.path / "r" / "summary.json"));
  EXPECT_LT(s["J_hifi"].get<double>(), 1e-5);
  EXPECT_EQ(slurp(in), slurp(t.path / "r" / "control.ctl"));

  export_plotdata((t.path / "r").string(), log);
  const std::string prof = slurp(t.path / "r" / "plotdata" / "control_profile.csv");
  EXPECT_EQ(std::count(prof.begin(), prof.end(), '\n'), 257);
}

TEST(Run, CheckGradientsEngine) {
  TempDir t("pinnctl_cli_grad");
  std::ostringstream log;
  const RunConfig rc =
      resolve({}, flags({"problem=laplace-ctl", "engine=check-gradients", "output=" + (t.path / "r").string()}));
  ASSERT_EQ(run(rc, log), kExitOk);
  const auto s = nlohmann::json::parse(slurp(t.path / "r" / "summary.json"));
  EXPECT_LT(s["max_rel_error"].get<double>(), 1e-6);
  EXPECT_TRUE(fs::exists(t.path / "r" / "gradcheck.csv"));
}

TEST(Export, IncompleteRunsFail) {
  TempDir t("pinnctl_cli_export");
  std::ostringstream log;
  EXPECT_THROW(export_plotdata(t.path.string(), log), std::runtime_error);
  std::ofstream(t.path / "manifest.json") << "{}";
  EXPECT_THROW(export_plotdata(t.path.string(), log), std::runtime_error);
}
