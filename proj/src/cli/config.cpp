#include "pinnctl/cli/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pinnctl/linesearch/linesearch.hpp"
#include "pinnctl/problems/problems.hpp"

namespace pinnctl::cli {
namespace {

using problems::Family;

enum class Type { kString, kInt, kUInt, kDouble, kBool, kIntList, kDoubleList };

constexpr unsigned kF = 1, kC = 2, kLS = 4, kD = 8, kE = 16, kG = 32;
constexpr unsigned kAll = kF | kC | kLS | kD | kE | kG;
constexpr unsigned kTrain = kF | kC | kLS;
constexpr unsigned kHifi = kF | kC | kLS | kD | kE | kG;

struct Key {
  const char* name;
  Type type;
  unsigned engines;
};

const Key kKeys[] = {
    {"problem", Type::kString, kAll},
    {"engine", Type::kString, kAll},
    {"output", Type::kString, kAll},
    {"seed", Type::kUInt, kAll},
    {"deterministic", Type::kBool, kAll},
    {"workers", Type::kInt, kAll},
    {"pinn.epochs", Type::kInt, kTrain},
    {"pinn.n_residual", Type::kInt, kTrain},
    {"pinn.minibatches", Type::kInt, kTrain},
    {"pinn.lr", Type::kDouble, kTrain},
    {"pinn.lr_drops", Type::kIntList, kTrain},
    {"pinn.state_hidden", Type::kIntList, kTrain},
    {"pinn.control_hidden", Type::kIntList, kC | kLS},
    {"pinn.w_r", Type::kDouble, kTrain},
    {"pinn.w_b", Type::kDouble, kTrain},
    {"pinn.w_0", Type::kDouble, kTrain},
    {"pinn.w_J", Type::kDouble, kC},
    {"pinn.chunk", Type::kInt, kTrain},
    {"pinn.checkpoint_every", Type::kInt, kTrain},
    {"pinn.log_every", Type::kInt, kTrain},
    {"linesearch.grid", Type::kDoubleList, kLS},
    {"step2.epochs", Type::kInt, kLS},
    {"step2.n_residual", Type::kInt, kLS},
    {"step2.minibatches", Type::kInt, kLS},
    {"step2.lr_drops", Type::kIntList, kLS},
    {"step2.state_hidden", Type::kIntList, kLS},
    {"dal.beta", Type::kDouble, kD},
    {"dal.max_iterations", Type::kInt, kD},
    {"dal.plateau_tol", Type::kDouble, kD},
    {"dal.plateau_window", Type::kInt, kD},
    {"dal.grad_floor", Type::kDouble, kD},
    {"dal.sobolev", Type::kBool, kD},
    {"hifi.laplace_n", Type::kInt, kHifi},
    {"hifi.burgers_N", Type::kInt, kHifi},
    {"hifi.burgers_dt", Type::kDouble, kHifi},
    {"hifi.ks_N", Type::kInt, kHifi},
    {"hifi.ks_dt", Type::kDouble, kHifi},
    {"evaluate.control", Type::kString, kE},
    {"check.directions", Type::kInt, kG},
    {"check.eps", Type::kDouble, kG},
};

// "burgers-ctl" -> "burgers-fwd"
std::string forward_name(const std::string& problem) { return problem.substr(0, problem.find('-')) + "-fwd"; }

unsigned engine_bit(Engine e) { return 1u << static_cast<unsigned>(e); }

const Key* find_key(const std::string& name) {
  for (const Key& k : kKeys)
    if (name == k.name) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>) s += fmt(v[i]);
    else s += std::to_string(v[i]);
  }
  return s;
}

[[noreturn]] void bad(const std::string& key, const Setting& s, const std::string& what) {
  throw ConfigError(s.origin + ": key '" + key + "': " + what + " (got '" + s.value + "')");
}

double to_double(const std::string& key, const Setting& s, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) bad(key, s, "expected a number");
  return v;
}

long long to_int(const std::string& key, const Setting& s, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || *end != '\0' || errno == ERANGE) bad(key, s, "expected an integer");
  return v;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  return out;
}

void check_type(const std::string& key, const Setting& s, Type t) {
  switch (t) {
    case Type::kString:
      break;
    case Type::kInt:
      to_int(key, s, s.value);
      break;
    case Type::kUInt:
      if (to_int(key, s, s.value) < 0) bad(key, s, "expected a non-negative integer");
      break;
    case Type::kDouble:
      to_double(key, s, s.value);
      break;
    case Type::kBool:
      if (s.value != "true" && s.value != "false") bad(key, s, "expected true or false");
      break;
    case Type::kIntList:
      for (const auto& item : split_list(s.value)) to_int(key, s, item);
      break;
    case Type::kDoubleList:
      for (const auto& item : split_list(s.value)) to_double(key, s, item);
      break;
  }
}

std::vector<int> drops_of(const pinn::LrSchedule& s) {
  std::vector<int> out;
  for (std::size_t i = 1; i < s.steps.size(); ++i) out.push_back(s.steps[i].first);
  return out;
}

double default_wj(Family f) {
  switch (f) {
    case Family::kLaplace: return 100.0;
    case Family::kBurgers: return 1.0;
    case Family::kKs: return 1e-3;
  }
  return 1.0;
}

std::vector<double> default_grid(Family f) {
  switch (f) {
    case Family::kLaplace: return linesearch::log_grid(1e-3, 1e7, 11);
    case Family::kBurgers: return linesearch::log_grid(1e-3, 1e6, 10);
    case Family::kKs: return linesearch::log_grid(1e-8, 10.0, 10);
  }
  return {};
}

}  // namespace

const char* engine_name(Engine e) {
  switch (e) {
    case Engine::kForward: return "forward";
    case Engine::kControl: return "control";
    case Engine::kLinesearch: return "linesearch";
    case Engine::kDal: return "dal";
    case Engine::kEvaluate: return "evaluate";
    case Engine::kCheckGradients: return "check-gradients";
  }
  return "forward";
}

Engine parse_engine(const std::string& s) {
  for (Engine e : {Engine::kForward, Engine::kControl, Engine::kLinesearch, Engine::kDal, Engine::kEvaluate,
                   Engine::kCheckGradients}) {
    if (s == engine_name(e)) return e;
  }
  throw ConfigError("unknown engine '" + s + "'");
}

Settings parse_config_text(const std::string& text, const std::string& source) {
  Settings out;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string origin = source + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!find_key(key)) throw ConfigError(origin + ": unknown key '" + key + "'");
    if (out.count(key)) throw ConfigError(origin + ": key '" + key + "' set twice");
    out[key] = {trim(line.substr(eq + 1)), origin};
  }
  return out;
}

Settings parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

void add_flag(Settings& s, const std::string& assignment, const std::string& origin) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(origin + ": expected key=value, got '" + assignment + "'");
  const std::string key = trim(assignment.substr(0, eq));
  if (!find_key(key)) throw ConfigError(origin + ": unknown key '" + key + "'");
  s[key] = {trim(assignment.substr(eq + 1)), origin};
}

std::uint64_t split_seed(std::uint64_t root, std::uint64_t counter) {
  std::uint64_t z = root + counter * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

pinn::Seeds split_seeds(std::uint64_t root) {
  return {split_seed(root, kSeedInit), split_seed(root, kSeedSampling), split_seed(root, kSeedShuffle)};
}

Settings default_settings(const std::string& problem, Engine engine) {
  const problems::ProblemSpec p = problems::make_problem(problem);
  const pinn::TrainConfig t = pinn::default_config(p);
  const pinn::TrainConfig fwd = pinn::default_config(problems::make_problem(forward_name(problem)));
  const solvers::HifiConfig h;
  const adjoint::DalConfig d;
  const std::map<std::string, std::string> v{
      {"problem", problem},
      {"engine", engine_name(engine)},
      {"output", ""},
      {"seed", "1"},
      {"deterministic", "true"},
      {"workers", "1"},
      {"pinn.epochs", std::to_string(t.epochs)},
      {"pinn.n_residual", std::to_string(t.n_residual)},
      {"pinn.minibatches", std::to_string(t.minibatches)},
      {"pinn.lr", fmt(t.schedule.steps.front().second)},
      {"pinn.lr_drops", join(drops_of(t.schedule))},
      {"pinn.state_hidden", join(t.state_hidden)},
      {"pinn.control_hidden", join(t.control_hidden)},
      {"pinn.w_r", "1"},
      {"pinn.w_b", "1"},
      {"pinn.w_0", "1"},
      {"pinn.w_J", fmt(default_wj(p.family))},
      {"pinn.chunk", std::to_string(t.chunk)},
      {"pinn.checkpoint_every", "0"},
      {"pinn.log_every", "100"},
      {"linesearch.grid", join(default_grid(p.family))},
      {"step2.epochs", std::to_string(fwd.epochs)},
      {"step2.n_residual", std::to_string(fwd.n_residual)},
      {"step2.minibatches", std::to_string(fwd.minibatches)},
      {"step2.lr_drops", join(drops_of(fwd.schedule))},
      {"step2.state_hidden", join(fwd.state_hidden)},
      {"dal.beta", p.family == Family::kKs ? "0.001" : "1"},
      {"dal.max_iterations", std::to_string(d.max_iterations)},
      {"dal.plateau_tol", fmt(d.plateau_tol)},
      {"dal.plateau_window", std::to_string(d.plateau_window)},
      {"dal.grad_floor", fmt(d.grad_floor)},
      {"dal.sobolev", d.sobolev ? "true" : "false"},
      {"hifi.laplace_n", std::to_string(h.laplace_n)},
      {"hifi.burgers_N", std::to_string(h.burgers_N)},
      {"hifi.burgers_dt", fmt(h.burgers_dt)},
      {"hifi.ks_N", std::to_string(h.ks_N)},
      {"hifi.ks_dt", fmt(h.ks_dt)},
      {"evaluate.control", ""},
      {"check.directions", "10"},
      {"check.eps", fmt(p.family == Family::kKs ? 1e-3 : 1e-5)},
  };
  Settings out;
  const unsigned bit = engine_bit(engine);
  for (const Key& k : kKeys) {
    if (!(k.engines & bit)) continue;
    if (std::string(k.name) == "pinn.control_hidden" && !p.is_control) continue;
    out[k.name] = {v.at(k.name), "defaults"};
  }
  return out;
}

RunConfig resolve(const Settings& file, const Settings& flags) {
  auto pick = [&](const char* key) -> const Setting* {
    if (auto it = flags.find(key); it != flags.end()) return &it->second;
    if (auto it = file.find(key); it != file.end()) return &it->second;
    return nullptr;
  };
  const Setting* ps = pick("problem");
  if (!ps || ps->value.empty()) throw ConfigError("missing required key 'problem'");
  const Setting* es = pick("engine");
  if (!es) throw ConfigError("missing required key 'engine'");
  Engine engine = Engine::kForward;
  try {
    engine = parse_engine(es->value);
  } catch (const ConfigError&) {
    bad("engine", *es, "unknown engine");
  }
  problems::ProblemSpec p;
  try {
    p = problems::make_problem(ps->value);
  } catch (const std::invalid_argument&) {
    bad("problem", *ps, "unknown problem");
  }
  if (engine != Engine::kForward && !p.is_control) {
    bad("engine", *es, std::string("engine ") + engine_name(engine) + " needs a control problem");
  }
  if (engine == Engine::kForward && p.is_control) bad("engine", *es, "engine forward needs a forward problem");

  Settings merged = default_settings(ps->value, engine);
  for (const Settings* layer : {&file, &flags}) {
    for (const auto& [key, s] : *layer) {
      if (!merged.count(key)) {
        throw ConfigError(s.origin + ": key '" + key + "' does not apply to engine " + engine_name(engine) +
                          " on problem " + ps->value);
      }
      merged[key] = s;
    }
  }
  for (const auto& [key, s] : merged) check_type(key, s, find_key(key)->type);

  RunConfig rc;
  rc.problem = ps->value;
  rc.engine = engine;
  rc.resolved = merged;
  auto has = [&](const char* k) { return merged.count(k) > 0; };
  auto str = [&](const char* k) { return merged.at(k).value; };
  auto num = [&](const char* k) { return to_double(k, merged.at(k), merged.at(k).value); };
  auto integer = [&](const char* k) { return static_cast<int>(to_int(k, merged.at(k), merged.at(k).value)); };
  auto ints = [&](const char* k) {
    std::vector<int> out;
    for (const auto& item : split_list(merged.at(k).value))
      out.push_back(static_cast<int>(to_int(k, merged.at(k), item)));
    return out;
  };
  auto positive = [&](const char* k, double x) {
    if (!(x > 0)) bad(k, merged.at(k), "must be positive");
  };

  rc.output = str("output");
  rc.seed = static_cast<std::uint64_t>(to_int("seed", merged.at("seed"), merged.at("seed").value));
  rc.deterministic = str("deterministic") == "true";
  rc.workers = integer("workers");
  if (rc.workers < 1) bad("workers", merged.at("workers"), "must be >= 1");

  const pinn::Seeds seeds = split_seeds(rc.seed);
  if (has("pinn.epochs")) {
    pinn::TrainConfig& t = rc.train;
    t = pinn::default_config(p);
    t.epochs = integer("pinn.epochs");
    t.n_residual = integer("pinn.n_residual");
    t.minibatches = integer("pinn.minibatches");
    t.schedule = pinn::LrSchedule::drops(ints("pinn.lr_drops"), num("pinn.lr"));
    t.state_hidden = ints("pinn.state_hidden");
    if (has("pinn.control_hidden")) t.control_hidden = ints("pinn.control_hidden");
    t.weights.w_r = num("pinn.w_r");
    t.weights.w_b = num("pinn.w_b");
    t.weights.w_0 = num("pinn.w_0");
    t.chunk = integer("pinn.chunk");
    t.checkpoint_every = integer("pinn.checkpoint_every");
    t.log_every = integer("pinn.log_every");
    t.seeds = seeds;
    try {
      t.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("pinn settings: ") + e.what());
    }
  }
  if (has("pinn.w_J")) {
    rc.w_J = num("pinn.w_J");
    positive("pinn.w_J", rc.w_J);
  }
  if (has("linesearch.grid")) {
    const Setting& g = merged.at("linesearch.grid");
    for (const auto& item : split_list(g.value)) rc.grid.push_back(to_double("linesearch.grid", g, item));
    if (rc.grid.empty()) bad("linesearch.grid", g, "grid is empty");
    for (std::size_t i = 0; i < rc.grid.size(); ++i) {
      if (!(rc.grid[i] > 0) || (i && rc.grid[i] <= rc.grid[i - 1]))
        bad("linesearch.grid", g, "grid must be positive and strictly increasing");
    }
    pinn::TrainConfig& s = rc.step2;
    s = pinn::default_config(problems::make_problem(forward_name(rc.problem)));
    s.epochs = integer("step2.epochs");
    s.n_residual = integer("step2.n_residual");
    s.minibatches = integer("step2.minibatches");
    s.schedule = pinn::LrSchedule::drops(ints("step2.lr_drops"), num("pinn.lr"));
    s.state_hidden = ints("step2.state_hidden");
    s.chunk = rc.train.chunk;
    s.seeds = seeds;
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("step2 settings: ") + e.what());
    }
  }
  if (has("dal.beta")) {
    rc.dal.beta = num("dal.beta");
    positive("dal.beta", rc.dal.beta);
    rc.dal.max_iterations = integer("dal.max_iterations");
    rc.dal.plateau_tol = num("dal.plateau_tol");
    rc.dal.plateau_window = integer("dal.plateau_window");
    rc.dal.grad_floor = num("dal.grad_floor");
    rc.dal.sobolev = str("dal.sobolev") == "true";
    if (rc.dal.max_iterations < 0) bad("dal.max_iterations", merged.at("dal.max_iterations"), "must be >= 0");
  }
  if (has("hifi.laplace_n")) {
    rc.hifi.laplace_n = integer("hifi.laplace_n");
    rc.hifi.burgers_N = integer("hifi.burgers_N");
    rc.hifi.burgers_dt = num("hifi.burgers_dt");
    rc.hifi.ks_N = integer("hifi.ks_N");
    rc.hifi.ks_dt = num("hifi.ks_dt");
    positive("hifi.burgers_dt", rc.hifi.burgers_dt);
    positive("hifi.ks_dt", rc.hifi.ks_dt);
  }
  if (has("evaluate.control")) {
    rc.control_path = str("evaluate.control");
    if (rc.control_path.empty()) throw ConfigError("missing required key 'evaluate.control'");
  }
  if (has("check.directions")) {
    rc.check_directions = integer("check.directions");
    rc.check_eps = num("check.eps");
    if (rc.check_directions < 1) bad("check.directions", merged.at("check.directions"), "must be >= 1");
    positive("check.eps", rc.check_eps);
  }
  return rc;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [key, s] : resolved) out += key + " = " + s.value + "\n";
  return out;
}

}  // namespace pinnctl::cli
