#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinnctl/adjoint/adjoint.hpp"
#include "pinnctl/pinn/train.hpp"
#include "pinnctl/solvers/hifi.hpp"

namespace pinnctl::cli {

/// Bad configuration; the message names the key and where it came from.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Engine { kForward, kControl, kLinesearch, kDal, kEvaluate, kCheckGradients };

const char* engine_name(Engine e);
Engine parse_engine(const std::string& s);

struct Setting {
  std::string value;
  std::string origin;  // "defaults", "run.cfg:12", "--wj"
};
using Settings = std::map<std::string, Setting>;

/// Flat "dotted.key = value" lines; '#' starts a comment.
Settings parse_config_text(const std::string& text, const std::string& source);
Settings parse_config_file(const std::string& path);

/// Adds "key=value" from the command line.
void add_flag(Settings& s, const std::string& assignment, const std::string& origin);

/// Counter-based seed splitting: subsystem k of root r gets splitmix64(r + k * golden).
std::uint64_t split_seed(std::uint64_t root, std::uint64_t counter);
enum SeedCounter : std::uint64_t { kSeedInit = 1, kSeedSampling = 2, kSeedShuffle = 3, kSeedDirections = 4 };
pinn::Seeds split_seeds(std::uint64_t root);

struct RunConfig {
  std::string problem;
  Engine engine = Engine::kForward;
  std::string output;
  std::uint64_t seed = 1;
  bool deterministic = true;
  int workers = 1;

  pinn::TrainConfig train;  // forward / control / linesearch step 1
  pinn::TrainConfig step2;  // linesearch step 2
  double w_J = 1.0;
  std::vector<double> grid;
  adjoint::DalConfig dal;
  solvers::HifiConfig hifi;
  std::string control_path;
  int check_directions = 10;
  double check_eps = 1e-5;

  Settings resolved;  // every key with its final value and origin

  /// Canonical "key = value" text; parses back to the same RunConfig.
  std::string to_text() const;
};

/// Built-in defaults for one problem and engine as settings.
Settings default_settings(const std::string& problem, Engine engine);

/// Layered resolution: defaults <- file <- flags. problem and engine may come
/// from either layer.
RunConfig resolve(const Settings& file, const Settings& flags);

}  // namespace pinnctl::cli
