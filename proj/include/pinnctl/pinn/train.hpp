#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pinnctl/network/mlp.hpp"
#include "pinnctl/pinn/adam.hpp"
#include "pinnctl/pinn/loss.hpp"
#include "pinnctl/problems/problems.hpp"
#include "pinnctl/sampling/sampling.hpp"

namespace pinnctl::pinn {

/// Piecewise-constant learning rate: alpha_k applies from epoch threshold_k on.
struct LrSchedule {
  std::vector<std::pair<int, double>> steps{{0, 1e-3}};

  double at(int epoch) const;
  void validate() const;
  /// 1e-3 divided by 10 at each listed epoch.
  static LrSchedule drops(std::vector<int> epochs, double initial = 1e-3);
};

struct Seeds {
  std::uint64_t init = 1;
  std::uint64_t sampling = 2;
  std::uint64_t shuffle = 3;
};

struct TrainConfig {
  int epochs = 1000;
  LrSchedule schedule;
  int minibatches = 10;
  int n_residual = 10000;
  Seeds seeds;
  AdamConfig adam;
  std::vector<int> state_hidden{50, 50, 50, 50};
  std::vector<int> control_hidden{30, 30, 30};
  LossWeights weights;
  int chunk = 250;
  int checkpoint_every = 0;  // 0 disables
  std::string checkpoint_dir;
  int log_every = 0;  // progress lines on stderr; 0 disables

  void validate() const;
};

/// Default hyperparameters per problem.
TrainConfig default_config(const problems::ProblemSpec& p);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  LossComponents loss;  // mean over the epoch's minibatch steps
  double wall = 0.0;    // seconds since training started
};

struct TrainHistory {
  LossWeights weights;
  std::vector<EpochRecord> epochs;
  double wall = 0.0;

  void write_csv(const std::string& path) const;
};

struct TrainResult {
  net::MlpParams state;
  net::MlpParams control;  // empty for forward problems
  TrainHistory history;
  LossComponents final_loss;
};

/// Network layer sizes for a problem: 2 -> hidden -> 1.
std::vector<int> layer_sizes(int input_dim, const std::vector<int>& hidden);

/// Initial networks with input normalization from the residual points.
net::MlpParams init_state(const problems::ProblemSpec& p, const TrainConfig& cfg, const Eigen::MatrixXd& residual);
net::MlpParams init_control(const problems::ProblemSpec& p, const TrainConfig& cfg, const Eigen::MatrixXd& residual);

/// Residual points of a run (LHS over the problem box).
Eigen::MatrixXd residual_points(const problems::ProblemSpec& p, const TrainConfig& cfg);

using EpochCallback = std::function<void(const EpochRecord&, const net::MlpParams& state, const net::MlpParams* control)>;

/// Forward training; the problem must carry fixed data.
TrainResult train_forward(const problems::ProblemSpec& p, const TrainConfig& cfg, const EpochCallback& cb = {});

/// Concurrent state/control training under the augmented loss at weight w_J.
TrainResult train_control(const problems::ProblemSpec& p, const TrainConfig& cfg, double w_J,
                          const EpochCallback& cb = {});

}  // namespace pinnctl::pinn
