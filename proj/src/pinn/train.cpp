#include "pinnctl/pinn/train.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace pinnctl::pinn {

using problems::Family;
using problems::ProblemSpec;

double LrSchedule::at(int epoch) const {
  double lr = steps.front().second;
  for (const auto& [e, a] : steps) {
    if (epoch >= e) lr = a;
  }
  return lr;
}

void LrSchedule::validate() const {
  if (steps.empty()) throw std::invalid_argument("learning-rate schedule is empty");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i].second > 0.0)) throw std::invalid_argument("learning rates must be positive");
    if (i > 0 && steps[i].first <= steps[i - 1].first) {
      throw std::invalid_argument("learning-rate thresholds must increase strictly");
    }
  }
}

LrSchedule LrSchedule::drops(std::vector<int> epochs, double initial) {
  LrSchedule s;
  s.steps = {{0, initial}};
  double a = initial;
  for (int e : epochs) {
    a /= 10.0;
    s.steps.emplace_back(e, a);
  }
  return s;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  schedule.validate();
  if (minibatches < 1 || n_residual < minibatches || n_residual % minibatches != 0) {
    throw std::invalid_argument("N_r = " + std::to_string(n_residual) + " cannot be split into " +
                                std::to_string(minibatches) + " minibatches");
  }
  if (state_hidden.empty()) throw std::invalid_argument("state network needs a hidden layer");
  if (weights.w_r < 0 || weights.w_b < 0 || weights.w_0 < 0 || weights.w_J < 0) {
    throw std::invalid_argument("loss weights must be nonnegative");
  }
  if (chunk < 1) throw std::invalid_argument("chunk must be positive");
}

TrainConfig default_config(const ProblemSpec& p) {
  TrainConfig c;
  switch (p.family) {
    case Family::kLaplace:
      c.n_residual = 10000;
      c.minibatches = 10;
      if (p.is_control) {
        c.epochs = 10000;
        c.schedule = LrSchedule::drops({5000});
      } else {
        c.epochs = 6000;
        c.schedule = LrSchedule::drops({3000});
      }
      c.state_hidden = {50, 50, 50, 50};
      c.control_hidden = {30, 30, 30};
      break;
    case Family::kBurgers:
      c.n_residual = 20000;
      c.minibatches = 10;
      c.state_hidden = {50, 50, 50, 50};
      c.control_hidden = {30, 30, 30};
      if (p.is_control) {
        c.epochs = 30000;
        c.schedule = LrSchedule::drops({20000, 25000});
      } else {
        c.epochs = 10000;
        c.schedule = LrSchedule::drops({5000});
      }
      break;
    case Family::kKs:
      c.n_residual = 80000;
      c.minibatches = 20;
      c.epochs = 30000;
      c.schedule = LrSchedule::drops({10000, 20000});
      c.state_hidden = {50, 50, 50, 50, 50};
      c.control_hidden = {50, 50, 50, 50, 50};
      break;
  }
  return c;
}

void TrainHistory::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "# w_r=" << weights.w_r << " w_b=" << weights.w_b << " w_0=" << weights.w_0 << " w_J=" << weights.w_J << '\n';
  out << "epoch,lr,L_r,L_b,L_0,L_J,total,wall\n";
  for (const auto& e : epochs) {
    out << e.epoch << ',' << e.lr << ',' << e.loss.residual << ',' << e.loss.boundary << ',' << e.loss.initial << ','
        << e.loss.cost << ',' << e.loss.total << ',' << e.wall << '\n';
  }
}

std::vector<int> layer_sizes(int input_dim, const std::vector<int>& hidden) {
  std::vector<int> s{input_dim};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(1);
  return s;
}

Eigen::MatrixXd residual_points(const ProblemSpec& p, const TrainConfig& cfg) {
  sampling::SamplingPlan plan;
  plan.n_residual = cfg.n_residual;
  plan.minibatches = cfg.minibatches;
  plan.box = sampling::make_box(0.0, p.L, 0.0, p.T);
  plan.seed = cfg.seeds.sampling;
  return plan.residual_points();
}

net::MlpParams init_state(const ProblemSpec& p, const TrainConfig& cfg, const Eigen::MatrixXd& residual) {
  (void)p;
  return net::set_normalization(net::init_glorot(layer_sizes(2, cfg.state_hidden), cfg.seeds.init), residual);
}

net::MlpParams init_control(const ProblemSpec& p, const TrainConfig& cfg, const Eigen::MatrixXd& residual) {
  const int dim = p.control_input_dim();
  // Distinct stream from the state network.
  const std::uint64_t seed = cfg.seeds.init * 0x9E3779B97F4A7C15ULL + 1;
  net::MlpParams c = net::init_glorot(layer_sizes(dim, cfg.control_hidden), seed);
  return net::set_normalization(std::move(c), residual.topRows(dim));
}

namespace {

TrainResult run(const ProblemSpec& p, const TrainConfig& cfg, bool control, const EpochCallback& cb) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::MatrixXd residual = residual_points(p, cfg);
  TrainResult res;
  res.state = init_state(p, cfg, residual);
  if (control) res.control = init_control(p, cfg, residual);
  const std::size_t pu = res.state.parameter_count();
  const std::size_t pc = control ? res.control.parameter_count() : 0;

  LossContext ctx(p, cfg.weights, cfg.chunk);
  Eigen::VectorXd theta(static_cast<Eigen::Index>(pu + pc));
  theta.head(static_cast<Eigen::Index>(pu)) = res.state.flat();
  if (control) theta.tail(static_cast<Eigen::Index>(pc)) = res.control.flat();
  AdamState adam(theta.size());
  res.history.weights = cfg.weights;
  Eigen::VectorXd grad;

  auto unpack = [&]() {
    res.state.set_flat(theta.head(static_cast<Eigen::Index>(pu)));
    if (control) res.control.set_flat(theta.tail(static_cast<Eigen::Index>(pc)));
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.schedule.at(epoch);
    const std::uint64_t eseed = cfg.seeds.shuffle * 1000003ULL + static_cast<std::uint64_t>(epoch);
    const auto batches = sampling::epoch_minibatches(residual, cfg.minibatches, eseed);
    LossComponents acc;
    for (const auto& batch : batches) {
      const LossComponents l = ctx.evaluate(res.state, control ? &res.control : nullptr, batch, &grad);
      acc.residual += l.residual;
      acc.boundary += l.boundary;
      acc.initial += l.initial;
      acc.cost += l.cost;
      adam_step(theta, grad, adam, lr, cfg.adam);
      unpack();
    }
    const double m = static_cast<double>(batches.size());
    acc.residual /= m;
    acc.boundary /= m;
    acc.initial /= m;
    acc.cost /= m;
    acc.total = acc.fbi(cfg.weights) + (control ? cfg.weights.w_J * acc.cost : 0.0);
    EpochRecord rec{epoch, lr, acc, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
    res.history.epochs.push_back(rec);
    if (cfg.log_every > 0 && (epoch % cfg.log_every == 0 || epoch + 1 == cfg.epochs)) {
      std::fprintf(stderr, "[%s] epoch %d lr %.1e L_r %.3e L_b %.3e L_0 %.3e L_J %.3e total %.3e (%.0fs)\n",
                   p.name.c_str(), epoch, lr, acc.residual, acc.boundary, acc.initial, acc.cost, acc.total, rec.wall);
    }
    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_dir.empty() && (epoch + 1) % cfg.checkpoint_every == 0) {
      std::filesystem::create_directories(cfg.checkpoint_dir);
      net::save_checkpoint(res.state, cfg.checkpoint_dir + "/state_epoch" + std::to_string(epoch + 1) + ".json");
      if (control) {
        net::save_checkpoint(res.control, cfg.checkpoint_dir + "/control_epoch" + std::to_string(epoch + 1) + ".json");
      }
    }
    if (cb) cb(rec, res.state, control ? &res.control : nullptr);
  }
  res.final_loss = res.history.epochs.empty() ? LossComponents{} : res.history.epochs.back().loss;
  res.history.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace

TrainResult train_forward(const ProblemSpec& p, const TrainConfig& cfg, const EpochCallback& cb) {
  if (p.is_control) throw std::invalid_argument(p.name + " is a control problem; use train_control");
  return run(p, cfg, false, cb);
}

TrainResult train_control(const ProblemSpec& p, const TrainConfig& cfg, double w_J, const EpochCallback& cb) {
  if (!p.is_control) throw std::invalid_argument(p.name + " is not a control problem");
  TrainConfig c = cfg;
  c.weights.w_J = w_J;
  return run(p, c, true, cb);
}

}  // namespace pinnctl::pinn
