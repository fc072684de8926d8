#include "pinnctl/network/mlp.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace pinnctl::net {
namespace {

constexpr int kCheckpointVersion = 1;

Eigen::MatrixXd normalize(const MlpParams& p, const Eigen::MatrixXd& points) {
  if (points.rows() != p.input_dim()) {
    throw std::invalid_argument("input dimension " + std::to_string(points.rows()) + " does not match network input " +
                                std::to_string(p.input_dim()));
  }
  return ((points.colwise() - p.norm.mean).array().colwise() / p.norm.stddev.array()).matrix();
}

}  // namespace

std::vector<int> MlpParams::sizes() const {
  std::vector<int> s;
  if (layers.empty()) return s;
  s.push_back(input_dim());
  for (const auto& l : layers) s.push_back(static_cast<int>(l.W.rows()));
  return s;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.W.size() + l.b.size());
  return n;
}

Eigen::VectorXd MlpParams::flat() const {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index o = 0;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
      theta.segment(o, l.W.cols()) = l.W.row(r).transpose();
      o += l.W.cols();
    }
    theta.segment(o, l.b.size()) = l.b;
    o += l.b.size();
  }
  return theta;
}

void MlpParams::set_flat(const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != parameter_count()) {
    throw std::invalid_argument("flat parameter vector has wrong length");
  }
  Eigen::Index o = 0;
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
      l.W.row(r) = theta.segment(o, l.W.cols()).transpose();
      o += l.W.cols();
    }
    l.b = theta.segment(o, l.b.size());
    o += l.b.size();
  }
}

void MlpParams::validate() const {
  if (layers.empty()) throw std::invalid_argument("network has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].b.size() != layers[k].W.rows()) throw std::invalid_argument("bias size does not match layer");
    if (k > 0 && layers[k].W.cols() != layers[k - 1].W.rows()) {
      throw std::invalid_argument("layer " + std::to_string(k) + " does not chain with the previous layer");
    }
  }
  if (norm.mean.size() != input_dim() || norm.stddev.size() != input_dim()) {
    throw std::invalid_argument("normalization size does not match input dimension");
  }
  if ((norm.stddev.array() <= 0.0).any()) throw std::invalid_argument("normalization stddev must be positive");
}

MlpParams init_glorot(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("need at least input and output sizes");
  for (int s : layer_sizes) {
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  }
  MlpParams p;
  p.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t k = 1; k < layer_sizes.size(); ++k) {
    const int fan_in = layer_sizes[k - 1];
    const int fan_out = layer_sizes[k];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer l{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) l.W(r, c) = dist(rng);
    }
    p.layers.push_back(std::move(l));
  }
  p.norm.mean = Eigen::VectorXd::Zero(layer_sizes.front());
  p.norm.stddev = Eigen::VectorXd::Ones(layer_sizes.front());
  return p;
}

Eigen::VectorXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& points) {
  Eigen::MatrixXd z = normalize(params, points);
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    Eigen::MatrixXd a = params.layers[k].W * z;
    a.colwise() += params.layers[k].b;
    if (k + 1 < params.layers.size()) {
      z = a.array().tanh().matrix();
    } else {
      z = std::move(a);
    }
  }
  return z.row(0).transpose();
}

double forward(const MlpParams& params, const Eigen::VectorXd& input) {
  return forward_batch(params, Eigen::MatrixXd(input))(0);
}

MlpParams set_normalization(MlpParams params, const Eigen::MatrixXd& residual_points) {
  if (residual_points.rows() != params.input_dim()) {
    throw std::invalid_argument("residual points have wrong dimension for normalization");
  }
  if (residual_points.cols() < 2) throw std::invalid_argument("normalization needs at least two points");
  const Eigen::VectorXd mean = residual_points.rowwise().mean();
  const Eigen::VectorXd var =
      (residual_points.colwise() - mean).array().square().rowwise().mean().matrix();
  for (Eigen::Index r = 0; r < var.size(); ++r) {
    if (!(var(r) > 0.0)) {
      throw std::invalid_argument("coordinate " + std::to_string(r) + " of the residual set has zero variance");
    }
  }
  params.norm.mean = mean;
  params.norm.stddev = var.array().sqrt().matrix();
  return params;
}

nlohmann::json to_json(const MlpParams& params) {
  nlohmann::json j;
  j["format"] = "pinnctl-mlp";
  j["version"] = kCheckpointVersion;
  j["sizes"] = params.sizes();
  j["seed"] = params.seed;
  j["activation"] = "tanh";
  std::vector<double> mean(params.norm.mean.data(), params.norm.mean.data() + params.norm.mean.size());
  std::vector<double> sd(params.norm.stddev.data(), params.norm.stddev.data() + params.norm.stddev.size());
  j["norm_mean"] = mean;
  j["norm_std"] = sd;
  const Eigen::VectorXd theta = params.flat();
  j["theta"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  return j;
}

MlpParams from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "pinnctl-mlp") throw std::invalid_argument("not a pinnctl network checkpoint");
  if (j.at("version").get<int>() != kCheckpointVersion) throw std::invalid_argument("unsupported checkpoint version");
  const auto sizes = j.at("sizes").get<std::vector<int>>();
  MlpParams p = init_glorot(sizes, j.at("seed").get<std::uint64_t>());
  const auto mean = j.at("norm_mean").get<std::vector<double>>();
  const auto sd = j.at("norm_std").get<std::vector<double>>();
  p.norm.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  p.norm.stddev = Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  const auto theta = j.at("theta").get<std::vector<double>>();
  p.set_flat(Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size())));
  p.validate();
  return p;
}

void save_checkpoint(const MlpParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  // nlohmann prints doubles in shortest round-trip form.
  out << to_json(params).dump(1) << '\n';
}

MlpParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  return from_json(nlohmann::json::parse(in));
}

ad::NodeId mlp_on_tape(ad::Tape& tape, const MlpParams& params, std::size_t offset, const Eigen::MatrixXd& points,
                       ad::JetLayout layout) {
  const Eigen::MatrixXd z0 = normalize(params, points);
  const Eigen::Index n = points.cols();
  ad::JetBatch in(points.rows(), n, layout);
  in.block(0) = z0;
  for (int r = 0; r < static_cast<int>(points.rows()) && r < 2; ++r) {
    if (layout.orders[r] >= 1) in.block(layout.index(r, 1)).row(r).setOnes();
  }
  ad::NodeId z = tape.constant(std::move(in));
  std::size_t o = offset;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const auto& l = params.layers[k];
    const ad::NodeId w = tape.parameter(l.W, o);
    o += static_cast<std::size_t>(l.W.size());
    const ad::NodeId b = tape.parameter(l.b, o);
    o += static_cast<std::size_t>(l.b.size());
    z = tape.affine(w, b, z);
    if (k + 1 < params.layers.size()) z = tape.tanh(z);
  }
  return z;
}

}  // namespace pinnctl::net
