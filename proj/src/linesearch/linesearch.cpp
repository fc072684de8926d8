#include "pinnctl/linesearch/linesearch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace pinnctl::linesearch {

using problems::Family;

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("log grid needs 0 < lo < hi and n >= 2");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
  return g;
}

pinn::Seeds candidate_seeds(const pinn::Seeds& root, int k) {
  const std::uint64_t s = static_cast<std::uint64_t>(k + 1) * 7919ULL;
  return {root.init + s, root.sampling + s, root.shuffle + s};
}

namespace {

Candidate train_candidate(const problems::ProblemSpec& p, const pinn::TrainConfig& cfg, double w, int k,
                          const std::string& checkpoint_dir) {
  Candidate c;
  c.w_J = w;
  c.seeds = candidate_seeds(cfg.seeds, k);
  pinn::TrainConfig run = cfg;
  run.seeds = c.seeds;
  run.log_every = 0;
  try {
    const pinn::TrainResult r = pinn::train_control(p, run, c.w_J);
    c.state = r.state;
    c.control = r.control;
    c.L_fbi = r.final_loss.fbi(run.weights);
    c.L_J = r.final_loss.cost;
    c.trained = true;
    if (!checkpoint_dir.empty()) {
      const std::string base = checkpoint_dir + "/candidate" + std::to_string(k);
      net::save_checkpoint(c.state, base + "_state.json");
      net::save_checkpoint(c.control, base + "_control.json");
      c.checkpoint = base;
    }
  } catch (const std::exception& e) {
    c.trained = false;
    c.error = e.what();
  }
  return c;
}

}  // namespace

std::vector<Candidate> step1_sweep(const problems::ProblemSpec& p, const pinn::TrainConfig& cfg,
                                   const std::vector<double>& grid, const std::string& checkpoint_dir,
                                   const Progress& progress, int workers) {
  if (grid.empty()) throw std::invalid_argument("w_J grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || (i > 0 && grid[i] <= grid[i - 1])) {
      throw std::invalid_argument("w_J grid must be positive and strictly increasing");
    }
  }
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (!checkpoint_dir.empty()) std::filesystem::create_directories(checkpoint_dir);

  std::vector<Candidate> out(grid.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  auto work = [&] {
    for (std::size_t k; (k = next++) < grid.size();) {
      out[k] = train_candidate(p, cfg, grid[k], static_cast<int>(k), checkpoint_dir);
      if (progress) {
        const Candidate& c = out[k];
        std::ostringstream m;
        m << "step1 w_J=" << c.w_J << (c.trained ? "" : " FAILED: " + c.error) << " L_FBI=" << c.L_fbi
          << " L_J=" << c.L_J;
        std::lock_guard<std::mutex> lock(mu);
        progress(m.str());
      }
    }
  };
  const int n = std::min<int>(workers, static_cast<int>(grid.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  if (std::none_of(out.begin(), out.end(), [](const Candidate& c) { return c.trained; })) {
    throw std::runtime_error("every step-1 training failed");
  }
  return out;
}

int select_index(const std::vector<Candidate>& cs) {
  int best = -1;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const Candidate& c = cs[i];
    if (!c.evaluated || !std::isfinite(c.J_pinn)) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const Candidate& b = cs[static_cast<std::size_t>(best)];
    if (c.J_pinn < b.J_pinn || (c.J_pinn == b.J_pinn && c.w_J < b.w_J)) best = static_cast<int>(i);
  }
  return best;
}

LineSearchResult step2_evaluate(const problems::ProblemSpec& p, std::vector<Candidate> candidates,
                                const pinn::TrainConfig& forward_cfg, const Progress& progress) {
  LineSearchResult res;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    Candidate& c = candidates[k];
    if (!c.trained) continue;
    try {
      const net::MlpParams ctl = c.control;
      const pinn::ControlFn fn = [ctl](double x, double t) { return pinn::control_value(ctl, x, t); };
      const problems::ProblemSpec fwd = pinn::with_fixed_control(p, fn);
      pinn::TrainConfig run = forward_cfg;
      run.seeds = candidate_seeds(forward_cfg.seeds, static_cast<int>(k) + 1000);
      run.weights.w_J = 0.0;
      const pinn::TrainResult r = pinn::train_forward(fwd, run);
      c.forward_fbi = r.final_loss.fbi(run.weights);
      c.J_pinn = pinn::pinn_cost(p, r.state, fn);
      c.infeasible = c.L_fbi > 10.0 * c.forward_fbi;
      c.evaluated = std::isfinite(c.J_pinn);
    } catch (const std::exception& e) {
      c.error = e.what();
      c.evaluated = false;
    }
    if (progress) {
      std::ostringstream m;
      m << "step2 w_J=" << c.w_J << " J_pinn=" << c.J_pinn << (c.infeasible ? " (infeasible)" : "");
      progress(m.str());
    }
  }
  res.candidates = std::move(candidates);
  res.selected = select_index(res.candidates);
  return res;
}

problems::ControlField control_to_field(const problems::ProblemSpec& p, const net::MlpParams& control,
                                        const solvers::HifiConfig& h) {
  auto f1 = [&control](double x) { return pinn::control_value(control, x, 0.0); };
  switch (p.family) {
    case Family::kLaplace:
      return problems::ControlField::sample(problems::ControlKind::kBoundary, 0.0, 1.0, h.laplace_n, f1);
    case Family::kBurgers:
      return problems::ControlField::sample(problems::ControlKind::kInitial, 0.0, p.L, h.burgers_N, f1);
    case Family::kKs: {
      const int nt = static_cast<int>(std::lround(p.T / 0.01)) + 1;
      Eigen::MatrixXd pts(2, static_cast<Eigen::Index>(h.ks_N) * nt);
      for (int j = 0; j < nt; ++j)
        for (int i = 0; i < h.ks_N; ++i)
          pts.col(static_cast<Eigen::Index>(j) * h.ks_N + i) << i * p.L / h.ks_N, j * p.T / (nt - 1);
      Eigen::VectorXd v = net::forward_batch(control, pts);
      return problems::ControlField(problems::ControlKind::kForcing, 0.0, p.L, h.ks_N, 0.0, p.T, nt, std::move(v));
    }
  }
  throw std::invalid_argument("unknown problem family");
}

void cross_validate(const problems::ProblemSpec& p, LineSearchResult& result, const solvers::HifiConfig& h) {
  for (Candidate& c : result.candidates) {
    if (!c.trained) continue;
    c.J_hifi = solvers::evaluate_cost_hifi(p, control_to_field(p, c.control, h), h);
  }
}

void LineSearchResult::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(10);
  out << "w_J,L_FBI,L_J,J_pinn_eval,J_hifi,selected,feasible\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Candidate& c = candidates[i];
    out << c.w_J << ',' << c.L_fbi << ',' << c.L_J << ',' << c.J_pinn << ',' << c.J_hifi << ','
        << (static_cast<int>(i) == selected ? 1 : 0) << ',' << (c.infeasible ? 0 : 1) << '\n';
  }
}

}  // namespace pinnctl::linesearch
