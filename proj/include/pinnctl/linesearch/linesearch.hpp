#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "pinnctl/pinn/train.hpp"
#include "pinnctl/problems/control_field.hpp"
#include "pinnctl/solvers/hifi.hpp"

namespace pinnctl::linesearch {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Candidate {
  double w_J = 0.0;
  pinn::Seeds seeds;
  bool trained = false;
  std::string error;
  double L_fbi = kNaN;  // step 1, weighted PDE part
  double L_J = kNaN;    // step 1, unweighted cost term
  std::string checkpoint;
  net::MlpParams state;
  net::MlpParams control;

  bool evaluated = false;
  double J_pinn = kNaN;       // step 2: cost from a fresh forward PINN
  double forward_fbi = kNaN;  // step 2: converged forward loss
  bool infeasible = false;    // L_fbi > 10 x forward_fbi
  double J_hifi = kNaN;
};

struct LineSearchResult {
  std::vector<Candidate> candidates;
  int selected = -1;

  void write_csv(const std::string& path) const;
};

/// n log-spaced values in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

/// Seeds for candidate k, derived from the root seeds by a fixed counter.
pinn::Seeds candidate_seeds(const pinn::Seeds& root, int k);

using Progress = std::function<void(const std::string&)>;

/// Step 1: one control training per w_J with fresh seeds. Failed runs are
/// recorded; throws only if every run fails. Runs are independent, so up to
/// workers of them train on separate threads.
std::vector<Candidate> step1_sweep(const problems::ProblemSpec& p, const pinn::TrainConfig& cfg,
                                   const std::vector<double>& grid, const std::string& checkpoint_dir = "",
                                   const Progress& progress = {}, int workers = 1);

/// Step 2: fresh forward PINN per candidate with the control frozen, then the
/// PINN estimate of J; selects the argmin.
LineSearchResult step2_evaluate(const problems::ProblemSpec& p, std::vector<Candidate> candidates,
                                const pinn::TrainConfig& forward_cfg, const Progress& progress = {});

/// Index of the smallest J_pinn among evaluated candidates; ties go to the
/// smaller w_J. -1 when nothing is valid.
int select_index(const std::vector<Candidate>& candidates);

/// Samples a control network on the classical solver grid.
problems::ControlField control_to_field(const problems::ProblemSpec& p, const net::MlpParams& control,
                                        const solvers::HifiConfig& h = solvers::HifiConfig{});

/// Fills J_hifi for every trained candidate.
void cross_validate(const problems::ProblemSpec& p, LineSearchResult& result,
                    const solvers::HifiConfig& h = solvers::HifiConfig{});

}  // namespace pinnctl::linesearch
