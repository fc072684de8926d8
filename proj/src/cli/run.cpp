#include "pinnctl/cli/run.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fftw3.h>

#include "pinnctl/adjoint/adjoint.hpp"
#include "pinnctl/linesearch/linesearch.hpp"
#include "pinnctl/pinn/loss.hpp"
#include "pinnctl/sampling/sampling.hpp"

#ifndef PINNCTL_VERSION
#define PINNCTL_VERSION "dev"
#endif

namespace pinnctl::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using problems::Family;

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

json loss_json(const pinn::LossComponents& l) {
  return {{"L_r", l.residual}, {"L_b", l.boundary}, {"L_0", l.initial}, {"L_J", l.cost}, {"total", l.total}};
}

json manifest(const RunConfig& rc) {
  json cfg = json::object();
  for (const auto& [key, s] : rc.resolved) cfg[key] = {{"value", s.value}, {"origin", s.origin}};
  const pinn::Seeds s = split_seeds(rc.seed);
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  return {{"problem", rc.problem},
          {"engine", engine_name(rc.engine)},
          {"config", cfg},
          {"seeds", {{"root", rc.seed}, {"init", s.init}, {"sampling", s.sampling}, {"shuffle", s.shuffle}}},
          {"deterministic", rc.deterministic},
          {"workers", rc.workers},
          {"versions",
           {{"pinnctl", PINNCTL_VERSION}, {"eigen", eigen.str()}, {"fftw", std::string(fftw_version)}, {"compiler", __VERSION__}}}};
}

// Spectral or closed-form state on an n x n grid over the problem box.
Eigen::MatrixXd box_grid(const problems::ProblemSpec& p, int n) {
  const Eigen::VectorXd xs = sampling::linspace(0.0, p.L, n);
  const Eigen::VectorXd ts = sampling::linspace(0.0, p.T, n);
  Eigen::MatrixXd pts(2, n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) pts.col(j * n + i) << xs(i), ts(j);
  return pts;
}

json run_forward(const RunConfig& rc, const fs::path& dir) {
  const problems::ProblemSpec p = problems::make_problem(rc.problem);
  const pinn::TrainResult r = pinn::train_forward(p, rc.train);
  r.history.write_csv((dir / "history.csv").string());
  net::save_checkpoint(r.state, (dir / "state.json").string());
  json s = {{"final_loss", loss_json(r.final_loss)}, {"wall_seconds", r.history.wall}};
  if (p.oracle) s["relative_l2_vs_oracle"] = relative_l2(p, r.state);
  return s;
}

json run_control(const RunConfig& rc, const fs::path& dir) {
  const problems::ProblemSpec p = problems::make_problem(rc.problem);
  const pinn::TrainResult r = pinn::train_control(p, rc.train, rc.w_J);
  r.history.write_csv((dir / "history.csv").string());
  net::save_checkpoint(r.state, (dir / "state.json").string());
  net::save_checkpoint(r.control, (dir / "control.json").string());
  const problems::ControlField field = linesearch::control_to_field(p, r.control, rc.hifi);
  field.save((dir / "control.ctl").string());
  const net::MlpParams& ctl = r.control;
  const double j_pinn =
      pinn::pinn_cost(p, r.state, [&ctl](double x, double t) { return pinn::control_value(ctl, x, t); });
  return {{"w_J", rc.w_J},
          {"final_loss", loss_json(r.final_loss)},
          {"J_pinn", j_pinn},
          {"J_hifi", solvers::evaluate_cost_hifi(p, field, rc.hifi)},
          {"J_baseline", solvers::baseline_cost_hifi(p, rc.hifi)},
          {"wall_seconds", r.history.wall}};
}

json run_linesearch(const RunConfig& rc, const fs::path& dir, std::ostream& log) {
  const problems::ProblemSpec p = problems::make_problem(rc.problem);
  auto progress = [&log](const std::string& m) { log << m << '\n'; };
  auto cands = linesearch::step1_sweep(p, rc.train, rc.grid, (dir / "candidates").string(), progress, rc.workers);
  linesearch::LineSearchResult res = linesearch::step2_evaluate(p, std::move(cands), rc.step2, progress);
  linesearch::cross_validate(p, res, rc.hifi);
  res.write_csv((dir / "linesearch.csv").string());
  json table = json::array();
  for (const auto& c : res.candidates) {
    table.push_back({{"w_J", c.w_J},
                     {"trained", c.trained},
                     {"evaluated", c.evaluated},
                     {"infeasible", c.infeasible},
                     {"L_FBI", c.L_fbi},
                     {"L_J", c.L_J},
                     {"J_pinn_eval", c.J_pinn},
                     {"J_hifi", c.J_hifi},
                     {"seeds", {c.seeds.init, c.seeds.sampling, c.seeds.shuffle}},
                     {"error", c.error}});
  }
  json s = {{"candidates", table}, {"selected", res.selected}};
  if (res.selected < 0) throw solvers::NumericalError("no line-search candidate could be evaluated");
  const auto& best = res.candidates[static_cast<std::size_t>(res.selected)];
  linesearch::control_to_field(p, best.control, rc.hifi).save((dir / "control.ctl").string());
  s["selected_w_J"] = best.w_J;
  s["J_pinn"] = best.J_pinn;
  s["J_hifi"] = best.J_hifi;
  return s;
}

json run_dal(const RunConfig& rc, const fs::path& dir, std::ostream& log) {
  const problems::ProblemSpec p = problems::make_problem(rc.problem);
  const adjoint::DalResult r = adjoint::dal_optimize(p, rc.dal, rc.hifi, [&log](const adjoint::DalRecord& d) {
    if (d.iteration % 50 == 0) log << "iteration " << d.iteration << " J " << d.J << '\n';
  });
  adjoint::write_history_csv((dir / "dal_history.csv").string(), r.history);
  r.field.save((dir / "control.ctl").string());
  return {{"iterations", r.history.empty() ? 0 : r.history.back().iteration},
          {"stop_reason", r.stop_reason},
          {"J_initial", r.history.empty() ? 0.0 : r.history.front().J},
          {"J_final", r.history.empty() ? 0.0 : r.history.back().J},
          {"J_hifi", solvers::evaluate_cost_hifi(p, r.field, rc.hifi)},
          {"J_baseline", solvers::baseline_cost_hifi(p, rc.hifi)}};
}

json run_evaluate(const RunConfig& rc, const fs::path& dir) {
  const problems::ProblemSpec p = problems::make_problem(rc.problem);
  const problems::ControlField c = problems::ControlField::load(rc.control_path);
  c.save((dir / "control.ctl").string());
  return {{"control", rc.control_path},
          {"J_hifi", solvers::evaluate_cost_hifi(p, c, rc.hifi)},
          {"J_baseline", solvers::baseline_cost_hifi(p, rc.hifi)}};
}

json run_check(const RunConfig& rc, const fs::path& dir) {
  const problems::ProblemSpec p = problems::make_problem(rc.problem);
  const adjoint::GridObjective obj = adjoint::make_objective(p, rc.hifi);
  const Eigen::VectorXd c = Eigen::VectorXd::Zero(obj.size);
  const auto rep =
      adjoint::fd_gradient_check(obj, c, rc.check_directions, rc.check_eps, split_seed(rc.seed, kSeedDirections));
  std::ofstream out(dir / "gradcheck.csv");
  out.precision(17);
  out << "direction,adjoint,fd,rel_error\n";
  for (std::size_t i = 0; i < rep.fd.size(); ++i)
    out << i << ',' << rep.adjoint[i] << ',' << rep.fd[i] << ',' << rep.rel_error[i] << '\n';
  return {{"eps", rep.eps}, {"directions", rc.check_directions}, {"max_rel_error", rep.max_rel_error}};
}

void write_csv_grid(const fs::path& path, const std::string& header, const Eigen::MatrixXd& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(12);
  out << header << '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) out << (j ? "," : "") << rows(i, j);
    out << '\n';
  }
}

}  // namespace

double relative_l2(const problems::ProblemSpec& p, const net::MlpParams& state, int n) {
  if (!p.oracle) throw std::invalid_argument(p.name + " has no closed-form state");
  const Eigen::MatrixXd pts = box_grid(p, n);
  const Eigen::VectorXd u = net::forward_batch(state, pts);
  double num = 0.0, den = 0.0;
  for (Eigen::Index k = 0; k < pts.cols(); ++k) {
    const double e = p.oracle(pts(0, k), pts(1, k));
    num += (u(k) - e) * (u(k) - e);
    den += e * e;
  }
  return std::sqrt(num / den);
}

std::string output_dir(const RunConfig& rc) {
  if (!rc.output.empty()) return rc.output;
  const char* root = std::getenv("PINNCTL_OUTPUT_ROOT");
  const fs::path base = root && *root ? fs::path(root) : fs::path("runs");
  return (base / (rc.problem + "-" + engine_name(rc.engine) + "-seed" + std::to_string(rc.seed))).string();
}

json run_engine(const RunConfig& rc, const std::string& dir, std::ostream& log) {
  const fs::path d(dir);
  switch (rc.engine) {
    case Engine::kForward: return run_forward(rc, d);
    case Engine::kControl: return run_control(rc, d);
    case Engine::kLinesearch: return run_linesearch(rc, d, log);
    case Engine::kDal: return run_dal(rc, d, log);
    case Engine::kEvaluate: return run_evaluate(rc, d);
    case Engine::kCheckGradients: return run_check(rc, d);
  }
  throw std::logic_error("unknown engine");
}

int classify(const std::exception& e, json& record) {
  int code = kExitUsage;
  std::string kind = "error";
  if (dynamic_cast<const solvers::NumericalError*>(&e)) {
    code = kExitNumerical;
    kind = "numerical";
  } else if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e)) {
    kind = "usage";
  } else {
    kind = "io";
  }
  record = {{"error", kind}, {"message", e.what()}, {"exit_code", code}};
  return code;
}

int run(const RunConfig& rc, std::ostream& log) {
  const fs::path dir = output_dir(rc);
  json record;
  try {
    fs::create_directories(dir);
    fs::remove(dir / "summary.json");
    fs::remove(dir / "error.json");
    write_json(dir / "manifest.json", manifest(rc));
    {
      std::ofstream cfg(dir / "config.cfg");
      cfg << rc.to_text();
    }
    json summary = run_engine(rc, dir.string(), log);
    summary["problem"] = rc.problem;
    summary["engine"] = engine_name(rc.engine);
    write_json(dir / "summary.json", summary);
    log << "wrote " << dir.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    const int code = classify(e, record);
    std::error_code ec;
    if (fs::is_directory(dir, ec)) {
      std::ofstream out(dir / "error.json");
      out << record.dump(2) << '\n';
    }
    std::cerr << record.dump() << '\n';
    return code;
  }
}

void export_plotdata(const std::string& run_dir, std::ostream& log) {
  const fs::path dir(run_dir);
  if (!fs::exists(dir / "manifest.json")) throw std::runtime_error("incomplete run: no manifest.json in " + run_dir);
  if (!fs::exists(dir / "summary.json")) throw std::runtime_error("incomplete run: no summary.json in " + run_dir);
  const json m = read_json(dir / "manifest.json");
  const problems::ProblemSpec p = problems::make_problem(m.at("problem").get<std::string>());
  solvers::HifiConfig h;
  const json& cfg = m.at("config");
  auto cfg_int = [&cfg](const char* k, int& v) {
    if (cfg.contains(k)) v = std::stoi(cfg[k]["value"].get<std::string>());
  };
  auto cfg_num = [&cfg](const char* k, double& v) {
    if (cfg.contains(k)) v = std::stod(cfg[k]["value"].get<std::string>());
  };
  cfg_int("hifi.laplace_n", h.laplace_n);
  cfg_int("hifi.burgers_N", h.burgers_N);
  cfg_num("hifi.burgers_dt", h.burgers_dt);
  cfg_int("hifi.ks_N", h.ks_N);
  cfg_num("hifi.ks_dt", h.ks_dt);

  const fs::path out = dir / "plotdata";
  fs::create_directories(out);
  int written = 0;

  // Loss curves in long form.
  if (fs::exists(dir / "history.csv")) {
    std::ifstream in(dir / "history.csv");
    std::ofstream o(out / "loss_curves.csv");
    o << "epoch,term,value\n";
    std::string line;
    std::getline(in, line);  // weights comment
    std::getline(in, line);  // header
    const char* terms[] = {"L_r", "L_b", "L_0", "L_J", "total"};
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string cell, epoch;
      std::getline(ss, epoch, ',');
      std::getline(ss, cell, ',');  // lr
      for (const char* t : terms) {
        std::getline(ss, cell, ',');
        o << epoch << ',' << t << ',' << cell << '\n';
      }
    }
    ++written;
  }
  if (fs::exists(dir / "dal_history.csv")) {
    fs::copy_file(dir / "dal_history.csv", out / "dal_cost.csv", fs::copy_options::overwrite_existing);
    ++written;
  }
  if (fs::exists(dir / "linesearch.csv")) {
    fs::copy_file(dir / "linesearch.csv", out / "linesearch.csv", fs::copy_options::overwrite_existing);
    ++written;
  }

  // State network on a uniform grid, with the error field when a closed form exists.
  if (fs::exists(dir / "state.json")) {
    const net::MlpParams state = net::load_checkpoint((dir / "state.json").string());
    const int n = 100;
    const Eigen::MatrixXd pts = box_grid(p, n);
    const Eigen::VectorXd u = net::forward_batch(state, pts);
    Eigen::MatrixXd rows(pts.cols(), p.oracle ? 5 : 3);
    for (Eigen::Index k = 0; k < pts.cols(); ++k) {
      rows(k, 0) = pts(0, k);
      rows(k, 1) = pts(1, k);
      rows(k, 2) = u(k);
      if (p.oracle) {
        rows(k, 3) = p.oracle(pts(0, k), pts(1, k));
        rows(k, 4) = std::abs(u(k) - rows(k, 3));
      }
    }
    const char* second = p.family == Family::kLaplace ? "y" : "t";
    write_csv_grid(out / "state_field.csv",
                   std::string("x,") + second + ",u" + (p.oracle ? ",u_exact,abs_error" : ""), rows);
    ++written;
  }

  // Control profile and the classical solution it produces.
  if (fs::exists(dir / "control.ctl")) {
    const problems::ControlField c = problems::ControlField::load((dir / "control.ctl").string());
    if (p.family == Family::kKs) {
      const int nx = h.ks_N, nt = 101;
      Eigen::MatrixXd rows(static_cast<Eigen::Index>(nx) * nt, 3);
      for (int j = 0; j < nt; ++j)
        for (int i = 0; i < nx; ++i) {
          const double x = i * p.L / nx, t = j * p.T / (nt - 1);
          rows.row(static_cast<Eigen::Index>(j) * nx + i) << x, t, c(x, t);
        }
      write_csv_grid(out / "control_profile.csv", "x,t,f", rows);
    } else {
      const int nx = p.family == Family::kBurgers ? h.burgers_N : h.laplace_n;
      Eigen::MatrixXd rows(nx, p.reference_control ? 3 : 2);
      for (int i = 0; i < nx; ++i) {
        const double x = i * p.L / nx;
        rows(i, 0) = x;
        rows(i, 1) = c(x);
        if (p.reference_control) rows(i, 2) = p.reference_control(x);
      }
      write_csv_grid(out / "control_profile.csv", p.reference_control ? "x,c,c_reference" : "x,c", rows);
    }
    ++written;

    if (p.family != Family::kLaplace) {
      solvers::SpectralConfig sc = solvers::spectral_config(p, h);
      solvers::Trajectory tr;
      Eigen::VectorXd u0(sc.N);
      if (p.family == Family::kBurgers) {
        for (int i = 0; i < sc.N; ++i) u0(i) = c(i * p.L / sc.N);
        tr = solvers::solve_burgers(u0, p.nu, sc);
      } else {
        for (int i = 0; i < sc.N; ++i) u0(i) = p.initial(i * p.L / sc.N);
        tr = solvers::solve_ks(u0, solvers::forcing_on_grid(c, sc), sc);
      }
      const Eigen::VectorXd& uT = tr.final_state();
      Eigen::MatrixXd rows(sc.N, p.target ? 3 : 2);
      for (int i = 0; i < sc.N; ++i) {
        rows(i, 0) = i * p.L / sc.N;
        rows(i, 1) = uT(i);
        if (p.target) rows(i, 2) = p.target(rows(i, 0));
      }
      write_csv_grid(out / "final_state.csv", p.target ? "x,u,u_target" : "x,u", rows);
      ++written;
    }
  }
  if (written == 0) throw std::runtime_error("incomplete run: nothing to export in " + run_dir);
  log << "wrote " << written << " plot-data files to " << out.string() << '\n';
}

}  // namespace pinnctl::cli
