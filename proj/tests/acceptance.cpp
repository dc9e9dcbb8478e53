// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "arx_data.hpp"
#include "oracles.hpp"
#include "pcac/bpre.hpp"
#include "pcac/experiment.hpp"
#include "pcac/rls_vrf.hpp"
#include "pcac/spec_io.hpp"

using namespace pcac;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937& rng) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd m(r, c);
  for (auto& v : m.reshaped()) v = n01(rng);
  return m;
}

Outcome rls_batch_equivalence() {
  const ModelDims d{2, 1, 1};
  ForgettingConfig cfg;
  cfg.eta = 0.0;
  const ForgettingTest test(cfg, 1);
  std::mt19937 rng(101);
  const Eigen::VectorXd theta0 = 0.1 * random_matrix(4, 1, rng);
  const Eigen::MatrixXd psi0 = 10.0 * Eigen::MatrixXd::Identity(4, 4);
  auto s = RlsState<double>::initial(ArxParameters<double>(d, theta0), psi0, cfg);
  std::vector<Eigen::MatrixXd> phis;
  std::vector<Eigen::VectorXd> ys;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    phis.push_back(random_matrix(1, 4, rng));
    ys.push_back(random_matrix(1, 1, rng));
    rls_update_inplace(s, phis.back(), ys.back(), test);
    const Eigen::VectorXd batch = oracle::batch_least_squares(phis, ys, psi0, theta0);
    worst = std::max(worst, (s.theta.vector() - batch).norm() / batch.norm());
  }
  return {worst <= 1e-8, fmt("worst relative error %.2e over 50 steps", worst)};
}

Outcome rls_consistency() {
  const auto truth = testdata::stable_siso_arx3();
  const auto data = testdata::simulate_arx(truth, 200, 5);
  ForgettingConfig cfg;
  const ForgettingTest test(cfg, 1);
  auto s = RlsState<double>::initial(ArxParameters<double>(truth.dims()),
                                     1e8 * Eigen::MatrixXd::Identity(6, 6), cfg);
  int reached = -1;
  double err = 0.0;
  for (int k = 0; k < 200; ++k) {
    rls_update_inplace(s, data[k].phi, data[k].y, test);
    err = (s.theta.vector() - truth.vector()).norm();
    if (reached < 0 && err < 1e-6) reached = k + 1;
  }
  return {reached > 0 && err < 1e-6,
          "below 1e-6 after " + std::to_string(reached) + " steps, " +
              fmt("final error %.2e", err)};
}

Outcome f_quantile() {
  const double combos[20][3] = {
      {40, 200, 0.999}, {1, 1, 0.9},    {1, 1, 0.5},      {2, 2, 0.5},     {5, 10, 0.95},
      {10, 5, 0.05},    {3, 7.5, 0.99}, {40, 200, 0.5},   {40, 200, 0.001}, {80, 30, 0.999},
      {80, 374.2, 0.9}, {20, 200, 0.999}, {40, 100, 0.99}, {1, 200, 0.999}, {200, 1, 0.1},
      {12, 12, 0.75},   {7, 3, 0.6},    {100, 400, 0.999}, {4, 40, 0.001}, {60, 180, 0.9999}};
  double worst = 0.0;
  for (const auto& c : combos) {
    const double x = inverse_f_cdf(c[0], c[1], c[2]);
    worst = std::max(worst, std::fabs(oracle::f_cdf_quadrature(c[0], c[1], x) - c[2]));
  }
  return {worst <= 1e-8, fmt("worst |CDF(x) - p| %.2e over 20 combinations", worst)};
}

Outcome bocf_equivalence() {
  std::mt19937 rng(404);
  std::uniform_int_distribution<int> pick_n(1, 5), pick_pm(1, 2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ModelDims d{pick_n(rng), pick_pm(rng), pick_pm(rng)};
    std::vector<Eigen::MatrixXd> F, G;
    for (int i = 0; i < d.n_hat; ++i) {
      F.push_back(random_matrix(d.p, d.p, rng));
      G.push_back(random_matrix(d.p, d.m, rng));
    }
    const ArxParameters<double> theta(d, oracle::stack_theta(F, G));
    // ys[i], us[i] hold lag i + 1 relative to k
    std::vector<Eigen::VectorXd> ys, us;
    IoHistory<double> history(d);
    for (int i = 0; i < d.n_hat; ++i) {
      ys.insert(ys.begin(), random_matrix(d.p, 1, rng));
      us.insert(us.begin(), random_matrix(d.m, 1, rng));
      history.push(ys.front(), us.front());
    }
    const Eigen::VectorXd y_k = random_matrix(d.p, 1, rng);
    const Eigen::VectorXd u_k = random_matrix(d.m, 1, rng);
    const auto model = realize(history, y_k, theta);
    const Eigen::VectorXd propagated = model.C * (model.A * model.x + model.B * u_k);

    ys.insert(ys.begin(), y_k);
    us.insert(us.begin(), u_k);
    ys.resize(d.n_hat);
    us.resize(d.n_hat);
    const Eigen::VectorXd recursion = oracle::arx_double_sum(F, G, ys, us);
    worst = std::max(worst, (propagated - recursion).norm() /
                                std::max(1.0, recursion.norm()));
  }
  return {worst <= 1e-12, fmt("worst relative error %.2e over 100 draws", worst)};
}

Outcome bpre_dare() {
  std::mt19937 rng(505);
  std::uniform_int_distribution<int> pick_n(1, 6), pick_small(1, 2);
  int checked = 0;
  double worst = 0.0;
  while (checked < 20) {
    const int n = pick_n(rng);
    const int m = pick_small(rng);
    const int p = std::min(pick_small(rng), n);
    const Eigen::MatrixXd A = random_matrix(n, n, rng) / std::sqrt(static_cast<double>(n));
    const Eigen::MatrixXd B = random_matrix(n, m, rng);
    Eigen::MatrixXd R2 = random_matrix(m, m, rng);
    R2 = R2 * R2.transpose() + 0.1 * Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd E1 = random_matrix(p, n, rng);
    const auto w = HorizonWeights<double>::from_performance_map(500, E1, R2, E1.transpose() * E1);
    const Eigen::MatrixXd dare = oracle::dare_doubling(A, B, w.R1, w.R2);
    const Eigen::MatrixXd K_inf =
        -(R2 + B.transpose() * dare * B).ldlt().solve(B.transpose() * dare * A);
    if (oracle::spectral_radius(A + B * K_inf) >= 1.0) continue;
    worst = std::max(worst, (riccati_backward(A, B, w) - dare).norm() / dare.norm());
    ++checked;
  }
  HorizonWeights<double> scalar;
  scalar.ell = 500;
  scalar.R1 = scalar.E1 = scalar.R2 = Eigen::MatrixXd::Ones(1, 1);
  scalar.P_terminal = Eigen::MatrixXd::Zero(1, 1);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  const double golden_err =
      std::fabs(riccati_backward(one, one, scalar)(0, 0) - (1.0 + std::sqrt(5.0)) / 2.0);
  return {worst <= 1e-6 && golden_err <= 1e-9,
          fmt("worst relative Frobenius %.2e, ", worst) +
              fmt("scalar golden-ratio error %.2e", golden_err)};
}

struct GridRun {
  std::vector<GridCell> cells;
  fs::path dir;
};

Outcome grid_suppression(const GridRun& g) {
  int good = 0;
  double worst_db = -std::numeric_limits<double>::infinity();
  double worst_time = 0.0;
  for (const auto& c : g.cells) {
    if (!c.ok || !c.metrics.suppression_time) continue;
    worst_db = std::max(worst_db, c.metrics.attenuation_db);
    worst_time = std::max(worst_time, *c.metrics.suppression_time);
    if (c.metrics.attenuation_db <= -40.0 && *c.metrics.suppression_time < 2.0) ++good;
  }
  return {good == 9, std::to_string(good) + "/9 cells; weakest attenuation " +
                         fmt("%.1f dB, ", worst_db) + fmt("slowest suppression %.3f s", worst_time)};
}

Outcome saturation_invariant(const GridRun& g) {
  long rows = 0;
  double max_u = 0.0;
  bool ok = true;
  for (const auto& c : g.cells) {
    const fs::path file = g.dir / ("cell_" + std::to_string(c.index)) / "record.csv";
    if (!fs::exists(file)) {
      ok = false;
      continue;
    }
    for (const auto& r : read_record_csv(file).rows) {
      ++rows;
      max_u = std::max(max_u, std::fabs(r.u));
      if (!(std::fabs(r.u) <= 8.0)) ok = false;
    }
  }
  return {ok && rows > 0, std::to_string(rows) + " logged rows, " + fmt("max |u| = %.17g", max_u)};
}

Outcome spectral_suppression(const GridRun& g) {
  int good = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : g.cells) {
    if (!c.ok) continue;
    worst = std::max(worst, c.metrics.peak_attenuation_db);
    if (c.metrics.peak_attenuation_db <= -40.0) ++good;
  }
  return {good == 9, std::to_string(good) + "/9 cells; weakest peak attenuation " +
                         fmt("%.1f dB", worst)};
}

Outcome forgetting_ablation() {
  ExperimentSpec base;
  const double change = base.t_open + 0.5 * (base.t_total - base.t_open);
  const auto cells = run_ablation(base, change, 1.1);
  int wins = 0;
  int ties = 0;
  for (const auto& c : cells) {
    if (!c.ok) continue;
    const auto& a = c.with_forgetting.resuppression_time;
    const auto& b = c.without_forgetting.resuppression_time;
    const bool ok = a && (!b || *a <= *b);
    if (ok) ++wins;
    if (a && b && *a == *b) ++ties;
  }
  return {wins >= 7, std::to_string(wins) + "/9 cells with eta=0.1 no slower than eta=0 (" +
                         std::to_string(ties) + " ties)"};
}

Outcome determinism(const fs::path& dir) {
  ExperimentSpec spec;
  spec.record_full_theta = true;
  const fs::path spec_file = dir / "spec.cfg";
  std::ofstream(spec_file) << format_spec(spec);
  std::vector<std::string> files;
  for (const char* name : {"first", "second"}) {
    const ExperimentSpec loaded = load_spec(spec_file);
    const auto rec = run_experiment(loaded);
    persist_experiment(rec, analyze(rec), dir / name);
    files.push_back(slurp(dir / name / "record.csv"));
  }
  const bool same = !files[0].empty() && files[0] == files[1];
  return {same, std::to_string(files[0].size()) + " bytes, " +
                    (same ? "identical" : "different")};
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "pcac_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  int failures = 0;
  auto report = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_s > 0.0 && secs >= limit_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", limit_s);
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s  %-28s %s [%.2f s]\n", id, o.pass ? "PASS" : "FAIL", name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "rls batch equivalence", 1.0, rls_batch_equivalence);
  report(2, "rls consistency", 1.0, rls_consistency);
  report(3, "F quantile", 5.0, f_quantile);
  report(4, "bocf equivalence", 0.0, bocf_equivalence);
  report(5, "bpre vs dare", 10.0, bpre_dare);

  GridRun grid;
  grid.dir = work / "grid";
  std::string grid_error;
  const auto start = std::chrono::steady_clock::now();
  try {
    ExperimentSpec base;
    base.output_path = grid.dir.string();
    grid.cells = run_grid(base);
  } catch (const std::exception& e) {
    grid_error = e.what();
  }
  const double grid_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(6, "closed-loop suppression", 0.0, [&] {
    Outcome o = grid_error.empty() ? grid_suppression(grid) : Outcome{false, grid_error};
    o.detail += fmt("; grid wall time %.2f s", grid_secs);
    if (grid_secs >= 60.0) o.pass = false;
    return o;
  });
  report(7, "saturation invariant", 0.0, [&] { return saturation_invariant(grid); });
  report(8, "spectral suppression", 0.0, [&] { return spectral_suppression(grid); });
  report(9, "forgetting ablation", 0.0, forgetting_ablation);
  report(10, "determinism", 0.0, [&] { return determinism(work); });

  fs::remove_all(work);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
