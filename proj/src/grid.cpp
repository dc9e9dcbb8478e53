#include <atomic>
#include <thread>

#include "pcac/experiment.hpp"

namespace pcac {
namespace {

template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  if (workers <= 0)
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), count));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  if (workers <= 1) {
    work();
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
}

ExperimentMetrics run_and_persist(ExperimentSpec spec) {
  const ExperimentRecord rec = run_experiment(spec);
  const ExperimentMetrics m = analyze(rec);
  if (!spec.output_path.empty()) persist_experiment(rec, m, spec.output_path);
  return m;
}

std::string cell_dir(const std::string& base, const std::string& name) {
  return base.empty() ? std::string() : (std::filesystem::path(base) / name).string();
}

}  // namespace

std::vector<GridCell> run_grid(const ExperimentSpec& base, int workers) {
  const auto grid = operating_grid(base.plant);
  std::vector<GridCell> cells(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t i) {
    GridCell& cell = cells[i];
    cell.index = static_cast<int>(i);
    cell.plant = grid[i];
    try {
      ExperimentSpec spec = base;
      spec.plant = grid[i];
      spec.output_path = cell_dir(base.output_path, "cell_" + std::to_string(i));
      cell.metrics = run_and_persist(spec);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  });
  return cells;
}

std::vector<AblationCell> run_ablation(const ExperimentSpec& base,
                                       double change_time, double omega_factor,
                                       int workers) {
  const auto grid = operating_grid(base.plant);
  std::vector<AblationCell> cells(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t i) {
    AblationCell& cell = cells[i];
    cell.index = static_cast<int>(i);
    cell.plant = grid[i];
    try {
      ExperimentSpec spec = base;
      spec.plant = grid[i];
      spec.change_time = change_time;
      spec.change_omega_factor = omega_factor;
      const std::string dir = cell_dir(base.output_path, "cell_" + std::to_string(i));
      spec.output_path = cell_dir(dir, "forgetting");
      cell.with_forgetting = run_and_persist(spec);
      spec.controller.forgetting.eta = 0.0;
      spec.output_path = cell_dir(dir, "no_forgetting");
      cell.without_forgetting = run_and_persist(spec);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  });
  return cells;
}

}  // namespace pcac
