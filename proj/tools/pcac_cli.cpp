// pcac: run sampled-data PCAC experiments against the self-excited emulator.
//
//   pcac run      --spec s.cfg --out dir [--seed N] [--open-loop-only]
//   pcac grid     --spec s.cfg --out dir [--seed N] [--open-loop-only]
//   pcac ablate   --spec s.cfg --out dir [--seed N] [--change-time T] [--omega-factor F]
//   pcac spectrum --record dir/record.csv --out dir

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "pcac/experiment.hpp"
#include "pcac/spec_io.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string spec_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool open_loop_only = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--spec", o.spec_path, "Experiment spec file (key = value)");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "Override plant.seed");
  cmd->add_flag("--open-loop-only", o.open_loop_only, "Never switch to closed loop");
}

pcac::ExperimentSpec resolve_spec(const CommonOptions& o) {
  pcac::ExperimentSpec spec =
      o.spec_path.empty() ? pcac::ExperimentSpec{} : pcac::load_spec(o.spec_path);
  if (o.seed) spec.plant.seed = *o.seed;
  if (o.open_loop_only) spec.t_open = spec.t_total;
  if (!o.out_dir.empty()) spec.output_path = o.out_dir;
  if (spec.output_path.empty()) spec.output_path = "pcac_out";
  spec.validate();
  return spec;
}

std::string fmt_time(const std::optional<double>& t) {
  if (!t) return "none";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f s", *t);
  return buf;
}

int cmd_run(const CommonOptions& o) {
  const auto spec = resolve_spec(o);
  const auto record = pcac::run_experiment(spec);
  const auto m = pcac::analyze(record);
  pcac::persist_experiment(record, m, spec.output_path);
  {
    std::ofstream f(fs::path(spec.output_path) / "spec.cfg");
    f << pcac::format_spec(spec);
  }
  std::printf("rows=%zu pre_rms=%.4g final_rms=%.4g attenuation=%.1f dB suppression=%s "
              "peak=%.1f Hz peak_attenuation=%.1f dB max|u|=%.3f failures=%lld\n",
              record.rows.size(), m.pre_rms, m.final_rms, m.attenuation_db,
              fmt_time(m.suppression_time).c_str(), m.open_peak_hz,
              m.peak_attenuation_db, m.max_abs_u,
              static_cast<long long>(m.failure_count));
  if (m.budget_violations > 0)
    std::printf("warning: %ld controller steps exceeded the sample period\n",
                m.budget_violations);
  return m.failure_count > 0 ? 2 : 0;
}

int cmd_grid(const CommonOptions& o) {
  const auto spec = resolve_spec(o);
  const auto cells = pcac::run_grid(spec);
  const fs::path summary = fs::path(spec.output_path) / "grid_summary.csv";
  pcac::write_grid_summary(cells, summary);
  for (const auto& c : cells) {
    std::printf("cell %d  %6.1f Hz  mu=%6.2f  %-6s suppression=%-9s attenuation=%6.1f dB "
                "peak_attenuation=%6.1f dB max|u|=%.3f\n",
                c.index, c.plant.omega / (2.0 * std::numbers::pi), c.plant.mu,
                c.ok ? "ok" : "failed", fmt_time(c.metrics.suppression_time).c_str(),
                c.metrics.attenuation_db, c.metrics.peak_attenuation_db,
                c.metrics.max_abs_u);
    if (!c.ok) std::printf("        error: %s\n", c.error.c_str());
  }
  std::printf("summary: %s\n", summary.c_str());
  return 0;
}

int cmd_ablate(const CommonOptions& o, std::optional<double> change_time,
               double omega_factor) {
  const auto spec = resolve_spec(o);
  const double t_change =
      change_time.value_or(spec.t_open + 0.5 * (spec.t_total - spec.t_open));
  const auto cells = pcac::run_ablation(spec, t_change, omega_factor);
  const fs::path summary = fs::path(spec.output_path) / "ablation_summary.csv";
  pcac::write_ablation_summary(cells, summary);
  int not_slower = 0;
  for (const auto& c : cells) {
    const auto& a = c.with_forgetting.resuppression_time;
    const auto& b = c.without_forgetting.resuppression_time;
    const bool ok = c.ok && a && (!b || *a <= *b);
    not_slower += ok ? 1 : 0;
    std::printf("cell %d  %6.1f Hz  mu=%6.2f  %-6s resuppression eta=%.3g: %-9s eta=0: %s\n",
                c.index, c.plant.omega / (2.0 * std::numbers::pi), c.plant.mu,
                c.ok ? "ok" : "failed", spec.controller.forgetting.eta,
                fmt_time(a).c_str(), fmt_time(b).c_str());
  }
  std::printf("forgetting not slower on %d of %zu cells\nsummary: %s\n", not_slower,
              cells.size(), summary.c_str());
  return 0;
}

int cmd_spectrum(const std::string& record_path, std::string out_dir) {
  const auto record = pcac::read_record_csv(record_path);
  if (out_dir.empty()) out_dir = fs::path(record_path).parent_path().string();
  if (out_dir.empty()) out_dir = ".";
  const auto spectra = pcac::phase_spectra(record);
  const auto y = record.outputs();
  pcac::write_spectrum_csv(pcac::amplitude_spectrum(y, record.sample_time),
                           fs::path(out_dir) / "spectrum_full.csv");
  if (!spectra.open_loop.empty()) {
    pcac::write_spectrum_csv(spectra.open_loop, fs::path(out_dir) / "spectrum_open.csv");
    pcac::write_spectrum_csv(spectra.closed_loop, fs::path(out_dir) / "spectrum_closed.csv");
    const auto m = pcac::analyze(record);
    std::printf("open-loop peak %.1f Hz amplitude %.4g, closed-loop %.4g (%.1f dB)\n",
                m.open_peak_hz, m.open_peak_amplitude, m.closed_peak_amplitude,
                m.peak_attenuation_db);
  } else {
    std::printf("record has no closed-loop segment; wrote full spectrum only\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive cost adaptive control experiments"};
  app.require_subcommand(1);

  CommonOptions run_opts, grid_opts, ablate_opts;
  auto* run = app.add_subcommand("run", "Single experiment from a spec file");
  add_common(run, run_opts);
  auto* grid = app.add_subcommand("grid", "3 x 3 operating-grid sweep");
  add_common(grid, grid_opts);
  auto* ablate = app.add_subcommand("ablate", "Forgetting on/off paired comparison");
  add_common(ablate, ablate_opts);
  std::optional<double> change_time;
  double omega_factor = 1.1;
  ablate->add_option("--change-time", change_time,
                     "Time of the plant frequency change (default: mid closed loop)");
  ablate->add_option("--omega-factor", omega_factor, "Frequency change factor")
      ->capture_default_str();

  std::string record_path, spectrum_out;
  auto* spectrum = app.add_subcommand("spectrum", "Amplitude spectra of a record file");
  spectrum->add_option("--record", record_path, "record.csv to analyze")->required();
  spectrum->add_option("--out", spectrum_out, "Output directory (default: record's)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts);
    if (*grid) return cmd_grid(grid_opts);
    if (*ablate) return cmd_ablate(ablate_opts, change_time, omega_factor);
    if (*spectrum) return cmd_spectrum(record_path, spectrum_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
