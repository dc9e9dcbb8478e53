#pragma once

// Sampled-data experiment harness: open-loop phase, switch to closed loop,
// per-step logging, suppression metrics, 3 x 3 grid sweeps and the
// forgetting ablation.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pcac/controller.hpp"
#include "pcac/plant.hpp"
#include "pcac/spectrum.hpp"

namespace pcac {

struct ExperimentSpec {
  EmulatorParams plant;
  PcacConfig controller = PcacConfig::defaults();
  double sample_time = 1e-3;  // s
  double t_open = 1.5;        // s, open-loop duration
  double t_total = 4.0;       // s
  double q0 = 0.1;            // initial plant displacement
  double qdot0 = 0.0;
  // Optional abrupt plant change: omega *= change_omega_factor at
  // change_time (disabled when change_time < 0).
  double change_time = -1.0;
  double change_omega_factor = 1.0;
  bool record_full_theta = false;
  std::string output_path;  // directory; empty means do not persist

  long open_steps() const;   // samples with t < t_open
  long total_steps() const;  // samples after t = 0
  void validate() const;
};

struct RecordRow {
  double t;
  double y;
  double u_requested;
  double u;
  double theta_f_norm;
  double theta_g_norm;
  double beta;
  bool closed_loop;
  bool held;
  double wall_us;  // controller step wall time, 0 in open loop
  std::vector<double> theta;  // filled only with record_full_theta
};

struct ExperimentRecord {
  double sample_time = 0.0;
  double t_open = 0.0;
  double change_time = -1.0;
  std::vector<RecordRow> rows;
  std::int64_t failure_count = 0;

  std::vector<double> outputs() const;
};

/// Suppression metric: suppression time is the first time after the switch
/// at which the trailing 100 ms RMS of y drops below 1% of the pre-switch
/// RMS (last 0.5 s of open loop).
struct ExperimentMetrics {
  double pre_rms = 0.0;
  double final_rms = 0.0;          // last 0.5 s
  double attenuation_db = 0.0;     // 20 log10(final / pre)
  std::optional<double> suppression_time;
  // Time after the plant change from which the trailing RMS stays below
  // the threshold until the end of the run; 0 if it never rises above.
  std::optional<double> resuppression_time;
  double open_peak_hz = 0.0;
  double open_peak_amplitude = 0.0;
  double closed_peak_amplitude = 0.0;  // same bin, closed-loop segment
  double peak_attenuation_db = 0.0;
  double max_abs_u = 0.0;
  std::int64_t failure_count = 0;
  long budget_violations = 0;  // controller steps over one sample period
};

inline constexpr double kSuppressionWindow = 0.1;    // s
inline constexpr double kSuppressionFraction = 0.01;
inline constexpr double kRmsWindow = 0.5;            // s
inline constexpr double kSpectrumWindow = 1.0;       // s

ExperimentRecord run_experiment(const ExperimentSpec& spec);

ExperimentMetrics analyze(const ExperimentRecord& record);

/// Writes record.csv (deterministic), timing.csv and metrics.txt into dir.
void persist_experiment(const ExperimentRecord& record,
                        const ExperimentMetrics& metrics,
                        const std::filesystem::path& dir);

void write_record_csv(const ExperimentRecord& record,
                      const std::filesystem::path& path);
ExperimentRecord read_record_csv(const std::filesystem::path& path);

void write_spectrum_csv(const std::vector<SpectrumBin>& spectrum,
                        const std::filesystem::path& path);

/// Open-loop (last kSpectrumWindow before the switch) and closed-loop (last
/// kSpectrumWindow of the run) spectra of y.
struct PhaseSpectra {
  std::vector<SpectrumBin> open_loop;
  std::vector<SpectrumBin> closed_loop;
};
PhaseSpectra phase_spectra(const ExperimentRecord& record);

struct GridCell {
  int index = 0;
  EmulatorParams plant;
  bool ok = false;
  std::string error;
  ExperimentMetrics metrics;
};

/// Runs every operating-grid point with the base controller. Per-cell
/// failures are reported in the cell, never thrown. Records go to
/// <base.output_path>/cell_<i>/ when an output path is set.
std::vector<GridCell> run_grid(const ExperimentSpec& base, int workers = 0);

void write_grid_summary(const std::vector<GridCell>& cells,
                        const std::filesystem::path& path);

struct AblationCell {
  int index = 0;
  EmulatorParams plant;
  bool ok = false;
  std::string error;
  ExperimentMetrics with_forgetting;
  ExperimentMetrics without_forgetting;
};

/// Paired comparison of eta = base eta against eta = 0 on every grid cell,
/// same seeds, with an omega change of `omega_factor` at `change_time`.
std::vector<AblationCell> run_ablation(const ExperimentSpec& base,
                                       double change_time, double omega_factor,
                                       int workers = 0);

void write_ablation_summary(const std::vector<AblationCell>& cells,
                            const std::filesystem::path& path);

}  // namespace pcac
