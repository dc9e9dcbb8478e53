#include "pcac/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace pcac {
namespace {

long samples_in(double duration, double sample_time, const char* what) {
  const double ratio = duration / sample_time;
  const double rounded = std::round(ratio);
  if (std::fabs(ratio - rounded) > 1e-6)
    throw std::invalid_argument(std::string("ExperimentSpec: sample time does not divide ") + what);
  return static_cast<long>(rounded);
}

// Prefix sums of y^2 for windowed RMS queries.
class SquareSums {
 public:
  explicit SquareSums(const std::vector<double>& y) : sums_(y.size() + 1, 0.0) {
    for (std::size_t i = 0; i < y.size(); ++i) sums_[i + 1] = sums_[i] + y[i] * y[i];
  }
  // RMS over samples [begin, end).
  double rms(long begin, long end) const {
    if (end <= begin) return 0.0;
    const double s = sums_[static_cast<std::size_t>(end)] - sums_[static_cast<std::size_t>(begin)];
    return std::sqrt(std::max(s, 0.0) / static_cast<double>(end - begin));
  }

 private:
  std::vector<double> sums_;
};

double to_db(double ratio) { return 20.0 * std::log10(ratio); }

// Index of the first closed-loop row, or the row count if there is none.
long switch_index(const ExperimentRecord& record) {
  for (std::size_t i = 0; i < record.rows.size(); ++i)
    if (record.rows[i].closed_loop) return static_cast<long>(i);
  return static_cast<long>(record.rows.size());
}

}  // namespace

long ExperimentSpec::open_steps() const {
  if (t_open >= t_total) return total_steps() + 1;
  return samples_in(t_open, sample_time, "t_open");
}

long ExperimentSpec::total_steps() const {
  return samples_in(t_total, sample_time, "t_total");
}

void ExperimentSpec::validate() const {
  if (!(sample_time > 0.0)) throw std::invalid_argument("ExperimentSpec: T_s <= 0");
  if (!(t_total > 0.0)) throw std::invalid_argument("ExperimentSpec: t_total <= 0");
  if (!(t_open >= 0.0) || t_open > t_total)
    throw std::invalid_argument("ExperimentSpec: need 0 <= t_open <= t_total");
  total_steps();
  open_steps();
  if (change_time >= 0.0) {
    samples_in(change_time, sample_time, "change_time");
    if (!(change_omega_factor > 0.0))
      throw std::invalid_argument("ExperimentSpec: change_omega_factor <= 0");
  }
  plant.validate();
  controller.validate();
  if (controller.dims.p != 1 || controller.dims.m != 1)
    throw std::invalid_argument("ExperimentSpec: the emulator is single-input single-output");
}

std::vector<double> ExperimentRecord::outputs() const {
  std::vector<double> y;
  y.reserve(rows.size());
  for (const auto& r : rows) y.push_back(r.y);
  return y;
}

ExperimentRecord run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const long n_total = spec.total_steps();
  const long n_open = spec.open_steps();
  const long change_step =
      spec.change_time >= 0.0 ? std::lround(spec.change_time / spec.sample_time) : -1;
  const double T = spec.sample_time;

  EmulatorParams params = spec.plant;
  PlantState x{spec.q0, spec.qdot0, 0.0};
  MeasurementNoise noise(params);
  PcacState ctrl = pcac_init(spec.controller);

  ExperimentRecord rec;
  rec.sample_time = T;
  rec.t_open = n_open > n_total ? spec.t_total : static_cast<double>(n_open) * T;
  rec.change_time = spec.change_time;
  rec.rows.reserve(static_cast<std::size_t>(n_total + 1));

  double u = 0.0;
  double u_req = 0.0;
  Eigen::VectorXd y_vec(1);
  for (long k = 0; k <= n_total; ++k) {
    const double y = plant_output(x, params, noise);
    RecordRow row{};
    row.t = static_cast<double>(k) * T;
    row.y = y;
    row.u_requested = u_req;
    row.u = u;
    row.closed_loop = k >= n_open;

    double next_u = 0.0;
    double next_req = 0.0;
    if (row.closed_loop) {
      y_vec(0) = y;
      const auto start = std::chrono::steady_clock::now();
      const StepResult r = pcac_step(ctrl, y_vec);
      const auto stop = std::chrono::steady_clock::now();
      row.wall_us = std::chrono::duration<double, std::micro>(stop - start).count();
      row.held = r.held;
      next_u = r.u_implemented(0);
      next_req = r.u_requested(0);
    }
    row.theta_f_norm = ctrl.rls.theta.theta_F().norm();
    row.theta_g_norm = ctrl.rls.theta.theta_G().norm();
    row.beta = ctrl.rls.last_beta;
    if (spec.record_full_theta) {
      const auto& th = ctrl.rls.theta.vector();
      row.theta.assign(th.data(), th.data() + th.size());
    }
    rec.rows.push_back(std::move(row));

    if (k == n_total) break;
    if (k == change_step) params.omega *= spec.change_omega_factor;
    x = plant_zoh_step(x, u, params, T);
    u = next_u;
    u_req = next_req;
  }
  rec.failure_count = ctrl.failure_count;
  return rec;
}

PhaseSpectra phase_spectra(const ExperimentRecord& record) {
  const auto y = record.outputs();
  const long n = static_cast<long>(y.size());
  const long n_open = switch_index(record);
  const long full = std::lround(kSpectrumWindow / record.sample_time);
  // equal lengths keep the two spectra on the same bins
  long window = std::min(full, n_open);
  if (n - n_open >= 2) window = std::min(window, n - n_open);
  PhaseSpectra out;
  auto segment = [&](long begin) {
    return std::span<const double>(y).subspan(static_cast<std::size_t>(begin),
                                              static_cast<std::size_t>(window));
  };
  if (window >= 2) {
    out.open_loop = amplitude_spectrum(segment(n_open - window), record.sample_time);
    if (n - n_open >= window)
      out.closed_loop = amplitude_spectrum(segment(n - window), record.sample_time);
  }
  return out;
}

ExperimentMetrics analyze(const ExperimentRecord& record) {
  ExperimentMetrics m;
  const auto y = record.outputs();
  const long n = static_cast<long>(y.size());
  if (n == 0) return m;
  const double T = record.sample_time;
  const long n_open = switch_index(record);
  const SquareSums sums(y);

  const long rms_window = std::lround(kRmsWindow / T);
  m.pre_rms = sums.rms(std::max(0L, n_open - rms_window), n_open);
  m.final_rms = sums.rms(std::max(n_open, n - rms_window), n);
  if (m.pre_rms > 0.0 && n_open < n) m.attenuation_db = to_db(m.final_rms / m.pre_rms);

  const long supp_window = std::lround(kSuppressionWindow / T);
  const double threshold = kSuppressionFraction * m.pre_rms;
  auto trailing = [&](long k) {
    return sums.rms(std::max(0L, k - supp_window + 1), k + 1);
  };
  if (m.pre_rms > 0.0) {
    for (long k = n_open; k < n; ++k) {
      if (trailing(k) < threshold) {
        m.suppression_time = static_cast<double>(k - n_open) * T;
        break;
      }
    }
  }

  if (record.change_time >= 0.0 && m.pre_rms > 0.0) {
    const long c = std::lround(record.change_time / T);
    long last_above = -1;
    for (long k = c; k < n; ++k)
      if (trailing(k) >= threshold) last_above = k;
    if (last_above < 0)
      m.resuppression_time = 0.0;
    else if (last_above < n - 1)
      m.resuppression_time = static_cast<double>(last_above + 1 - c) * T;
  }

  const PhaseSpectra spectra = phase_spectra(record);
  if (!spectra.open_loop.empty()) {
    const std::size_t b = dominant_bin(spectra.open_loop);
    m.open_peak_hz = spectra.open_loop[b].frequency_hz;
    m.open_peak_amplitude = spectra.open_loop[b].amplitude;
  }
  if (!spectra.closed_loop.empty()) {
    const std::size_t b = dominant_bin(spectra.open_loop);
    m.closed_peak_amplitude = spectra.closed_loop[b].amplitude;
    if (m.open_peak_amplitude > 0.0)
      m.peak_attenuation_db = to_db(m.closed_peak_amplitude / m.open_peak_amplitude);
  }

  for (const auto& r : record.rows) {
    m.max_abs_u = std::max(m.max_abs_u, std::fabs(r.u));
    if (r.closed_loop && r.wall_us > T * 1e6) ++m.budget_violations;
  }
  m.failure_count = record.failure_count;
  return m;
}

}  // namespace pcac
