#include "pcac/plant.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace pcac {
namespace {

constexpr double kBlowUp = 1e6;

struct Derivative {
  double dq;
  double dqdot;
};

Derivative vector_field(double q, double qdot, double u,
                        const EmulatorParams& p) {
  return {qdot, p.kappa * u - p.mu * (q * q - 1.0) * qdot - p.omega * p.omega * q};
}

}  // namespace

void EmulatorParams::validate() const {
  if (!(omega > 0.0) || !(mu > 0.0) || !(amp_scale > 0.0))
    throw std::invalid_argument("EmulatorParams: omega, mu, amp_scale must be > 0");
  if (!(noise_std >= 0.0))
    throw std::invalid_argument("EmulatorParams: noise_std < 0");
  if (substeps < 1) throw std::invalid_argument("EmulatorParams: substeps < 1");
}

PlantState plant_zoh_step(const PlantState& state, double u_held,
                          const EmulatorParams& params, double sample_time) {
  if (!(sample_time > 0.0))
    throw std::invalid_argument("plant_zoh_step: sample time must be > 0");
  const double h = sample_time / params.substeps;
  double q = state.q;
  double v = state.qdot;
  for (int i = 0; i < params.substeps; ++i) {
    const Derivative k1 = vector_field(q, v, u_held, params);
    const Derivative k2 =
        vector_field(q + 0.5 * h * k1.dq, v + 0.5 * h * k1.dqdot, u_held, params);
    const Derivative k3 =
        vector_field(q + 0.5 * h * k2.dq, v + 0.5 * h * k2.dqdot, u_held, params);
    const Derivative k4 = vector_field(q + h * k3.dq, v + h * k3.dqdot, u_held, params);
    q += h / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    v += h / 6.0 * (k1.dqdot + 2.0 * k2.dqdot + 2.0 * k3.dqdot + k4.dqdot);
  }
  if (!std::isfinite(q) || !std::isfinite(v) || std::fabs(q) > kBlowUp ||
      std::fabs(v) > kBlowUp)
    throw PlantBlowUp("plant state exceeded blow-up threshold");
  // t advances by whole samples to keep the clock exact
  return {q, v, state.t + sample_time};
}

double plant_output(const PlantState& state, const EmulatorParams& params,
                    MeasurementNoise& noise) {
  return params.amp_scale * state.q + noise.draw();
}

std::vector<EmulatorParams> operating_grid(const EmulatorParams& base) {
  constexpr std::array<double, 3> freqs_hz{140.0, 150.0, 160.0};
  constexpr std::array<double, 3> mu_factors{1.0, 2.0, 3.0};
  std::vector<EmulatorParams> grid;
  grid.reserve(9);
  for (double f : freqs_hz) {
    for (double factor : mu_factors) {
      EmulatorParams p = base;
      p.omega = 2.0 * std::numbers::pi * f;
      p.mu = factor * 0.01 * p.omega;
      grid.push_back(p);
    }
  }
  return grid;
}

}  // namespace pcac
