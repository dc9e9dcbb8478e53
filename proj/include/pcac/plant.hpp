#pragma once

// Self-excited oscillator standing in for the Rijke tube:
//   q'' + mu (q^2 - 1) q' + omega^2 q = kappa u
// integrated with fixed-step RK4 under a zero-order-held input.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace pcac {

struct EmulatorParams {
  double omega = 2.0 * 3.14159265358979323846 * 150.0;  // rad/s
  double mu = 2.0 * 0.01 * 2.0 * 3.14159265358979323846 * 150.0;  // 1/s
  double kappa = 2.5e4;       // input coupling, 1/(V s^2)
  double amp_scale = 50.0;    // Pa per unit q
  double noise_std = 0.02;    // Pa
  std::uint64_t seed = 1;
  int substeps = 100;         // RK4 steps per sample period

  void validate() const;
};

struct PlantState {
  double q = 0.0;
  double qdot = 0.0;
  double t = 0.0;
};

/// Thrown when |q| or |q'| exceeds the blow-up threshold.
class PlantBlowUp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Advances the plant one sample period with u held constant.
PlantState plant_zoh_step(const PlantState& state, double u_held,
                          const EmulatorParams& params, double sample_time);

/// Measurement noise source seeded from EmulatorParams::seed.
class MeasurementNoise {
 public:
  explicit MeasurementNoise(const EmulatorParams& params)
      : std_(params.noise_std), engine_(params.seed) {}

  double draw() {
    if (std_ == 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, std_)(engine_);
  }

 private:
  double std_;
  std::mt19937_64 engine_;
};

/// amp_scale q plus a noise draw.
double plant_output(const PlantState& state, const EmulatorParams& params,
                    MeasurementNoise& noise);

/// 3 x 3 operating grid: omega / 2 pi in {140, 150, 160} Hz (emulating
/// heater position) crossed with mu = {1, 2, 3} * 0.01 omega (emulating
/// heater power). Row-major in frequency.
std::vector<EmulatorParams> operating_grid(const EmulatorParams& base = {});

}  // namespace pcac
