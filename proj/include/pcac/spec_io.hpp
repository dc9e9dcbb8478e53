#pragma once

// Experiment spec files: flat `section.key = value` lines, '#' comments.
//
//   plant.freq_hz = 150        # or plant.omega (rad/s)
//   plant.mu_factor = 2        # or plant.mu (1/s); mu = factor * 0.01 * omega
//   plant.kappa, plant.amp_scale, plant.noise_std, plant.seed, plant.substeps
//   plant.q0, plant.qdot0, plant.change_time, plant.change_omega_factor
//   controller.n_hat, controller.theta0, controller.psi0, controller.tau_n,
//   controller.tau_d, controller.eta, controller.alpha, controller.ell,
//   controller.r2, controller.u_min, controller.u_max, controller.u0
//   sim.sample_time, sim.t_open, sim.t_total
//   output.path, output.full_theta
//
// Unset keys keep their defaults. Unknown keys are an error.

#include <filesystem>
#include <string>

#include "pcac/experiment.hpp"

namespace pcac {

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::filesystem::path& path);

/// Text that parses back to the same spec.
std::string format_spec(const ExperimentSpec& spec);

}  // namespace pcac
