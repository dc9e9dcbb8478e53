#pragma once

// Predictive cost adaptive controller: per-sample RLS identification, BOCF
// realization and backward Riccati sweep producing u_{k+1} from y_k.

#include <cstdint>

#include "pcac/bpre.hpp"
#include "pcac/idmodel.hpp"
#include "pcac/rls_vrf.hpp"

namespace pcac {

struct PcacConfig {
  ModelDims dims{10, 1, 1};
  ArxParameters<double> theta0;
  double psi0_scale = 1e-4;
  ForgettingConfig forgetting;
  HorizonWeights<double> weights;
  SaturationBounds<double> bounds;
  Eigen::VectorXd u0;

  /// Rijke-tube defaults: n = 10, theta0 = 1e-10, Psi0 = 1e-4 I, tau_n = 40,
  /// tau_d = 200, eta = 0.1, alpha = 0.001, ell = 20, R1 = P_{ell+1} =
  /// diag(1, 0, ..), R2 = 1e-2, |u| <= 8, u0 = 0.
  static PcacConfig defaults(ModelDims dims = {10, 1, 1});

  void validate() const;
};

struct PcacState {
  PcacConfig config;
  ForgettingTest forgetting_test;
  RlsState<double> rls;
  IoHistory<double> history;
  Eigen::VectorXd u_implemented;  // u_k
  Eigen::VectorXd u_requested;    // u_req,k
  long step = 0;
  std::int64_t failure_count = 0;
  long last_failure_step = -1;
};

struct StepResult {
  Eigen::VectorXd u_requested;    // u_req,k+1
  Eigen::VectorXd u_implemented;  // u_{k+1}
  Eigen::VectorXd x_next;         // x_{m,k+1}
  Eigen::MatrixXd gain;           // K_{k+1}; empty on failure
  bool held = false;              // optimizer failed, previous u held
};

PcacState pcac_init(const PcacConfig& cfg);

/// Consumes y_k and advances the controller to step k+1.
StepResult pcac_step(PcacState& state, const Eigen::Ref<const Eigen::VectorXd>& y_k);

}  // namespace pcac
