#include "pcac/controller.hpp"

namespace pcac {

PcacConfig PcacConfig::defaults(ModelDims dims) {
  dims.validate();
  PcacConfig cfg;
  cfg.dims = dims;
  cfg.theta0 = ArxParameters<double>::Constant(dims, 1e-10);
  cfg.psi0_scale = 1e-4;
  cfg.forgetting = ForgettingConfig{40, 200, 0.1, 0.001};
  cfg.weights = HorizonWeights<double>::first_output(20, dims.state_dim(),
                                                     dims.p, dims.m, 1e-2);
  cfg.bounds = SaturationBounds<double>::symmetric(dims.m, 8.0);
  cfg.u0 = Eigen::VectorXd::Zero(dims.m);
  return cfg;
}

void PcacConfig::validate() const {
  dims.validate();
  if (theta0.dims() != dims)
    throw std::invalid_argument("PcacConfig: theta0 dims mismatch");
  if (!theta0.all_finite())
    throw std::invalid_argument("PcacConfig: theta0 not finite");
  if (!(psi0_scale > 0.0) || !std::isfinite(psi0_scale))
    throw std::invalid_argument("PcacConfig: psi0_scale must be positive");
  forgetting.validate(dims.p);
  weights.validate();
  if (weights.state_dim() != dims.state_dim() || weights.R2.rows() != dims.m)
    throw std::invalid_argument("PcacConfig: weights sized for other dims");
  bounds.validate();
  if (bounds.u_min.size() != dims.m)
    throw std::invalid_argument("PcacConfig: bounds sized for other dims");
  if (u0.size() != dims.m)
    throw std::invalid_argument("PcacConfig: u0 size != m");
}

PcacState pcac_init(const PcacConfig& cfg) {
  cfg.validate();
  const int n = cfg.dims.param_count();
  PcacState s;
  s.config = cfg;
  s.forgetting_test = ForgettingTest(cfg.forgetting, cfg.dims.p);
  s.rls = RlsState<double>::initial(
      cfg.theta0, cfg.psi0_scale * Eigen::MatrixXd::Identity(n, n),
      cfg.forgetting);
  s.history = IoHistory<double>(cfg.dims);
  s.u_requested = cfg.u0;
  s.u_implemented = cfg.u0;
  return s;
}

StepResult pcac_step(PcacState& s, const Eigen::Ref<const Eigen::VectorXd>& y_k) {
  const PcacConfig& cfg = s.config;
  detail::require_dims(y_k.size() == cfg.dims.p, "pcac_step: y_k size != p");

  const Eigen::MatrixXd phi = build_regressor(s.history, cfg.dims);
  rls_update_inplace(s.rls, phi, y_k, s.forgetting_test);
  const ArxParameters<double>& theta_next = s.rls.theta;

  BocfRealization<double> model = realize(s.history, y_k, theta_next);
  StepResult out;
  out.x_next = model.A * model.x + model.B * s.u_implemented;

  try {
    const Eigen::MatrixXd P2 = riccati_backward(model.A, model.B, cfg.weights);
    out.gain = control_gain(model.A, model.B, cfg.weights.R2, P2);
    out.u_requested = out.gain * out.x_next;
    if (!out.u_requested.allFinite())
      throw NumericalFailure("pcac_step: non-finite requested control");
    out.u_implemented = saturate(out.u_requested, cfg.bounds);
  } catch (const NumericalFailure&) {
    out.gain.resize(0, 0);
    out.u_requested = s.u_requested;
    out.u_implemented = s.u_implemented;
    out.held = true;
    ++s.failure_count;
    s.last_failure_step = s.step;
  }

  s.history.push(y_k, s.u_implemented);
  s.u_requested = out.u_requested;
  s.u_implemented = out.u_implemented;
  ++s.step;
  return out;
}

}  // namespace pcac
