#pragma once

// Recursive least squares with variable-rate forgetting. The forgetting
// factor lambda_k = 1 / beta_k is driven by an F-test comparing the spread
// of identification errors over a short window (tau_n + 1 samples) with a
// long window (tau_d + 1 samples).

#include <cmath>

#include "pcac/common.hpp"
#include "pcac/fdist.hpp"
#include "pcac/idmodel.hpp"

namespace pcac {

struct ForgettingConfig {
  int tau_n = 40;
  int tau_d = 200;
  double eta = 0.1;
  double alpha = 0.001;

  void validate(int p) const {
    if (tau_d <= p) throw std::invalid_argument("ForgettingConfig: tau_d <= p");
    if (tau_n < p || tau_n >= tau_d)
      throw std::invalid_argument("ForgettingConfig: need p <= tau_n < tau_d");
    if (!(eta >= 0.0)) throw std::invalid_argument("ForgettingConfig: eta < 0");
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw std::invalid_argument("ForgettingConfig: alpha outside (0, 1]");
    if (p > 1 && tau_d - p - 3 <= 0)
      throw std::invalid_argument(
          "ForgettingConfig: multivariable test needs tau_d > p + 3");
  }
};

/// Constants of the multivariable test statistic.
struct MultivariableTestConstants {
  double a;
  double b;
  double c;
};

inline MultivariableTestConstants multivariable_test_constants(
    const ForgettingConfig& cfg, int p) {
  const double tn = cfg.tau_n;
  const double td = cfg.tau_d;
  const double a = (tn + td - p - 1.0) * (td - 1.0) /
                   ((td - p - 3.0) * (td - p));
  const double b = 4.0 + (p * tn + 2.0) / (a - 1.0);
  const double c = p * tn * (b - 2.0) / (b * (td - p - 1.0));
  return {a, b, c};
}

/// F_inv(1 - alpha) with the degrees of freedom appropriate for p outputs:
/// (tau_n, tau_d) when p == 1, (p tau_n, b) otherwise.
inline double forgetting_quantile(const ForgettingConfig& cfg, int p) {
  if (cfg.alpha >= 1.0) return 0.0;
  if (p == 1) return inverse_f_cdf(cfg.tau_n, cfg.tau_d, 1.0 - cfg.alpha);
  const auto k = multivariable_test_constants(cfg, p);
  return inverse_f_cdf(static_cast<double>(p) * cfg.tau_n, k.b,
                       1.0 - cfg.alpha);
}

namespace detail {

constexpr double kZeroVarianceFloor = 1e-30;
constexpr double kCovarianceRegularization = 1e-12;

// Unbiased covariance of the trailing `count` columns.
template <typename Derived>
MatrixX<typename Derived::Scalar> trailing_covariance(
    const Eigen::MatrixBase<Derived>& errors, Eigen::Index count) {
  using Scalar = typename Derived::Scalar;
  const auto window = errors.rightCols(count);
  const VectorX<Scalar> mean = window.rowwise().mean();
  const MatrixX<Scalar> centered = window.colwise() - mean;
  return centered * centered.transpose() / Scalar(count - 1);
}

}  // namespace detail

/// g for a single output. `errors` is 1 x (tau_d + 1), oldest first.
/// `quantile` is F_inv_{tau_n, tau_d}(1 - alpha).
template <typename Derived>
double forgetting_statistic_scalar(const Eigen::MatrixBase<Derived>& errors,
                                   const ForgettingConfig& cfg,
                                   double quantile) {
  detail::require_dims(errors.rows() == 1 && errors.cols() >= cfg.tau_d + 1,
                       "forgetting_statistic_scalar: need 1 x (tau_d+1)");
  const double var_d =
      static_cast<double>(detail::trailing_covariance(errors, cfg.tau_d + 1)(0, 0));
  if (var_d < detail::kZeroVarianceFloor) return 0.0;
  const double var_n =
      static_cast<double>(detail::trailing_covariance(errors, cfg.tau_n + 1)(0, 0));
  return std::sqrt(var_n / var_d) - std::sqrt(quantile);
}

template <typename Derived>
double forgetting_statistic_scalar(const Eigen::MatrixBase<Derived>& errors,
                                   const ForgettingConfig& cfg) {
  return forgetting_statistic_scalar(errors, cfg, forgetting_quantile(cfg, 1));
}

/// g for p > 1 outputs. `errors` is p x (tau_d + 1), oldest first.
/// `quantile` is F_inv_{p tau_n, b}(1 - alpha).
template <typename Derived>
double forgetting_statistic_multivariable(
    const Eigen::MatrixBase<Derived>& errors, const ForgettingConfig& cfg,
    double quantile) {
  using Scalar = typename Derived::Scalar;
  const auto p = errors.rows();
  detail::require_dims(errors.cols() >= cfg.tau_d + 1,
                       "forgetting_statistic_multivariable: window too short");
  MatrixX<Scalar> sigma_d = detail::trailing_covariance(errors, cfg.tau_d + 1);
  if (static_cast<double>(sigma_d.determinant()) < detail::kZeroVarianceFloor)
    return 0.0;
  const MatrixX<Scalar> sigma_n =
      detail::trailing_covariance(errors, cfg.tau_n + 1);
  sigma_d.diagonal().array() += Scalar(detail::kCovarianceRegularization);
  Eigen::LLT<MatrixX<Scalar>> llt(sigma_d);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("forgetting statistic: singular long-window covariance");
  // tr(S_n S_d^{-1}) == tr(S_d^{-1} S_n)
  const double trace = static_cast<double>(llt.solve(sigma_n).trace());
  const auto k = multivariable_test_constants(cfg, static_cast<int>(p));
  const double ratio = cfg.tau_n / (k.c * cfg.tau_d) * trace;
  return std::sqrt(std::fmax(ratio, 0.0)) - std::sqrt(quantile);
}

template <typename Derived>
double forgetting_statistic_multivariable(
    const Eigen::MatrixBase<Derived>& errors, const ForgettingConfig& cfg) {
  return forgetting_statistic_multivariable(
      errors, cfg, forgetting_quantile(cfg, static_cast<int>(errors.rows())));
}

/// beta_k = 1 before the long window fills, 1 + eta max(g, 0) afterwards.
inline double compute_beta(double g, const ForgettingConfig& cfg, long step) {
  if (step < cfg.tau_d) return 1.0;
  return 1.0 + cfg.eta * (g > 0.0 ? g : 0.0);
}

template <typename Scalar>
struct RlsState {
  ArxParameters<Scalar> theta;
  MatrixX<Scalar> psi;
  // p x (tau_d + 1) a-priori errors, oldest first; only the trailing
  // `error_count` columns are populated.
  MatrixX<Scalar> error_window;
  int error_count = 0;
  long step = 0;
  double last_beta = 1.0;

  static RlsState initial(const ArxParameters<Scalar>& theta0,
                          const MatrixX<Scalar>& psi0,
                          const ForgettingConfig& cfg) {
    const int n = theta0.dims().param_count();
    detail::require_dims(psi0.rows() == n && psi0.cols() == n,
                         "RlsState: psi0 must be square of size len(theta)");
    if (Eigen::LLT<MatrixX<Scalar>>(psi0).info() != Eigen::Success)
      throw std::invalid_argument("RlsState: psi0 must be positive definite");
    RlsState s;
    s.theta = theta0;
    s.psi = psi0;
    s.error_window = MatrixX<Scalar>::Zero(theta0.dims().p, cfg.tau_d + 1);
    return s;
  }

  bool window_full() const { return error_count == error_window.cols(); }
};

/// Caches the F quantile for a fixed configuration and output count.
class ForgettingTest {
 public:
  ForgettingTest() = default;
  ForgettingTest(const ForgettingConfig& cfg, int p) : cfg_(cfg), p_(p) {
    cfg_.validate(p);
    quantile_ = forgetting_quantile(cfg_, p);
  }

  const ForgettingConfig& config() const { return cfg_; }
  int outputs() const { return p_; }
  double quantile() const { return quantile_; }

  template <typename Derived>
  double statistic(const Eigen::MatrixBase<Derived>& errors) const {
    return p_ == 1 ? forgetting_statistic_scalar(errors, cfg_, quantile_)
                   : forgetting_statistic_multivariable(errors, cfg_, quantile_);
  }

  /// beta_k given the window at step k (already holding e_k).
  template <typename Scalar>
  double beta(const RlsState<Scalar>& s) const {
    if (s.step < cfg_.tau_d || !s.window_full()) return 1.0;
    return compute_beta(statistic(s.error_window), cfg_, s.step);
  }

 private:
  ForgettingConfig cfg_;
  int p_ = 1;
  double quantile_ = 0.0;
};

/// One RLS step in place: logs e_k(theta_k), forms beta_k, then updates psi
/// and theta. Throws NumericalFailure if psi loses positive definiteness.
template <typename Scalar, typename DerivedPhi, typename DerivedY>
void rls_update_inplace(RlsState<Scalar>& s,
                        const Eigen::MatrixBase<DerivedPhi>& phi,
                        const Eigen::MatrixBase<DerivedY>& y,
                        const ForgettingTest& test) {
  const int p = s.theta.dims().p;
  const auto n = s.theta.vector().size();
  detail::require_dims(phi.rows() == p && phi.cols() == n && y.size() == p,
                       "rls_update: phi/y dims mismatch");

  const VectorX<Scalar> error = y - phi * s.theta.vector();

  auto& w = s.error_window;
  const auto cols = w.cols();
  w.leftCols(cols - 1) = w.rightCols(cols - 1).eval();
  w.col(cols - 1) = error;
  if (s.error_count < cols) ++s.error_count;

  const double beta = test.beta(s);
  const Scalar b(beta);

  const MatrixX<Scalar> phi_psi = phi * s.psi;  // p x n
  MatrixX<Scalar> gain_system = phi_psi * phi.transpose();
  gain_system.diagonal().array() += Scalar(1) / b;
  Eigen::LLT<MatrixX<Scalar>> llt(gain_system);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("rls_update: innovation covariance not positive definite");

  s.psi = b * (s.psi - phi_psi.transpose() * llt.solve(phi_psi));
  detail::symmetrize(s.psi);
  if (!s.psi.allFinite() ||
      Eigen::LLT<MatrixX<Scalar>>(s.psi).info() != Eigen::Success)
    throw NumericalFailure("rls_update: psi lost positive definiteness");

  s.theta.vector() += s.psi * (phi.transpose() * error);
  if (!s.theta.all_finite())
    throw NumericalFailure("rls_update: non-finite coefficient estimate");
  s.last_beta = beta;
  ++s.step;
}

template <typename Scalar, typename DerivedPhi, typename DerivedY>
RlsState<Scalar> rls_update(RlsState<Scalar> s,
                            const Eigen::MatrixBase<DerivedPhi>& phi,
                            const Eigen::MatrixBase<DerivedY>& y,
                            const ForgettingTest& test) {
  rls_update_inplace(s, phi, y, test);
  return s;
}

}  // namespace pcac
