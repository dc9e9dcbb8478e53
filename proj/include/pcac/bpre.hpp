#pragma once

// Receding-horizon optimization with the backward-propagating Riccati
// equation. Only P_{k|2} and the first-step gain are materialized.

#include "pcac/common.hpp"

namespace pcac {

template <typename Scalar>
struct HorizonWeights {
  int ell = 20;
  MatrixX<Scalar> R1;          // state weight, E1^T E1
  MatrixX<Scalar> R2;          // control weight, positive definite
  MatrixX<Scalar> P_terminal;  // P_{ell+1}
  MatrixX<Scalar> E1;          // performance map, z = E1 x

  /// Weights with R1 = E1^T E1.
  static HorizonWeights from_performance_map(int ell, MatrixX<Scalar> E1,
                                             MatrixX<Scalar> R2,
                                             MatrixX<Scalar> P_terminal) {
    HorizonWeights w;
    w.ell = ell;
    w.R1 = E1.transpose() * E1;
    w.E1 = std::move(E1);
    w.R2 = std::move(R2);
    w.P_terminal = std::move(P_terminal);
    w.validate();
    return w;
  }

  /// R1 = diag(1, 0, .., 0), E1 = [1 0 .. 0] (first output only),
  /// P_{ell+1} = R1, R2 = r2 I_m.
  static HorizonWeights first_output(int ell, int state_dim, int p, int m,
                                     Scalar r2) {
    MatrixX<Scalar> E1 = MatrixX<Scalar>::Zero(p, state_dim);
    E1(0, 0) = Scalar(1);
    MatrixX<Scalar> P = MatrixX<Scalar>::Zero(state_dim, state_dim);
    P(0, 0) = Scalar(1);
    return from_performance_map(ell, std::move(E1),
                                r2 * MatrixX<Scalar>::Identity(m, m),
                                std::move(P));
  }

  int state_dim() const { return static_cast<int>(R1.rows()); }

  void validate() const {
    if (ell < 1) throw std::invalid_argument("HorizonWeights: ell < 1");
    const auto n = R1.rows();
    detail::require_dims(R1.cols() == n && P_terminal.rows() == n &&
                             P_terminal.cols() == n && R2.rows() == R2.cols(),
                         "HorizonWeights: inconsistent weight sizes");
    if (Eigen::LLT<MatrixX<Scalar>>(R2).info() != Eigen::Success)
      throw std::invalid_argument("HorizonWeights: R2 not positive definite");
    auto psd = [](const MatrixX<Scalar>& m) {
      if (!m.isApprox(m.transpose(), 1e-12) && !m.isZero()) return false;
      Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(m, Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff() >= -1e-12 * std::max<Scalar>(Scalar(1), m.norm());
    };
    if (!psd(R1)) throw std::invalid_argument("HorizonWeights: R1 not PSD");
    if (!psd(P_terminal))
      throw std::invalid_argument("HorizonWeights: P_terminal not PSD");
    if (E1.size() != 0) {
      detail::require_dims(E1.cols() == n, "HorizonWeights: E1 width");
      if (((E1.transpose() * E1) - R1).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("HorizonWeights: E1^T E1 != R1");
    }
  }
};

template <typename Scalar>
struct SaturationBounds {
  VectorX<Scalar> u_min;
  VectorX<Scalar> u_max;

  static SaturationBounds symmetric(int m, Scalar limit) {
    return {VectorX<Scalar>::Constant(m, -limit),
            VectorX<Scalar>::Constant(m, limit)};
  }

  void validate() const {
    detail::require_dims(u_min.size() == u_max.size(),
                         "SaturationBounds: size mismatch");
    if ((u_min.array() > u_max.array()).any())
      throw std::invalid_argument("SaturationBounds: u_min > u_max");
  }
};

namespace detail {

constexpr double kMaxConditionEstimate = 1e12;

// Factorization of R2 + B^T P B, rejecting near-singular systems.
template <typename Scalar>
Eigen::LLT<MatrixX<Scalar>> control_weight_factor(const MatrixX<Scalar>& B,
                                                  const MatrixX<Scalar>& R2,
                                                  const MatrixX<Scalar>& P) {
  MatrixX<Scalar> M = R2 + B.transpose() * P * B;
  symmetrize(M);
  Eigen::LLT<MatrixX<Scalar>> llt(M);
  if (llt.info() != Eigen::Success || !M.allFinite())
    throw NumericalFailure("riccati: R2 + B^T P B not positive definite");
  if (static_cast<double>(llt.rcond()) * kMaxConditionEstimate < 1.0)
    throw NumericalFailure("riccati: R2 + B^T P B ill-conditioned");
  return llt;
}

}  // namespace detail

/// Sweeps P_j = A^T P_{j+1} (A - B Gamma_j) + R1 from P_{ell+1} down to P_2.
template <typename Scalar>
MatrixX<Scalar> riccati_backward(const MatrixX<Scalar>& A,
                                 const MatrixX<Scalar>& B,
                                 const HorizonWeights<Scalar>& w) {
  const auto n = A.rows();
  detail::require_dims(A.cols() == n && B.rows() == n &&
                           w.R1.rows() == n && w.R2.rows() == B.cols(),
                       "riccati_backward: dims mismatch");
  MatrixX<Scalar> P = w.P_terminal;
  MatrixX<Scalar> PA(n, n);
  MatrixX<Scalar> PB(n, B.cols());
  for (int j = w.ell; j >= 2; --j) {
    const auto llt = detail::control_weight_factor(B, w.R2, P);
    PA.noalias() = P * A;
    PB.noalias() = P * B;
    // Gamma_j = (R2 + B^T P B)^{-1} B^T P A
    const MatrixX<Scalar> gamma = llt.solve(PB.transpose() * A);
    MatrixX<Scalar> next = w.R1;
    next.noalias() += A.transpose() * PA;
    next.noalias() -= (A.transpose() * PB) * gamma;
    detail::symmetrize(next);
    P.swap(next);
  }
  return P;
}

/// K = -(R2 + B^T P_2 B)^{-1} B^T P_2 A.
template <typename Scalar>
MatrixX<Scalar> control_gain(const MatrixX<Scalar>& A, const MatrixX<Scalar>& B,
                             const MatrixX<Scalar>& R2,
                             const MatrixX<Scalar>& P2) {
  const auto llt = detail::control_weight_factor(B, R2, P2);
  return -llt.solve(B.transpose() * P2 * A);
}

template <typename Scalar, typename Derived>
VectorX<Scalar> saturate(const Eigen::MatrixBase<Derived>& u_req,
                         const SaturationBounds<Scalar>& b) {
  detail::require_dims(u_req.size() == b.u_min.size(),
                       "saturate: size mismatch");
  return u_req.cwiseMax(b.u_min).cwiseMin(b.u_max);
}

}  // namespace pcac
