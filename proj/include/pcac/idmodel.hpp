#pragma once

// ARX input-output model: regressor, one-step prediction and the block
// observable canonical form (BOCF) realization whose state is an explicit
// function of past data and the coefficient estimate.
//
// Coefficient layout: theta = [vec[F_1 .. F_n]; vec[G_1 .. G_n]], with
// F_i in R^{p x p} and G_i in R^{p x m}, column-major vec.

#include <cstddef>
#include <vector>

#include "pcac/common.hpp"

namespace pcac {

struct ModelDims {
  int n_hat = 1;  // model order
  int p = 1;      // outputs
  int m = 1;      // inputs

  int param_count() const { return n_hat * p * (m + p); }
  int state_dim() const { return n_hat * p; }

  void validate() const {
    if (n_hat < 1 || p < 1 || m < 1)
      throw std::invalid_argument("ModelDims: n_hat, p and m must be >= 1");
  }

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Stacked ARX coefficient estimate with block views onto F_i and G_i.
template <typename Scalar>
class ArxParameters {
 public:
  using Vector = VectorX<Scalar>;
  using ConstBlock = Eigen::Map<const MatrixX<Scalar>>;
  using Block = Eigen::Map<MatrixX<Scalar>>;

  ArxParameters() = default;

  explicit ArxParameters(const ModelDims& dims)
      : dims_(dims), theta_(Vector::Zero(dims.param_count())) {
    dims_.validate();
  }

  ArxParameters(const ModelDims& dims, Vector theta)
      : dims_(dims), theta_(std::move(theta)) {
    dims_.validate();
    detail::require_dims(theta_.size() == dims_.param_count(),
                         "ArxParameters: theta length != n_hat*p*(m+p)");
  }

  static ArxParameters Constant(const ModelDims& dims, Scalar value) {
    return ArxParameters(dims, Vector::Constant(dims.param_count(), value));
  }

  const ModelDims& dims() const { return dims_; }
  const Vector& vector() const { return theta_; }
  Vector& vector() { return theta_; }

  /// F_i for i in [1, n_hat].
  ConstBlock F(int i) const {
    return ConstBlock(theta_.data() + f_offset(i), dims_.p, dims_.p);
  }
  Block F(int i) {
    return Block(theta_.data() + f_offset(i), dims_.p, dims_.p);
  }

  /// G_i for i in [1, n_hat].
  ConstBlock G(int i) const {
    return ConstBlock(theta_.data() + g_offset(i), dims_.p, dims_.m);
  }
  Block G(int i) {
    return Block(theta_.data() + g_offset(i), dims_.p, dims_.m);
  }

  auto theta_F() const { return theta_.head(dims_.n_hat * dims_.p * dims_.p); }
  auto theta_G() const { return theta_.tail(dims_.n_hat * dims_.p * dims_.m); }

  bool all_finite() const { return theta_.allFinite(); }

 private:
  std::ptrdiff_t f_offset(int i) const {
    check_index(i);
    return static_cast<std::ptrdiff_t>(i - 1) * dims_.p * dims_.p;
  }
  std::ptrdiff_t g_offset(int i) const {
    check_index(i);
    return static_cast<std::ptrdiff_t>(dims_.n_hat) * dims_.p * dims_.p +
           static_cast<std::ptrdiff_t>(i - 1) * dims_.p * dims_.m;
  }
  void check_index(int i) const {
    if (i < 1 || i > dims_.n_hat)
      throw std::out_of_range("ArxParameters: block index out of range");
  }

  ModelDims dims_;
  Vector theta_;
};

/// Fixed-capacity record of the last n_hat outputs and inputs. Entries before
/// the first push read as zero.
template <typename Scalar>
class IoHistory {
 public:
  using Vector = VectorX<Scalar>;

  IoHistory() = default;

  explicit IoHistory(const ModelDims& dims) : dims_(dims) {
    dims_.validate();
    ys_.assign(dims_.n_hat, Vector::Zero(dims_.p));
    us_.assign(dims_.n_hat, Vector::Zero(dims_.m));
  }

  const ModelDims& dims() const { return dims_; }

  /// y_{k-i}, i in [1, n_hat], where k is the step following the last push.
  const Vector& y(int i) const { return ys_[slot(i)]; }
  /// u_{k-i}, i in [1, n_hat].
  const Vector& u(int i) const { return us_[slot(i)]; }

  /// Records (y_k, u_k); afterwards y(1) == y_k and u(1) == u_k.
  template <typename DerivedY, typename DerivedU>
  void push(const Eigen::MatrixBase<DerivedY>& y_k,
            const Eigen::MatrixBase<DerivedU>& u_k) {
    detail::require_dims(y_k.size() == dims_.p && u_k.size() == dims_.m,
                         "IoHistory::push: sample size mismatch");
    head_ = (head_ + 1) % dims_.n_hat;
    ys_[head_] = y_k;
    us_[head_] = u_k;
  }

 private:
  std::size_t slot(int i) const {
    if (i < 1 || i > dims_.n_hat)
      throw std::out_of_range("IoHistory: lag out of range");
    const int n = dims_.n_hat;
    return static_cast<std::size_t>(((head_ - (i - 1)) % n + n) % n);
  }

  ModelDims dims_;
  std::vector<Vector> ys_;
  std::vector<Vector> us_;
  int head_ = 0;
};

/// phi_k = [-y_{k-1}^T .. -y_{k-n}^T  u_{k-1}^T .. u_{k-n}^T] (x) I_p.
template <typename Scalar>
MatrixX<Scalar> build_regressor(const IoHistory<Scalar>& history,
                                const ModelDims& dims) {
  detail::require_dims(history.dims() == dims,
                       "build_regressor: history dims mismatch");
  const int p = dims.p;
  MatrixX<Scalar> phi = MatrixX<Scalar>::Zero(p, dims.param_count());
  const auto identity = MatrixX<Scalar>::Identity(p, p);
  int col = 0;
  for (int i = 1; i <= dims.n_hat; ++i) {
    const auto& y = history.y(i);
    for (int c = 0; c < p; ++c, col += p)
      phi.block(0, col, p, p) = -y(c) * identity;
  }
  for (int i = 1; i <= dims.n_hat; ++i) {
    const auto& u = history.u(i);
    for (int c = 0; c < dims.m; ++c, col += p)
      phi.block(0, col, p, p) = u(c) * identity;
  }
  return phi;
}

template <typename Scalar, typename Derived>
VectorX<Scalar> predict_output(const ArxParameters<Scalar>& theta,
                               const Eigen::MatrixBase<Derived>& phi) {
  detail::require_dims(phi.cols() == theta.vector().size(),
                       "predict_output: regressor width != theta length");
  return phi * theta.vector();
}

template <typename Scalar>
struct BocfRealization {
  MatrixX<Scalar> A;  // n p x n p block companion
  MatrixX<Scalar> B;  // n p x m
  MatrixX<Scalar> C;  // p x n p, [I 0 .. 0]
  VectorX<Scalar> x;  // explicit state, blocks x(1) .. x(n)
};

/// A, B, C of the BOCF built from the step-(k+1) estimate. The returned
/// realization has an empty state; see compute_bocf_state.
template <typename Scalar>
BocfRealization<Scalar> assemble_bocf(const ArxParameters<Scalar>& theta_next) {
  const ModelDims& d = theta_next.dims();
  const int n = d.state_dim();
  const int p = d.p;
  BocfRealization<Scalar> r;
  r.A = MatrixX<Scalar>::Zero(n, n);
  r.B = MatrixX<Scalar>(n, d.m);
  r.C = MatrixX<Scalar>::Zero(p, n);
  for (int i = 1; i <= d.n_hat; ++i) {
    const int row = (i - 1) * p;
    r.A.block(row, 0, p, p) = -theta_next.F(i);
    if (i < d.n_hat) r.A.block(row, i * p, p, p).setIdentity();
    r.B.block(row, 0, p, d.m) = theta_next.G(i);
  }
  r.C.leftCols(p).setIdentity();
  return r;
}

/// x_{m,k}: block 1 is y_k, block j >= 2 is
///   sum_{i=1}^{n-j+1} ( -F_{i+j-1} y_{k-i} + G_{i+j-1} u_{k-i} ).
template <typename Scalar, typename Derived>
VectorX<Scalar> compute_bocf_state(const IoHistory<Scalar>& history,
                                   const Eigen::MatrixBase<Derived>& y_now,
                                   const ArxParameters<Scalar>& theta_next) {
  const ModelDims& d = theta_next.dims();
  detail::require_dims(history.dims() == d && y_now.size() == d.p,
                       "compute_bocf_state: dims mismatch");
  const int p = d.p;
  VectorX<Scalar> x = VectorX<Scalar>::Zero(d.state_dim());
  x.head(p) = y_now;
  for (int j = 2; j <= d.n_hat; ++j) {
    auto block = x.segment((j - 1) * p, p);
    for (int i = 1; i <= d.n_hat - j + 1; ++i) {
      block.noalias() -= theta_next.F(i + j - 1) * history.y(i);
      block.noalias() += theta_next.G(i + j - 1) * history.u(i);
    }
  }
  return x;
}

/// Convenience: realization plus its state in one call.
template <typename Scalar, typename Derived>
BocfRealization<Scalar> realize(const IoHistory<Scalar>& history,
                                const Eigen::MatrixBase<Derived>& y_now,
                                const ArxParameters<Scalar>& theta_next) {
  auto r = assemble_bocf(theta_next);
  r.x = compute_bocf_state(history, y_now, theta_next);
  return r;
}

}  // namespace pcac
