#pragma once
// Pure states, density operators, and rectangular operators over labeled
// tensor spaces.  All values are immutable after construction and validated
// on construction; violations throw.

#include <Eigen/Dense>
#include <complex>
#include <utility>

#include "declab/common.hpp"
#include "declab/tensor_space.hpp"

namespace declab {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

class StateVector {
 public:
  StateVector(TensorSpace space, VectorXcd amplitudes, bool subnormalized = false)
      : space_(std::move(space)), amp_(std::move(amplitudes)), subnormalized_(subnormalized) {
    if (amp_.size() != space_.total_dim()) {
      throw DimensionError("state vector length " + std::to_string(amp_.size()) +
                           " does not match space " + space_.describe());
    }
    const double n = amp_.norm();
    if (subnormalized_) {
      if (n > 1.0 + tol::norm) throw ValidationError("subnormalized state has norm " + std::to_string(n));
    } else if (std::abs(n - 1.0) > tol::norm) {
      throw ValidationError("state norm " + std::to_string(n) + " deviates from 1 beyond 1e-12");
    }
  }

  const TensorSpace& space() const { return space_; }
  const VectorXcd& amplitudes() const { return amp_; }
  double norm() const { return amp_.norm(); }
  bool subnormalized() const { return subnormalized_; }

 private:
  TensorSpace space_;
  VectorXcd amp_;
  bool subnormalized_;
};

namespace detail {
// Cheap lower bound on the minimum eigenvalue of a Hermitian matrix:
// exact for diagonal matrices, eigenvalues-only solve otherwise.
inline double min_eigenvalue(const MatrixXcd& m) {
  bool diagonal = true;
  for (Eigen::Index j = 0; j < m.cols() && diagonal; ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i != j && std::abs(m(i, j)) != 0.0) {
        diagonal = false;
        break;
      }
    }
  }
  if (diagonal) return m.diagonal().real().minCoeff();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}
}  // namespace detail

class DensityOperator {
 public:
  DensityOperator(TensorSpace space, MatrixXcd matrix, bool subnormalized = false,
                  double trace_tol = tol::trace)
      : space_(std::move(space)), mat_(std::move(matrix)), subnormalized_(subnormalized) {
    if (mat_.rows() != space_.total_dim() || mat_.cols() != space_.total_dim()) {
      throw DimensionError("density matrix shape does not match space " + space_.describe());
    }
    const double herm_dev = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
    if (herm_dev > tol::herm) {
      throw ValidationError("density operator hermiticity deviation " + std::to_string(herm_dev));
    }
    mat_ = ((mat_ + mat_.adjoint()) / 2.0).eval();  // symmetrize away float-level noise
    const double tr = mat_.trace().real();
    if (subnormalized_) {
      if (tr > 1.0 + trace_tol || tr < -trace_tol) {
        throw ValidationError("subnormalized trace " + std::to_string(tr) + " outside [0, 1]");
      }
    } else if (std::abs(tr - 1.0) > trace_tol) {
      throw ValidationError("density operator trace " + std::to_string(tr) + " deviates from 1");
    }
    const double lo = detail::min_eigenvalue(mat_);
    if (lo < tol::eig_floor) {
      throw ValidationError("density operator has eigenvalue " + std::to_string(lo) + " below -1e-10");
    }
  }

  const TensorSpace& space() const { return space_; }
  const MatrixXcd& matrix() const { return mat_; }
  double trace() const { return mat_.trace().real(); }
  bool subnormalized() const { return subnormalized_; }
  std::int64_t dim() const { return space_.total_dim(); }

  static DensityOperator maximally_mixed(TensorSpace space) {
    const auto d = space.total_dim();
    return DensityOperator(std::move(space), MatrixXcd::Identity(d, d) / static_cast<double>(d));
  }

 private:
  TensorSpace space_;
  MatrixXcd mat_;
  bool subnormalized_;
};

class LinearOp {
 public:
  LinearOp(TensorSpace in_space, TensorSpace out_space, MatrixXcd matrix)
      : in_(std::move(in_space)), out_(std::move(out_space)), mat_(std::move(matrix)) {
    if (mat_.cols() != in_.total_dim() || mat_.rows() != out_.total_dim()) {
      throw DimensionError("operator shape (" + std::to_string(mat_.rows()) + "x" +
                           std::to_string(mat_.cols()) + ") does not match spaces " +
                           out_.describe() + " <- " + in_.describe());
    }
  }

  const TensorSpace& in_space() const { return in_; }
  const TensorSpace& out_space() const { return out_; }
  const MatrixXcd& matrix() const { return mat_; }

  double isometry_defect() const {
    const auto d = in_.total_dim();
    return (mat_.adjoint() * mat_ - MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
  }

  bool is_isometry(double tolerance = tol::op_check) const { return isometry_defect() <= tolerance; }

  void require_isometry(double tolerance = tol::op_check) const {
    const double d = isometry_defect();
    if (d > tolerance) throw ValidationError("operator is not an isometry (defect " + std::to_string(d) + ")");
  }

 private:
  TensorSpace in_, out_;
  MatrixXcd mat_;
};

}  // namespace declab
