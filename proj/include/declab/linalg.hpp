#pragma once
// Deterministic spectral helpers: canonical eigensystems (nonincreasing
// eigenvalues, phase-fixed eigenvectors) and PSD square roots with the
// global clamping policy.

#include <Eigen/Dense>
#include <cmath>

#include "declab/common.hpp"
#include "declab/state.hpp"

namespace declab {

struct EigenSystem {
  VectorXd values;   // nonincreasing
  MatrixXcd vectors;  // columns; first component of magnitude > phase threshold made real positive
};

namespace detail {
inline void fix_column_phases(MatrixXcd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double a = std::abs(m(i, j));
      if (a > 1e-8) {
        m.col(j) *= std::conj(m(i, j)) / a;
        break;
      }
    }
  }
}
}  // namespace detail

// Eigen-decomposition of a Hermitian matrix with the canonical ordering and
// phase convention used everywhere (purifications, typical projectors, ...).
inline EigenSystem canonical_eigensystem(const MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es((h + h.adjoint()) / 2.0);
  if (es.info() != Eigen::Success) throw InvariantError("eigensolver failed to converge");
  const Eigen::Index d = h.rows();
  EigenSystem out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  (void)d;
  detail::fix_column_phases(out.vectors);
  return out;
}

// Clamp policy for spectra of nominally-PSD matrices: [-1e-10, 0) -> 0,
// reject below -1e-10.
inline VectorXd clamp_spectrum(const VectorXd& values, const char* what) {
  VectorXd v = values;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) < tol::eig_floor) {
      throw ValidationError(std::string(what) + ": eigenvalue " + std::to_string(v(i)) +
                            " below -1e-10");
    }
    if (v(i) < 0.0) v(i) = 0.0;
  }
  return v;
}

inline MatrixXcd matrix_sqrt_psd(const MatrixXcd& h) {
  EigenSystem es = canonical_eigensystem(h);
  VectorXd lam = clamp_spectrum(es.values, "matrix_sqrt_psd");
  return es.vectors * lam.cwiseSqrt().asDiagonal() * es.vectors.adjoint();
}

}  // namespace declab
