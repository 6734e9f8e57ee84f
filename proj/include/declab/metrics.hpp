#pragma once
// Distance and fidelity toolbox.  Trace distance is the unnormalized
// ||rho - sigma||_1 (sum of singular values of the difference), so values
// range up to 2; every bound in this toolkit uses that convention.
// Logarithms are base 2 throughout.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

#include "declab/linalg.hpp"
#include "declab/state.hpp"

namespace declab {

inline double trace_norm(const MatrixXcd& x) {
  if (x.rows() > 256 || x.cols() > 256) {
    Eigen::BDCSVD<MatrixXcd> svd(x);
    return svd.singularValues().sum();
  }
  Eigen::JacobiSVD<MatrixXcd> svd(x);
  return svd.singularValues().sum();
}

inline double hs_norm_sq(const MatrixXcd& x) { return x.squaredNorm(); }

inline double purity(const DensityOperator& rho) { return rho.matrix().squaredNorm(); }

inline double trace_dist(const DensityOperator& a, const DensityOperator& b) {
  require_same_space(a.space(), b.space(), "trace_dist");
  return trace_norm(a.matrix() - b.matrix());
}

// ||a><a| - |b><b||_1 = 2 sqrt(1 - |<a|b>|^2) for normalized pure states.
inline double trace_dist_pure(const StateVector& a, const StateVector& b) {
  require_same_space(a.space(), b.space(), "trace_dist_pure");
  const double ov = std::norm(a.amplitudes().dot(b.amplitudes()));
  return 2.0 * std::sqrt(std::max(0.0, 1.0 - ov));
}

namespace detail {
// d x r factor M with rho = M M^dagger, keeping only eigenvalues above a
// relative cutoff.  Discarding the numerically-zero cluster (instead of
// clamping it) keeps sqrt(machine-eps) noise out of downstream trace norms.
inline MatrixXcd spectral_factor(const MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es((rho + rho.adjoint()) / 2.0);
  const VectorXd lam = es.eigenvalues();
  const double cut = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > cut) ++r;
  }
  MatrixXcd m(rho.rows(), std::max<Eigen::Index>(r, 1));
  m.setZero();
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > cut) m.col(j++) = std::sqrt(lam(i)) * es.eigenvectors().col(i);
  }
  return m;
}
}  // namespace detail

// F(rho, sigma) = (||sqrt(rho) sqrt(sigma)||_1)^2, evaluated on truncated
// spectral factors: F = (||M_rho^dagger M_sigma||_1)^2 for any factorizations
// rho = M M^dagger.  The factored form works on r x r' matrices and is exact
// for rank-deficient inputs where the naive square root loses accuracy.
inline double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  require_same_space(rho.space(), sigma.space(), "fidelity");
  const MatrixXcd a = detail::spectral_factor(rho.matrix());
  const MatrixXcd b = detail::spectral_factor(sigma.matrix());
  const double t = trace_norm(a.adjoint() * b);
  return t * t;
}

inline double fidelity_pure(const StateVector& phi, const DensityOperator& rho) {
  require_same_space(phi.space(), rho.space(), "fidelity_pure");
  return (phi.amplitudes().adjoint() * rho.matrix() * phi.amplitudes())(0).real();
}

inline double fidelity_pure(const StateVector& a, const StateVector& b) {
  require_same_space(a.space(), b.space(), "fidelity_pure");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// -sum lambda log2 lambda with 0 log 0 = 0; eigenvalues in [-1e-10, 0) clamp
// to 0, below that the operator is rejected.
inline double von_neumann_entropy(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho.matrix(), Eigen::EigenvaluesOnly);
  const VectorXd lam = clamp_spectrum(es.eigenvalues(), "von_neumann_entropy");
  double h = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > 0.0) h -= lam(i) * std::log2(lam(i));
  }
  return h;
}

inline double entropy_of_spectrum(const VectorXd& lam) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > 0.0) h -= lam(i) * std::log2(lam(i));
  }
  return h;
}

}  // namespace declab
