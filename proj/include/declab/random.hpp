#pragma once
// Reproducible sampling: Haar-random unitaries/isometries/states, the Weyl
// (generalized Pauli) unitary family, and the single-/two-qubit Clifford
// groups (exact unitary 2-designs), plus two-copy twirling helpers.
//
// Note on designs: the Weyl family {X^a Z^b} is a 1-design but NOT a
// 2-design -- its two-copy twirl projects onto span{W (x) W^dagger}, which
// strictly contains span{I, F}.  Exact finite 2-design averages here use the
// Clifford groups; Haar second moments have a closed Schur projection.

#include <Eigen/Dense>
#include <cstring>
#include <map>
#include <unordered_set>
#include <vector>

#include "declab/common.hpp"
#include "declab/seeding.hpp"
#include "declab/state.hpp"
#include "declab/tensor_ops.hpp"

namespace declab {

// ---------- Gaussian ensembles ----------

inline MatrixXcd ginibre(Eigen::Index rows, Eigen::Index cols, Prng& rng) {
  MatrixXcd g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      g(i, j) = Complex(rng.gaussian(), rng.gaussian()) / std::sqrt(2.0);
    }
  }
  return g;
}

// Haar unitary via QR of a Ginibre matrix.  The phase fix (triangular factor
// with positive real diagonal) is required for the distribution to be Haar.
inline MatrixXcd haar_unitary(Eigen::Index d, Prng& rng) {
  if (d < 1) throw DimensionError("haar_unitary requires d >= 1");
  const MatrixXcd g = ginibre(d, d, rng);
  Eigen::HouseholderQR<MatrixXcd> qr(g);
  MatrixXcd q = qr.householderQ();
  const MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    const Complex rjj = r(j, j);
    const double a = std::abs(rjj);
    q.col(j) *= (a > 0.0) ? (rjj / a) : Complex(1.0, 0.0);
  }
  return q;
}

inline MatrixXcd haar_unitary(Eigen::Index d, SeededSource src) {
  Prng rng(src);
  return haar_unitary(d, rng);
}

// Haar-distributed isometry (d_out x d_in, d_out >= d_in) via thin QR.
inline MatrixXcd haar_isometry(Eigen::Index d_in, Eigen::Index d_out, Prng& rng) {
  if (d_out < d_in) throw DimensionError("haar_isometry requires d_out >= d_in");
  const MatrixXcd g = ginibre(d_out, d_in, rng);
  Eigen::HouseholderQR<MatrixXcd> qr(g);
  MatrixXcd q = MatrixXcd(qr.householderQ()).leftCols(d_in);
  const MatrixXcd r = qr.matrixQR().topRows(d_in).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d_in; ++j) {
    const Complex rjj = r(j, j);
    const double a = std::abs(rjj);
    q.col(j) *= (a > 0.0) ? (rjj / a) : Complex(1.0, 0.0);
  }
  return q;
}

// ---------- Random states ----------

inline StateVector random_state(TensorSpace space, Prng& rng) {
  VectorXcd v(space.total_dim());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = Complex(rng.gaussian(), rng.gaussian());
  }
  v.normalize();
  return StateVector(std::move(space), std::move(v));
}

inline DensityOperator random_density(TensorSpace space, Eigen::Index rank, Prng& rng) {
  const Eigen::Index d = space.total_dim();
  if (rank < 1 || rank > d) throw DimensionError("random_density rank out of range");
  const MatrixXcd m = ginibre(d, rank, rng);
  MatrixXcd rho = m * m.adjoint();
  rho /= rho.trace().real();
  return DensityOperator(std::move(space), std::move(rho));
}

// ---------- Weyl (generalized Pauli) unitaries ----------

// {X^a Z^b : a,b in [0,d)} with X the cyclic shift and Z = diag(omega^k).
// Ordered a-major; all unitary and pairwise Hilbert-Schmidt orthogonal.
inline std::vector<MatrixXcd> weyl_unitaries(Eigen::Index d) {
  if (d < 1) throw DimensionError("weyl_unitaries requires d >= 1");
  MatrixXcd x = MatrixXcd::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) x((j + 1) % d, j) = 1.0;
  MatrixXcd z = MatrixXcd::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double th = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(d);
    z(k, k) = Complex(std::cos(th), std::sin(th));
  }
  std::vector<MatrixXcd> out;
  out.reserve(static_cast<size_t>(d * d));
  MatrixXcd xa = MatrixXcd::Identity(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    MatrixXcd w = xa;
    for (Eigen::Index b = 0; b < d; ++b) {
      out.push_back(w);
      w = w * z;
    }
    xa = x * xa;
  }
  return out;
}

// ---------- Clifford groups (exact 2-designs for d = 2 and d = 4) ----------

namespace detail {

inline std::string canonical_unitary_key(MatrixXcd m) {
  // Normalize the global phase by the first entry of significant magnitude,
  // then snap to an integer grid.  The grid maps -0.0 to 0.
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    bool done = false;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double a = std::abs(m(i, j));
      if (a > 1e-6) {
        m *= std::conj(m(i, j)) / a;
        done = true;
        break;
      }
    }
    if (done) break;
  }
  std::string key(static_cast<size_t>(m.size()) * 2 * sizeof(std::int64_t), '\0');
  char* p = key.data();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const std::int64_t re = std::llround(m(i, j).real() * 1048576.0);
      const std::int64_t im = std::llround(m(i, j).imag() * 1048576.0);
      std::memcpy(p, &re, sizeof(re));
      p += sizeof(re);
      std::memcpy(p, &im, sizeof(im));
      p += sizeof(im);
    }
  }
  return key;
}

inline MatrixXcd canonical_phase(MatrixXcd m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double a = std::abs(m(i, j));
      if (a > 1e-6) {
        m *= std::conj(m(i, j)) / a;
        return m;
      }
    }
  }
  return m;
}

inline std::vector<MatrixXcd> closure_mod_phase(const std::vector<MatrixXcd>& generators,
                                                Eigen::Index d, size_t expected) {
  std::unordered_set<std::string> seen;
  std::vector<MatrixXcd> elements;
  std::vector<MatrixXcd> frontier;
  MatrixXcd id = MatrixXcd::Identity(d, d);
  seen.insert(canonical_unitary_key(id));
  elements.push_back(canonical_phase(id));
  frontier.push_back(elements.back());
  while (!frontier.empty()) {
    std::vector<MatrixXcd> next;
    for (const MatrixXcd& u : frontier) {
      for (const MatrixXcd& g : generators) {
        MatrixXcd v = canonical_phase(g * u);
        std::string key = canonical_unitary_key(v);
        if (seen.insert(std::move(key)).second) {
          elements.push_back(v);
          next.push_back(v);
          if (expected != 0 && elements.size() > expected) {
            throw InvariantError("group closure exceeded expected size");
          }
        }
      }
    }
    frontier = std::move(next);
  }
  if (expected != 0 && elements.size() != expected) {
    throw InvariantError("group closure size " + std::to_string(elements.size()) +
                         " != expected " + std::to_string(expected));
  }
  return elements;
}

}  // namespace detail

// Clifford group mod global phase: 24 elements at d=2, 11520 at d=4.
// Both are exact unitary 2-designs.
inline const std::vector<MatrixXcd>& clifford_group(Eigen::Index d) {
  static const std::vector<MatrixXcd> c2 = [] {
    const double s = 1.0 / std::sqrt(2.0);
    MatrixXcd h(2, 2), p(2, 2);
    h << s, s, s, -s;
    p << 1.0, 0.0, 0.0, Complex(0.0, 1.0);
    return detail::closure_mod_phase({h, p}, 2, 24);
  }();
  static const std::vector<MatrixXcd> c4 = [] {
    const double s = 1.0 / std::sqrt(2.0);
    MatrixXcd h(2, 2), p(2, 2), id2 = MatrixXcd::Identity(2, 2);
    h << s, s, s, -s;
    p << 1.0, 0.0, 0.0, Complex(0.0, 1.0);
    MatrixXcd cz = MatrixXcd::Identity(4, 4);
    cz(3, 3) = -1.0;
    return detail::closure_mod_phase({kron(h, id2), kron(id2, h), kron(p, id2), kron(id2, p), cz},
                                     4, 11520);
  }();
  if (d == 2) return c2;
  if (d == 4) return c4;
  throw DimensionError("clifford_group is available for d = 2 and d = 4 only");
}

// ---------- Two-copy twirls ----------

// (1/|set|) sum_W (W (x) W)^dagger M (W (x) W).
inline MatrixXcd twirl_two_copy(const MatrixXcd& m, const std::vector<MatrixXcd>& set) {
  if (set.empty()) throw DimensionError("empty unitary set");
  const Eigen::Index d = set.front().rows();
  if (m.rows() != d * d || m.cols() != d * d) {
    throw DimensionError("twirl_two_copy expects a two-copy operator");
  }
  MatrixXcd acc = MatrixXcd::Zero(d * d, d * d);
  for (const MatrixXcd& w : set) {
    const MatrixXcd ww = kron(w, w);
    acc += ww.adjoint() * m * ww;
  }
  return acc / static_cast<double>(set.size());
}

struct SchurProjection {
  double c_identity;  // coefficient of I
  double c_swap;      // coefficient of F
  double residual;    // Hilbert-Schmidt norm of M - (cI I + cF F)
  Complex c_identity_complex;
  Complex c_swap_complex;
};

// Least-squares projection onto span{I, F} on a two-copy space of local
// dimension d; this equals the exact Haar average of the two-copy twirl.
inline SchurProjection twirl_schur_project(const MatrixXcd& m) {
  const Eigen::Index dd = m.rows();
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(dd))));
  if (d * d != dd || m.cols() != dd) throw DimensionError("two-copy operator expected");
  MatrixXcd f = MatrixXcd::Zero(dd, dd);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) f(j * d + i, i * d + j) = 1.0;
  }
  // Gram matrix of {I, F}: <I,I> = d^2, <I,F> = d, <F,F> = d^2.
  const Complex mi = m.trace();
  const Complex mf = (f.adjoint() * m).trace();
  const double g11 = static_cast<double>(dd);
  const double g12 = static_cast<double>(d);
  const double det = g11 * g11 - g12 * g12;
  const Complex ci = (g11 * mi - g12 * mf) / det;
  const Complex cf = (g11 * mf - g12 * mi) / det;
  const MatrixXcd res = m - ci * MatrixXcd::Identity(dd, dd) - cf * f;
  return SchurProjection{ci.real(), cf.real(), std::sqrt(res.squaredNorm()), ci, cf};
}

// The Weyl two-copy twirl equals the orthogonal projection onto the
// commutant span{W_v (x) W_v^dagger}; used to test the family's true
// averaging behavior.
inline MatrixXcd weyl_commutant_project(const MatrixXcd& m, Eigen::Index d) {
  if (m.rows() != d * d || m.cols() != d * d) throw DimensionError("two-copy operator expected");
  MatrixXcd out = MatrixXcd::Zero(d * d, d * d);
  for (const MatrixXcd& w : weyl_unitaries(d)) {
    const MatrixXcd basis = kron(w, w.adjoint());
    const Complex coeff = (basis.adjoint() * m).trace() / static_cast<double>(d * d);
    out += coeff * basis;
  }
  return out;
}

}  // namespace declab
