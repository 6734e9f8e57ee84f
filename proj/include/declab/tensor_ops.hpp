#pragma once
// Labeled tensor-product plumbing: Kronecker products, factor permutations,
// partial traces, Schmidt decomposition, purification, and applying operators
// to selected factors.  All permutations go through explicit index maps
// computed from the factor lists.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <string>
#include <vector>

#include "declab/common.hpp"
#include "declab/linalg.hpp"
#include "declab/state.hpp"
#include "declab/tensor_space.hpp"

namespace declab {

using RowMajorMatrixXcd = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ---------- Kronecker products ----------

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline VectorXcd kron(const VectorXcd& a, const VectorXcd& b) {
  VectorXcd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  return StateVector(a.space().tensor_with(b.space()), kron(a.amplitudes(), b.amplitudes()),
                     a.subnormalized() || b.subnormalized());
}

inline DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  return DensityOperator(a.space().tensor_with(b.space()), kron(a.matrix(), b.matrix()),
                         a.subnormalized() || b.subnormalized());
}

inline LinearOp tensor(const LinearOp& a, const LinearOp& b) {
  return LinearOp(a.in_space().tensor_with(b.in_space()), a.out_space().tensor_with(b.out_space()),
                  kron(a.matrix(), b.matrix()));
}

// ---------- Factor permutations ----------

// perm[k] = position in `space` of the k-th factor of the permuted space.
// Returns map with map[new_linear_index] = old_linear_index.
inline std::vector<std::int64_t> permutation_index_map(const TensorSpace& space,
                                                       const std::vector<int>& perm) {
  const int m = space.num_factors();
  if (static_cast<int>(perm.size()) != m) throw DimensionError("permutation size mismatch");
  std::vector<bool> seen(static_cast<size_t>(m), false);
  for (int p : perm) {
    if (p < 0 || p >= m || seen[static_cast<size_t>(p)]) throw DimensionError("invalid factor permutation");
    seen[static_cast<size_t>(p)] = true;
  }
  const std::vector<std::int64_t> old_strides = space.strides();
  std::vector<std::int64_t> new_dims(perm.size());
  for (size_t k = 0; k < perm.size(); ++k) new_dims[k] = space.factor(perm[k]).dim;

  std::vector<std::int64_t> map(static_cast<size_t>(space.total_dim()));
  std::vector<std::int64_t> multi(perm.size(), 0);
  for (std::int64_t idx = 0; idx < space.total_dim(); ++idx) {
    std::int64_t old_idx = 0;
    for (size_t k = 0; k < perm.size(); ++k) {
      old_idx += multi[k] * old_strides[static_cast<size_t>(perm[k])];
    }
    map[static_cast<size_t>(idx)] = old_idx;
    for (int k = m - 1; k >= 0; --k) {
      if (++multi[static_cast<size_t>(k)] < new_dims[static_cast<size_t>(k)]) break;
      multi[static_cast<size_t>(k)] = 0;
    }
  }
  return map;
}

inline VectorXcd permute_vector(const VectorXcd& v, const std::vector<std::int64_t>& map) {
  VectorXcd out(v.size());
  for (std::int64_t i = 0; i < v.size(); ++i) out(i) = v(map[static_cast<size_t>(i)]);
  return out;
}

inline MatrixXcd permute_matrix(const MatrixXcd& m, const std::vector<std::int64_t>& map) {
  MatrixXcd out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      out(i, j) = m(map[static_cast<size_t>(i)], map[static_cast<size_t>(j)]);
    }
  }
  return out;
}

inline StateVector reorder(const StateVector& psi, const std::vector<std::string>& new_order) {
  const std::vector<int> perm = psi.space().positions(new_order);
  if (static_cast<int>(perm.size()) != psi.space().num_factors()) {
    throw DimensionError("reorder must name every factor exactly once");
  }
  const auto map = permutation_index_map(psi.space(), perm);
  return StateVector(psi.space().select(perm), permute_vector(psi.amplitudes(), map),
                     psi.subnormalized());
}

inline DensityOperator reorder(const DensityOperator& rho, const std::vector<std::string>& new_order) {
  const std::vector<int> perm = rho.space().positions(new_order);
  if (static_cast<int>(perm.size()) != rho.space().num_factors()) {
    throw DimensionError("reorder must name every factor exactly once");
  }
  const auto map = permutation_index_map(rho.space(), perm);
  return DensityOperator(rho.space().select(perm), permute_matrix(rho.matrix(), map),
                         rho.subnormalized());
}

namespace detail {
// Positions split into (selected-in-given-order, remaining-in-original-order).
inline std::pair<std::vector<int>, std::vector<int>> split_positions(
    const TensorSpace& space, const std::vector<std::string>& selected) {
  std::vector<int> sel = space.positions(selected);
  std::vector<bool> is_sel(static_cast<size_t>(space.num_factors()), false);
  for (int p : sel) {
    if (is_sel[static_cast<size_t>(p)]) throw DimensionError("factor selected twice");
    is_sel[static_cast<size_t>(p)] = true;
  }
  std::vector<int> rest;
  for (int p = 0; p < space.num_factors(); ++p) {
    if (!is_sel[static_cast<size_t>(p)]) rest.push_back(p);
  }
  return {std::move(sel), std::move(rest)};
}
}  // namespace detail

// ---------- Reshape: pure state as a (selected x remaining) matrix ----------

inline MatrixXcd as_matrix(const StateVector& psi, const std::vector<std::string>& left_labels) {
  auto [sel, rest] = detail::split_positions(psi.space(), left_labels);
  std::vector<int> perm = sel;
  perm.insert(perm.end(), rest.begin(), rest.end());
  const auto map = permutation_index_map(psi.space(), perm);
  const VectorXcd v = permute_vector(psi.amplitudes(), map);
  std::int64_t dl = 1;
  for (int p : sel) dl *= psi.space().factor(p).dim;
  const std::int64_t dr = psi.space().total_dim() / dl;
  return Eigen::Map<const RowMajorMatrixXcd>(v.data(), dl, dr);
}

// ---------- Partial trace ----------

inline DensityOperator partial_trace(const DensityOperator& rho,
                                     const std::vector<std::string>& discard) {
  auto [disc, keep] = detail::split_positions(rho.space(), discard);
  if (keep.empty()) throw DimensionError("partial_trace would discard every factor");
  std::vector<int> perm = keep;
  perm.insert(perm.end(), disc.begin(), disc.end());
  const auto map = permutation_index_map(rho.space(), perm);
  const MatrixXcd rp = permute_matrix(rho.matrix(), map);
  std::int64_t dk = 1;
  for (int p : keep) dk *= rho.space().factor(p).dim;
  const std::int64_t dd = rho.space().total_dim() / dk;
  MatrixXcd out = MatrixXcd::Zero(dk, dk);
  for (std::int64_t a = 0; a < dk; ++a) {
    for (std::int64_t b = 0; b < dk; ++b) {
      Complex s = 0.0;
      for (std::int64_t d = 0; d < dd; ++d) s += rp(a * dd + d, b * dd + d);
      out(a, b) = s;
    }
  }
  return DensityOperator(rho.space().select(keep), std::move(out), rho.subnormalized(),
                         1e-8 /* permutation & summation noise stays well below this */);
}

// Partial trace of a pure state without materializing the full density matrix.
inline DensityOperator partial_trace_pure(const StateVector& psi,
                                          const std::vector<std::string>& discard) {
  auto [disc, keep] = detail::split_positions(psi.space(), discard);
  if (keep.empty()) throw DimensionError("partial_trace would discard every factor");
  std::vector<std::string> keep_labels;
  for (int p : keep) keep_labels.push_back(psi.space().factor(p).label);
  const MatrixXcd m = as_matrix(psi, keep_labels);
  MatrixXcd out = m * m.adjoint();
  return DensityOperator(psi.space().select(keep), std::move(out), psi.subnormalized());
}

// ---------- Canonical states and operators ----------

inline StateVector maximally_entangled(std::int64_t d, const std::string& label_a = "A",
                                       const std::string& label_b = "B") {
  if (d < 1) throw DimensionError("maximally_entangled requires d >= 1");
  VectorXcd amp = VectorXcd::Zero(d * d);
  const double c = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::int64_t i = 0; i < d; ++i) amp(i * d + i) = c;
  return StateVector(TensorSpace({Factor{label_a, d}, Factor{label_b, d}}), std::move(amp));
}

// F |a>|b> = |b>|a> on two factors of equal dimension d.
inline LinearOp swap_operator(std::int64_t d, const std::string& label_a = "A",
                              const std::string& label_b = "B") {
  TensorSpace sp({Factor{label_a, d}, Factor{label_b, d}});
  MatrixXcd f = MatrixXcd::Zero(d * d, d * d);
  for (std::int64_t i = 0; i < d; ++i) {
    for (std::int64_t j = 0; j < d; ++j) f(j * d + i, i * d + j) = 1.0;
  }
  return LinearOp(sp, sp, std::move(f));
}

// ---------- Schmidt decomposition ----------

struct SchmidtResult {
  VectorXd coefficients;  // nonincreasing, nonnegative; sum of squares = <psi|psi>
  MatrixXcd left;         // orthonormal columns on the left side
  MatrixXcd right;        // orthonormal columns on the right side
  TensorSpace left_space, right_space;
};

inline SchmidtResult schmidt(const StateVector& psi, const std::vector<std::string>& left_labels) {
  auto [sel, rest] = detail::split_positions(psi.space(), left_labels);
  if (sel.empty() || rest.empty()) throw DimensionError("schmidt cut must be a proper bipartition");
  const MatrixXcd m = as_matrix(psi, left_labels);
  const bool big = m.rows() > 256 || m.cols() > 256;
  MatrixXcd u, v;
  VectorXd s;
  if (big) {
    Eigen::BDCSVD<MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  } else {
    Eigen::JacobiSVD<MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  }
  // psi = sum_i s_i u_i (x) conj(v_i); fix phases keeping each u_i (x) right_i product.
  MatrixXcd right = v.conjugate();
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double a = std::abs(u(i, j));
      if (a > 1e-8) {
        const Complex ph = u(i, j) / a;
        u.col(j) *= std::conj(ph);
        right.col(j) *= ph;
        break;
      }
    }
  }
  // Reconstruction check.
  const MatrixXcd rec = u * s.asDiagonal() * right.transpose();
  const double err = (rec - m).cwiseAbs().maxCoeff();
  if (err > tol::op_check) {
    throw InvariantError("schmidt reconstruction error " + std::to_string(err));
  }
  return SchmidtResult{std::move(s), std::move(u), std::move(right), psi.space().select(sel),
                       psi.space().select(rest)};
}

// ---------- Purification ----------

// Two-factor purification on (original space, purifier of dimension rank(rho)).
inline StateVector purify(const DensityOperator& rho, const std::string& purifier_label = "P") {
  EigenSystem es = canonical_eigensystem(rho.matrix());
  VectorXd lam = clamp_spectrum(es.values, "purify");
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > 1e-12) rank = i + 1;
  }
  if (rank == 0) rank = 1;  // zero operator only arises subnormalized; keep a trivial factor
  const std::int64_t d = rho.dim();
  VectorXcd amp = VectorXcd::Zero(d * rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    const double c = std::sqrt(std::max(lam(k), 0.0));
    for (std::int64_t i = 0; i < d; ++i) amp(i * rank + k) = c * es.vectors(i, k);
  }
  TensorSpace sp = rho.space().tensor_with(TensorSpace::single(purifier_label, rank));
  return StateVector(std::move(sp), std::move(amp), rho.subnormalized());
}

// ---------- Applying an operator to selected factors ----------

namespace detail {
// Apply (op (x) I_rest) to a vector laid out as (group, rest) with the group slowest.
inline VectorXcd left_apply_grouped(const MatrixXcd& op, const VectorXcd& v, std::int64_t rest) {
  const Eigen::Index din = op.cols(), dout = op.rows();
  Eigen::Map<const RowMajorMatrixXcd> m(v.data(), din, rest);
  RowMajorMatrixXcd out = op * m;
  return Eigen::Map<const VectorXcd>(out.data(), dout * rest);
}
}  // namespace detail

// Applies `op` to the factors named by `targets` (in that order).  The result
// keeps the remaining factors in their original order; the operator's output
// factors are inserted where the first target factor was.
inline StateVector apply_to_factors(const LinearOp& op, const StateVector& psi,
                                    const std::vector<std::string>& targets) {
  auto [sel, rest] = detail::split_positions(psi.space(), targets);
  std::int64_t din = 1;
  for (int p : sel) din *= psi.space().factor(p).dim;
  if (din != op.in_space().total_dim()) {
    throw DimensionError("operator input dim " + std::to_string(op.in_space().total_dim()) +
                         " does not match target factors (dim " + std::to_string(din) + ")");
  }
  std::vector<int> perm = sel;
  perm.insert(perm.end(), rest.begin(), rest.end());
  const auto map = permutation_index_map(psi.space(), perm);
  const VectorXcd vp = permute_vector(psi.amplitudes(), map);
  const std::int64_t drest = psi.space().total_dim() / din;
  VectorXcd out = detail::left_apply_grouped(op.matrix(), vp, drest);

  // Factor list: out factors at the position of the first target.
  const int insert_at = sel.empty() ? 0 : *std::min_element(sel.begin(), sel.end());
  std::vector<Factor> fs;
  bool inserted = false;
  for (int p = 0; p < psi.space().num_factors(); ++p) {
    if (std::find(sel.begin(), sel.end(), p) != sel.end()) {
      if (p == insert_at) {
        for (const Factor& f : op.out_space().factors()) fs.push_back(f);
        inserted = true;
      }
      continue;
    }
    fs.push_back(psi.space().factor(p));
  }
  if (!inserted) {
    for (const Factor& f : op.out_space().factors()) fs.push_back(f);
  }
  TensorSpace final_space(fs);

  // The computed layout is (out..., rest...); permute into the final order.
  std::vector<Factor> computed;
  for (const Factor& f : op.out_space().factors()) computed.push_back(f);
  for (int p : rest) computed.push_back(psi.space().factor(p));
  TensorSpace computed_space(computed);
  std::vector<int> perm2;
  for (const Factor& f : final_space.factors()) perm2.push_back(computed_space.position(f.label));
  const auto map2 = permutation_index_map(computed_space, perm2);
  // Subnormalization: an isometry preserves norms, a general op may shrink them.
  const double n = out.norm();
  const bool sub = psi.subnormalized() || n < 1.0 - tol::norm;
  return StateVector(std::move(final_space), permute_vector(out, map2), sub);
}

inline DensityOperator apply_to_factors(const LinearOp& op, const DensityOperator& rho,
                                        const std::vector<std::string>& targets,
                                        bool subnormalized = false, double trace_tol = 1e-8) {
  auto [sel, rest] = detail::split_positions(rho.space(), targets);
  std::int64_t din = 1;
  for (int p : sel) din *= rho.space().factor(p).dim;
  if (din != op.in_space().total_dim()) {
    throw DimensionError("operator input dim does not match target factors");
  }
  std::vector<int> perm = sel;
  perm.insert(perm.end(), rest.begin(), rest.end());
  const auto map = permutation_index_map(rho.space(), perm);
  const MatrixXcd rp = permute_matrix(rho.matrix(), map);
  const std::int64_t drest = rho.space().total_dim() / din;
  const Eigen::Index dout = op.matrix().rows();

  MatrixXcd c(dout * drest, rp.cols());
  for (Eigen::Index j = 0; j < rp.cols(); ++j) {
    c.col(j) = detail::left_apply_grouped(op.matrix(), rp.col(j), drest);
  }
  MatrixXcd b(dout * drest, dout * drest);
  for (Eigen::Index j = 0; j < c.rows(); ++j) {
    b.col(j) = detail::left_apply_grouped(op.matrix(), c.row(j).conjugate().transpose(), drest);
  }
  b = b.adjoint().eval();

  const int insert_at = sel.empty() ? 0 : *std::min_element(sel.begin(), sel.end());
  std::vector<Factor> fs;
  bool inserted = false;
  for (int p = 0; p < rho.space().num_factors(); ++p) {
    if (std::find(sel.begin(), sel.end(), p) != sel.end()) {
      if (p == insert_at) {
        for (const Factor& f : op.out_space().factors()) fs.push_back(f);
        inserted = true;
      }
      continue;
    }
    fs.push_back(rho.space().factor(p));
  }
  if (!inserted) {
    for (const Factor& f : op.out_space().factors()) fs.push_back(f);
  }
  TensorSpace final_space(fs);

  std::vector<Factor> computed;
  for (const Factor& f : op.out_space().factors()) computed.push_back(f);
  for (int p : rest) computed.push_back(rho.space().factor(p));
  TensorSpace computed_space(computed);
  std::vector<int> perm2;
  for (const Factor& f : final_space.factors()) perm2.push_back(computed_space.position(f.label));
  const auto map2 = permutation_index_map(computed_space, perm2);
  return DensityOperator(std::move(final_space), permute_matrix(b, map2),
                         subnormalized || rho.subnormalized(), trace_tol);
}

}  // namespace declab
