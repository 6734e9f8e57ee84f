#pragma once
// Constructive decoder for a tripartite pure state psi on (R, B, E): an
// isometry W : B -> (Rhat, Bprime) aligning psi with the product target
// |Phi?(R,Rhat)> (x) |xi?(Bprime,E)>, where xi purifies psi^E.  The achieved
// overlap saturates the fidelity F(psi^{RE}, pi (x) psi^E), which in turn is
// at least 1 - ||psi^{RE} - pi (x) psi^E||_1.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <string>

#include "declab/channel.hpp"
#include "declab/common.hpp"
#include "declab/linalg.hpp"
#include "declab/metrics.hpp"
#include "declab/state.hpp"
#include "declab/tensor_ops.hpp"

namespace declab {

struct DecoderResult {
  LinearOp W;                // isometry B -> (Rhat, Bprime)
  double achieved_fidelity;  // squared overlap of the decoded state with the product target
  double decoupling_tdist;   // ||psi^{RE} - pi (x) psi^E||_1 (unnormalized)
  double uhlmann_fidelity;   // F(psi^{RE}, pi (x) psi^E), evaluated independently
};

// Build the aligning decoder for psi on factors (R, B, E), in that order.
//
// Construction: canonical purification xi of psi^E on (Bprime, E) with
// |Bprime| = max(|B|, rank psi^E); reshape psi to M_psi[(r,e), b] and the
// target Phi (x) xi to M_sigma[(r,e), (rhat, bprime)]; the decoded overlap is
// bilinear in W, <sigma|(I (x) W)|psi> = Tr[X W^T] with X = M_sigma^dagger
// M_psi, so with X = U S V^dagger the maximizer over isometries is
// W = conj(U) V^T, achieving (sum_i S_i)^2 = F(psi^{RE}, pi (x) psi^E).
inline DecoderResult build_decoder(const StateVector& psi) {
  if (psi.space().num_factors() != 3) {
    throw DimensionError("build_decoder expects exactly three factors (R, B, E)");
  }
  const std::int64_t r = psi.space().factor(0).dim;
  const std::int64_t b = psi.space().factor(1).dim;
  const std::int64_t e = psi.space().factor(2).dim;
  const std::string r_label = psi.space().factor(0).label;
  const std::string b_label = psi.space().factor(1).label;
  const std::string e_label = psi.space().factor(2).label;

  const DensityOperator psi_re = partial_trace_pure(psi, {b_label});
  const DensityOperator psi_e = partial_trace_pure(psi, {r_label, b_label});
  const MatrixXcd product =
      kron(MatrixXcd::Identity(r, r) / static_cast<double>(r), psi_e.matrix());
  const double tdist = trace_norm(psi_re.matrix() - product);
  const double uhl =
      fidelity(psi_re, DensityOperator(psi_re.space(), product, psi_re.subnormalized()));

  // Canonical purification of psi^E: nonincreasing eigenvalues, phase-fixed
  // eigenvectors, significant spectrum only.
  const EigenSystem es = canonical_eigensystem(psi_e.matrix());
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    if (es.values(k) > 1e-12) ++rank;
  }
  const std::int64_t bprime = std::max<std::int64_t>(b, std::max<Eigen::Index>(rank, 1));
  VectorXcd xi = VectorXcd::Zero(bprime * e);
  for (Eigen::Index k = 0; k < rank; ++k) {
    const double root = std::sqrt(es.values(k));
    for (std::int64_t ei = 0; ei < e; ++ei) xi(k * e + ei) = root * es.vectors(ei, k);
  }

  // M_psi[(r, e), b] from psi indexed (R slow, B middle, E fast).
  MatrixXcd m_psi(r * e, b);
  for (std::int64_t ri = 0; ri < r; ++ri) {
    for (std::int64_t bi = 0; bi < b; ++bi) {
      for (std::int64_t ei = 0; ei < e; ++ei) {
        m_psi(ri * e + ei, bi) = psi.amplitudes()(ri * (b * e) + bi * e + ei);
      }
    }
  }
  // M_sigma[(r, e), (rhat, bprime)] = delta_{r, rhat} / sqrt(|R|) * xi_{bprime, e}.
  MatrixXcd m_sigma = MatrixXcd::Zero(r * e, r * bprime);
  const double invsqrt_r = 1.0 / std::sqrt(static_cast<double>(r));
  for (std::int64_t ri = 0; ri < r; ++ri) {
    for (std::int64_t bp = 0; bp < bprime; ++bp) {
      for (std::int64_t ei = 0; ei < e; ++ei) {
        m_sigma(ri * e + ei, ri * bprime + bp) = invsqrt_r * xi(bp * e + ei);
      }
    }
  }

  const MatrixXcd x = m_sigma.adjoint() * m_psi;
  Eigen::JacobiSVD<MatrixXcd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const MatrixXcd w = svd.matrixU().conjugate() * svd.matrixV().transpose();
  const double predicted = svd.singularValues().sum() * svd.singularValues().sum();

  LinearOp w_op(TensorSpace::single(b_label, b),
                TensorSpace({Factor{"Rhat", r}, Factor{"Bprime", bprime}}), w);
  w_op.require_isometry();

  // Independent evaluation of the achieved overlap through the labeled-state
  // machinery: apply W to the B factor and project on Phi (x) xi.
  const StateVector decoded = apply_to_factors(w_op, psi, {b_label});
  // decoded factors: (R, Rhat, Bprime, E) with R slowest.
  Complex overlap = 0.0;
  const VectorXcd& amp = decoded.amplitudes();
  for (std::int64_t ri = 0; ri < r; ++ri) {
    for (std::int64_t bp = 0; bp < bprime; ++bp) {
      for (std::int64_t ei = 0; ei < e; ++ei) {
        const std::int64_t idx = ((ri * r + ri) * bprime + bp) * e + ei;
        overlap += std::conj(invsqrt_r * xi(bp * e + ei)) * amp(idx);
      }
    }
  }
  const double achieved = std::norm(overlap);
  if (std::abs(achieved - predicted) > 1e-10) {
    throw InvariantError("decoder overlap " + std::to_string(achieved) +
                         " does not match the singular-value prediction " +
                         std::to_string(predicted));
  }
  return DecoderResult{std::move(w_op), achieved, tdist, uhl};
}

// F(Phi^{R,Rhat}, (I (x) D . N)(Y)) for an encoding Y on (R, inputs...), a
// channel N acting on the non-R factors, and a decoder isometry W whose
// trailing output factor is discarded: D = Tr_Bprime [ W . W^dagger ].
inline double entanglement_fidelity(const StateVector& encoding, const Channel& n,
                                    const LinearOp& w) {
  if (encoding.space().num_factors() < 2) {
    throw DimensionError("entanglement_fidelity: encoding needs (R, inputs...)");
  }
  const std::int64_t r = encoding.space().factor(0).dim;
  const std::string r_label = encoding.space().factor(0).label;
  std::vector<std::string> input_labels;
  std::int64_t in_dim = 1;
  for (int f = 1; f < encoding.space().num_factors(); ++f) {
    input_labels.push_back(encoding.space().factor(f).label);
    in_dim *= encoding.space().factor(f).dim;
  }
  if (in_dim != n.in_dim()) throw DimensionError("entanglement_fidelity: channel input mismatch");
  if (w.in_space().total_dim() != n.out_dim()) {
    throw DimensionError("entanglement_fidelity: decoder input must match channel output");
  }
  if (w.out_space().num_factors() != 2 || w.out_space().factor(0).dim != r) {
    throw DimensionError("entanglement_fidelity: decoder must output (Rhat, Bprime) with |Rhat| = |R|");
  }

  const DensityOperator upsilon(
      encoding.space(), encoding.amplitudes() * encoding.amplitudes().adjoint());
  const DensityOperator through = apply_to_factors(n, upsilon, input_labels, "Bch");
  const DensityOperator applied = apply_to_factors(w, through, {"Bch"});
  const std::string bprime_label = w.out_space().factor(1).label;
  const std::string rhat_label = w.out_space().factor(0).label;
  const DensityOperator rr = partial_trace(applied, {bprime_label});
  const StateVector phi = maximally_entangled(r, r_label, rhat_label);
  return fidelity_pure(phi, rr);
}

}  // namespace declab
