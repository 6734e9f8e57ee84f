#pragma once
// One-shot decoupling: compress the S side of a bipartite state (S, E) with
// a random unitary followed by a fixed rank-|R| truncation, and measure how
// close the (R, E) output is to maximally-mixed (x) environment.  Provides
// the exact Haar average of the squared Hilbert-Schmidt distance in closed
// form, an independent second-moment (Schur) evaluation, finite averages
// over explicit unitary sets, and seeded Monte Carlo estimation.

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "declab/common.hpp"
#include "declab/metrics.hpp"
#include "declab/random.hpp"
#include "declab/state.hpp"
#include "declab/tensor_ops.hpp"

namespace declab {

// A bipartite state on labeled factors (S, E) whose S marginal is maximally
// mixed (to tol::marginal), plus the target compressed dimension |R| <= |S|.
class DecouplingInstance {
 public:
  static DecouplingInstance make(DensityOperator psi_se, std::int64_t r_dim,
                                 std::string id = "instance") {
    if (psi_se.space().num_factors() != 2) {
      throw DimensionError("decoupling instance needs exactly two factors (S, E)");
    }
    const std::int64_t s = psi_se.space().factor(0).dim;
    if (r_dim < 1 || r_dim > s) throw DimensionError("need 1 <= |R| <= |S|");
    const std::uint64_t se = static_cast<std::uint64_t>(psi_se.space().total_dim());
    check_budget("decoupling instance state", se * se);
    const std::string s_label = psi_se.space().factor(0).label;
    const std::string e_label = psi_se.space().factor(1).label;
    const DensityOperator marg = partial_trace(psi_se, {e_label});
    const MatrixXcd pi = MatrixXcd::Identity(s, s) / static_cast<double>(s);
    const double dev = trace_norm(marg.matrix() - pi);
    if (dev > tol::marginal) {
      throw ValidationError("S marginal deviates from maximally mixed by " + std::to_string(dev));
    }
    return DecouplingInstance(std::move(psi_se), r_dim, std::move(id), s_label, e_label);
  }

  const DensityOperator& state() const { return state_; }
  std::int64_t s_dim() const { return state_.space().factor(0).dim; }
  std::int64_t r_dim() const { return r_; }
  std::int64_t e_dim() const { return state_.space().factor(1).dim; }
  const std::string& id() const { return id_; }

  // Canonical compressor [ I_R | 0 ]: keeps the first |R| basis vectors.
  MatrixXcd compressor_matrix() const {
    MatrixXcd p = MatrixXcd::Zero(r_, s_dim());
    p.leftCols(r_) = MatrixXcd::Identity(r_, r_);
    return p;
  }

  // P^dagger P: the rank-|R| projector onto the kept subspace of S.
  MatrixXcd projector() const {
    const MatrixXcd p = compressor_matrix();
    return p.adjoint() * p;
  }

 private:
  DecouplingInstance(DensityOperator st, std::int64_t r, std::string id, std::string s_label,
                     std::string e_label)
      : state_(std::move(st)),
        r_(r),
        id_(std::move(id)),
        s_label_(std::move(s_label)),
        e_label_(std::move(e_label)) {}

  DensityOperator state_;
  std::int64_t r_;
  std::string id_;
  std::string s_label_, e_label_;
};

// Haar-random instance with an exactly maximally mixed S marginal: purify
// pi_S against a mirror factor, then push the mirror through a Haar isometry
// into (E, aux) and trace out aux.  aux_dim controls the mixedness of the
// result (aux_dim = 1 gives a pure state on (S, E)).
inline DecouplingInstance random_instance(std::int64_t s_dim, std::int64_t r_dim,
                                          std::int64_t e_dim, std::int64_t aux_dim,
                                          SeededSource src, std::string id = "random") {
  if (e_dim * aux_dim < s_dim) {
    throw DimensionError("random_instance needs e_dim * aux_dim >= s_dim");
  }
  Prng rng(src);
  const StateVector phi = maximally_entangled(s_dim, "S", "M");
  const MatrixXcd w = haar_isometry(s_dim, e_dim * aux_dim, rng);
  const LinearOp lift(TensorSpace::single("M", s_dim),
                      TensorSpace({Factor{"E", e_dim}, Factor{"F", aux_dim}}), w);
  const StateVector big = apply_to_factors(lift, phi, {"M"});
  const DensityOperator state = partial_trace_pure(big, {"F"});
  return DecouplingInstance::make(state, r_dim, std::move(id));
}

// Erasure-channel instance on S of dimension d: with probability p the
// environment receives the input (maximally entangled with S on a shifted
// basis), otherwise it holds the flag state |0>.
inline DecouplingInstance erasure_instance(std::int64_t d, std::int64_t r_dim, double p,
                                           std::string id = "erasure") {
  if (d < 1) throw DimensionError("erasure_instance requires d >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw DimensionError("erasure_instance: p outside [0, 1]");
  const std::int64_t e = d + 1;
  MatrixXcd m = MatrixXcd::Zero(d * e, d * e);
  for (std::int64_t a = 0; a < d; ++a) {
    m(a * e + 0, a * e + 0) += (1.0 - p) / static_cast<double>(d);
  }
  VectorXcd ent = VectorXcd::Zero(d * e);
  for (std::int64_t a = 0; a < d; ++a) ent(a * e + (a + 1)) = 1.0 / std::sqrt(static_cast<double>(d));
  m += p * (ent * ent.adjoint());
  DensityOperator state(TensorSpace({Factor{"S", d}, Factor{"E", e}}), std::move(m));
  return DecouplingInstance::make(std::move(state), r_dim, std::move(id));
}

// psi_U = (|S|/|R|) (P U (x) I) Psi (P U (x) I)^dagger on (R, E).  The trace
// is exactly 1 whenever the S marginal is exactly maximally mixed; any
// deviation is reported through trace_deviation_out, never renormalized.
inline DensityOperator psi_U(const DecouplingInstance& inst, const MatrixXcd& u,
                             double* trace_deviation_out = nullptr) {
  const std::int64_t s = inst.s_dim(), r = inst.r_dim(), e = inst.e_dim();
  if (u.rows() != s || u.cols() != s) throw DimensionError("psi_U: unitary dim mismatch");
  if ((u.adjoint() * u - MatrixXcd::Identity(s, s)).cwiseAbs().maxCoeff() > tol::op_check) {
    throw ValidationError("psi_U: matrix is not unitary");
  }
  const MatrixXcd pu = inst.compressor_matrix() * u;
  const MatrixXcd a = kron(pu, MatrixXcd::Identity(e, e));
  MatrixXcd m = (static_cast<double>(s) / static_cast<double>(r)) *
                (a * inst.state().matrix() * a.adjoint());
  const double dev = std::abs(m.trace().real() - 1.0);
  if (trace_deviation_out != nullptr) *trace_deviation_out = dev;
  return DensityOperator(TensorSpace({Factor{"R", r}, Factor{"E", e}}), std::move(m),
                         /*subnormalized=*/false, /*trace_tol=*/1e-3);
}

// ||psi - pi_R (x) psi^E||_2^2 for a state on (R, E) whose R marginal is
// maximally mixed.  Evaluated twice -- once directly and once through the
// purity identity Tr[psi^2] - (1/|R|) Tr[(psi^E)^2] -- and both routes must
// agree to 1e-10.
inline double hs_distance_sq(const DensityOperator& psi_re) {
  if (psi_re.space().num_factors() != 2) throw DimensionError("hs_distance_sq needs two factors");
  const std::int64_t r = psi_re.space().factor(0).dim;
  const std::string r_label = psi_re.space().factor(0).label;
  const std::string e_label = psi_re.space().factor(1).label;
  const DensityOperator rm = partial_trace(psi_re, {e_label});
  const MatrixXcd pi = MatrixXcd::Identity(r, r) / static_cast<double>(r);
  const double rdev = trace_norm(rm.matrix() - pi);
  if (rdev > tol::marginal) {
    throw ValidationError("hs_distance_sq: R marginal deviates from maximally mixed by " +
                          std::to_string(rdev));
  }
  const DensityOperator em = partial_trace(psi_re, {r_label});
  const MatrixXcd product = kron(pi, em.matrix());
  const double direct = (psi_re.matrix() - product).squaredNorm();
  const double via_purity =
      psi_re.matrix().squaredNorm() - em.matrix().squaredNorm() / static_cast<double>(r);
  if (std::abs(direct - via_purity) > 1e-10) {
    throw InvariantError("hs_distance_sq: direct and purity routes disagree by " +
                         std::to_string(std::abs(direct - via_purity)));
  }
  return direct;
}

// ||psi - pi_R (x) psi^E||_1 (unnormalized trace norm) for a state on (R, E).
inline double trace_distance_from_decoupled(const DensityOperator& psi_re) {
  if (psi_re.space().num_factors() != 2) throw DimensionError("two factors expected");
  const std::int64_t r = psi_re.space().factor(0).dim;
  const DensityOperator em = partial_trace(psi_re, {psi_re.space().factor(0).label});
  const MatrixXcd product =
      kron(MatrixXcd::Identity(r, r) / static_cast<double>(r), em.matrix());
  return trace_norm(psi_re.matrix() - product);
}

struct ExactAverage {
  double value;          // E_U ||psi_U - pi (x) psi_U^E||_2^2, exact
  double relaxed_bound;  // Tr[Psi^2] >= value; the bound used one-shot
};

// Closed form of the Haar average:
//   ((1 - |R|^-2) / (1 - |S|^-2)) * (Tr[Psi^2] - (1/|S|) Tr[(Psi^E)^2]).
// Singular (and meaningless) at |S| = 1, which is rejected.
inline ExactAverage exact_haar_average_hs(const DecouplingInstance& inst) {
  if (inst.s_dim() < 2) throw DimensionError("closed form undefined at |S| = 1");
  const double s = static_cast<double>(inst.s_dim());
  const double r = static_cast<double>(inst.r_dim());
  const double p2 = inst.state().matrix().squaredNorm();
  const std::string s_label = inst.state().space().factor(0).label;
  const double pe = partial_trace(inst.state(), {s_label}).matrix().squaredNorm();
  const double coeff = (1.0 - 1.0 / (r * r)) / (1.0 - 1.0 / (s * s));
  return ExactAverage{coeff * (p2 - pe / s), p2};
}

// Independent second-moment evaluation.  With Pi_U = U^dagger P^dagger P U,
//   E[Pi_U (x) Pi_U] = alpha I + beta F,
//   alpha = r (r s - 1) / (s (s^2 - 1)),  beta = r (s - r) / (s (s^2 - 1)),
// and both Tr[psi_U^2] and Tr[(psi_U^E)^2] are linear in Pi_U (x) Pi_U.
// Evaluating the identity and swap terms by explicit block sums over matrix
// units of S gives the Haar average through arithmetic that shares nothing
// with the closed form above.
inline double schur_exact_average_hs(const DecouplingInstance& inst) {
  const std::int64_t s = inst.s_dim(), e = inst.e_dim();
  if (s < 2) throw DimensionError("second-moment average undefined at |S| = 1");
  const double sd = static_cast<double>(s);
  const double rd = static_cast<double>(inst.r_dim());
  const double alpha = rd * (rd * sd - 1.0) / (sd * (sd * sd - 1.0));
  const double beta = rd * (sd - rd) / (sd * (sd * sd - 1.0));
  const MatrixXcd& psi = inst.state().matrix();
  auto block = [&](std::int64_t i, std::int64_t j) { return psi.block(i * e, j * e, e, e); };

  // f(I (x) I) = Tr[Psi^2]; f(F) = sum_ij Tr[Psi (E_ij (x) I) Psi (E_ji (x)
  // I)] = sum_ij Tr[Psi_ii Psi_jj]   (blocks of Psi over the S index).
  Complex f_id = 0.0, f_swap = 0.0;
  for (std::int64_t i = 0; i < s; ++i) {
    for (std::int64_t j = 0; j < s; ++j) {
      f_id += (block(i, j) * block(j, i)).trace();
      f_swap += (block(i, i) * block(j, j)).trace();
    }
  }
  // g(I (x) I) = Tr[(Psi^E)^2] = sum_ij Tr[Psi_ii Psi_jj]; g(F) = sum_ij
  // Tr[Psi_ji Psi_ij] = Tr[Psi^2].
  const Complex g_id = f_swap;
  const Complex g_swap = f_id;

  const double c2 = (sd / rd) * (sd / rd);
  const Complex avg =
      c2 * ((alpha * f_id + beta * f_swap) - (alpha * g_id + beta * g_swap) / rd);
  return avg.real();
}

// Exact finite average of the squared Hilbert-Schmidt distance over an
// explicit set of unitaries (e.g. a Clifford group, where this equals the
// Haar average, or the Weyl family, where it generally does not).
inline double design_average_hs(const DecouplingInstance& inst,
                                const std::vector<MatrixXcd>& set) {
  if (set.empty()) throw DimensionError("design_average_hs: empty unitary set");
  double acc = 0.0;
  for (const MatrixXcd& u : set) {
    if (u.rows() != inst.s_dim()) throw DimensionError("design_average_hs: unitary dim mismatch");
    acc += hs_distance_sq(psi_U(inst, u));
  }
  return acc / static_cast<double>(set.size());
}

inline double weyl_average_hs(const DecouplingInstance& inst) {
  return design_average_hs(inst, weyl_unitaries(inst.s_dim()));
}

// One-shot decoupling bound on the expected (unnormalized) trace distance:
//   E_U ||psi_U - pi (x) psi_U^E||_1 <= sqrt(|R| |E| Tr[Psi^2]).
inline double oneshot_bound(const DecouplingInstance& inst) {
  return std::sqrt(static_cast<double>(inst.r_dim()) * static_cast<double>(inst.e_dim()) *
                   inst.state().matrix().squaredNorm());
}

// ---------- Monte Carlo estimation ----------

enum class DecouplingMetric { hs2, trace };

inline const char* metric_name(DecouplingMetric m) {
  return m == DecouplingMetric::hs2 ? "hs2" : "trace";
}

struct McResult {
  double mean = 0.0;
  double std_error = 0.0;
  int n_samples = 0;
  int trace_deviations = 0;  // trials whose psi_U trace deviated from 1 by > 1e-6
};

// Seeded Monte Carlo average of the chosen metric over Haar unitaries.
// Trial i draws its unitary from src.derive(i), so the estimate is a pure
// function of (src, n_samples): per-trial values are stored and folded in
// trial order, making the result independent of the thread count.
inline McResult mc_average(const DecouplingInstance& inst, DecouplingMetric metric, int n_samples,
                           SeededSource src, int threads = 1) {
  if (n_samples < 1) throw DimensionError("mc_average needs n_samples >= 1");
  if (threads < 1) threads = 1;
  std::vector<double> values(static_cast<size_t>(n_samples));
  std::atomic<int> deviations{0};
  auto worker = [&](int begin, int end) {
    int local_dev = 0;
    for (int i = begin; i < end; ++i) {
      const MatrixXcd u = haar_unitary(inst.s_dim(), src.derive(static_cast<std::uint64_t>(i)));
      double dev = 0.0;
      const DensityOperator psi = psi_U(inst, u, &dev);
      if (dev > 1e-6) ++local_dev;
      values[static_cast<size_t>(i)] = (metric == DecouplingMetric::hs2)
                                           ? hs_distance_sq(psi)
                                           : trace_distance_from_decoupled(psi);
    }
    deviations += local_dev;
  };
  if (threads == 1) {
    worker(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_samples + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(n_samples, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (std::thread& th : pool) th.join();
  }
  McResult out;
  out.n_samples = n_samples;
  out.trace_deviations = deviations.load();
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(n_samples);
  if (n_samples > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std_error = std::sqrt(ss / (static_cast<double>(n_samples) *
                                    (static_cast<double>(n_samples) - 1.0)));
  }
  return out;
}

}  // namespace declab
