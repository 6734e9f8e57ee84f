#pragma once
// Completely positive trace-preserving maps stored as Kraus sets, with the
// derived dilation isometry, complementary channel, and Choi state; built-in
// channel family; coherent information; tensor powers; JSON import/export.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "declab/common.hpp"
#include "declab/linalg.hpp"
#include "declab/metrics.hpp"
#include "declab/random.hpp"
#include "declab/state.hpp"
#include "declab/tensor_ops.hpp"

namespace declab {

class Channel {
 public:
  Channel(std::string name, std::int64_t in_dim, std::int64_t out_dim,
          std::vector<MatrixXcd> kraus)
      : name_(std::move(name)), in_(in_dim), out_(out_dim), kraus_(std::move(kraus)) {
    if (in_ < 1 || out_ < 1 || kraus_.empty()) throw DimensionError("channel needs dims >= 1 and at least one Kraus operator");
    MatrixXcd acc = MatrixXcd::Zero(in_, in_);
    for (const MatrixXcd& k : kraus_) {
      if (k.rows() != out_ || k.cols() != in_) {
        throw DimensionError("Kraus operator shape mismatch in channel '" + name_ + "'");
      }
      acc += k.adjoint() * k;
    }
    const double defect = (acc - MatrixXcd::Identity(in_, in_)).cwiseAbs().maxCoeff();
    if (defect > tol::op_check) {
      throw ValidationError("channel '" + name_ + "' is not trace preserving (defect " +
                            std::to_string(defect) + ")");
    }
  }

  const std::string& name() const { return name_; }
  std::int64_t in_dim() const { return in_; }
  std::int64_t out_dim() const { return out_; }
  std::int64_t env_dim() const { return static_cast<std::int64_t>(kraus_.size()); }
  const std::vector<MatrixXcd>& kraus() const { return kraus_; }

  MatrixXcd apply_matrix(const MatrixXcd& rho) const {
    MatrixXcd out = MatrixXcd::Zero(out_, out_);
    for (const MatrixXcd& k : kraus_) out += k * rho * k.adjoint();
    return out;
  }

  DensityOperator apply(const DensityOperator& rho, const std::string& out_label = "B") const {
    if (rho.dim() != in_) throw DimensionError("channel input dim mismatch");
    return DensityOperator(TensorSpace::single(out_label, out_), apply_matrix(rho.matrix()),
                           rho.subnormalized());
  }

 private:
  std::string name_;
  std::int64_t in_, out_;
  std::vector<MatrixXcd> kraus_;
};

// Apply a channel to selected factors of a larger state.  The targets (in the
// listed order) form the channel input; they are replaced by a single output
// factor labeled out_label, inserted at the first target's position.
inline DensityOperator apply_to_factors(const Channel& n, const DensityOperator& rho,
                                        const std::vector<std::string>& targets,
                                        const std::string& out_label = "B") {
  std::int64_t din = 1;
  for (const std::string& t : targets) din *= rho.space().dim_of(t);
  if (din != n.in_dim()) throw DimensionError("channel input dim does not match target factors");
  std::vector<Factor> in_factors;
  for (const std::string& t : targets) in_factors.push_back(Factor{t, rho.space().dim_of(t)});
  const TensorSpace in_space(in_factors);
  const TensorSpace out_space = TensorSpace::single(out_label, n.out_dim());
  MatrixXcd acc;
  TensorSpace result_space = rho.space();
  for (const MatrixXcd& k : n.kraus()) {
    DensityOperator term = apply_to_factors(LinearOp(in_space, out_space, k), rho, targets,
                                            /*subnormalized=*/true);
    if (acc.size() == 0) {
      acc = term.matrix();
      result_space = term.space();
    } else {
      acc += term.matrix();
    }
  }
  return DensityOperator(result_space, std::move(acc), rho.subnormalized(), 1e-8);
}

// ---------- Dilation ----------

struct StinespringIsometry {
  LinearOp isometry;       // in -> (B, E)
  std::int64_t env_dim;    // number of Kraus operators
};

// V = sum_k K_k (x) |k>_E over the orthonormal environment basis; output
// factors ordered (B, E).
inline StinespringIsometry stinespring(const Channel& n, const std::string& out_label = "B",
                                       const std::string& env_label = "E",
                                       const std::string& in_label = "A") {
  const std::int64_t k = n.env_dim(), b = n.out_dim(), a = n.in_dim();
  MatrixXcd v = MatrixXcd::Zero(b * k, a);
  for (std::int64_t e = 0; e < k; ++e) {
    const MatrixXcd& kr = n.kraus()[static_cast<size_t>(e)];
    for (std::int64_t i = 0; i < b; ++i) {
      for (std::int64_t j = 0; j < a; ++j) v(i * k + e, j) = kr(i, j);
    }
  }
  LinearOp op(TensorSpace::single(in_label, a),
              TensorSpace({Factor{out_label, b}, Factor{env_label, k}}), std::move(v));
  op.require_isometry();
  return StinespringIsometry{std::move(op), k};
}

// Complementary channel A -> E: trace out B from the dilation.
inline Channel complementary(const Channel& n) {
  const std::int64_t k = n.env_dim(), b = n.out_dim(), a = n.in_dim();
  std::vector<MatrixXcd> comp;
  comp.reserve(static_cast<size_t>(b));
  for (std::int64_t i = 0; i < b; ++i) {
    MatrixXcd m(k, a);
    for (std::int64_t e = 0; e < k; ++e) {
      for (std::int64_t j = 0; j < a; ++j) m(e, j) = n.kraus()[static_cast<size_t>(e)](i, j);
    }
    comp.push_back(std::move(m));
  }
  return Channel(n.name() + "_complement", a, k, std::move(comp));
}

// ---------- Choi isomorphism ----------

// (I (x) N)(Phi^{AA'}) on factors (A, B); the A marginal is maximally mixed.
inline DensityOperator choi(const Channel& n, const std::string& ref_label = "A",
                            const std::string& out_label = "B") {
  const std::int64_t a = n.in_dim(), b = n.out_dim();
  const StateVector phi = maximally_entangled(a, ref_label, "in");
  MatrixXcd out = MatrixXcd::Zero(a * b, a * b);
  const MatrixXcd phimat = phi.amplitudes() * phi.amplitudes().adjoint();
  for (const MatrixXcd& k : n.kraus()) {
    const MatrixXcd ik = kron(MatrixXcd::Identity(a, a), k);
    out += ik * phimat * ik.adjoint();
  }
  return DensityOperator(TensorSpace({Factor{ref_label, a}, Factor{out_label, b}}), std::move(out));
}

// Inverse of the Choi map; requires the reference marginal to be maximally
// mixed to 1e-8.
inline Channel channel_from_choi(const DensityOperator& rho, const std::string& name = "from_choi") {
  if (rho.space().num_factors() != 2) throw DimensionError("Choi state must have two factors");
  const std::int64_t a = rho.space().factor(0).dim;
  const std::int64_t b = rho.space().factor(1).dim;
  const DensityOperator marg = partial_trace(rho, {rho.space().factor(1).label});
  const double dev =
      (marg.matrix() - MatrixXcd::Identity(a, a) / static_cast<double>(a)).cwiseAbs().maxCoeff();
  if (dev > 1e-8) {
    throw ValidationError("Choi reference marginal deviates from maximally mixed by " +
                          std::to_string(dev));
  }
  EigenSystem es = canonical_eigensystem(rho.matrix());
  std::vector<MatrixXcd> kraus;
  for (Eigen::Index j = 0; j < es.values.size(); ++j) {
    const double lam = es.values(j);
    if (lam < tol::eig_floor) throw ValidationError("Choi state has negative eigenvalue");
    if (lam <= 1e-12) continue;
    MatrixXcd k(b, a);
    for (std::int64_t ai = 0; ai < a; ++ai) {
      for (std::int64_t bi = 0; bi < b; ++bi) {
        k(bi, ai) = std::sqrt(lam * static_cast<double>(a)) * es.vectors(ai * b + bi, j);
      }
    }
    kraus.push_back(std::move(k));
  }
  return Channel(name, a, b, std::move(kraus));
}

// ---------- Built-in family ----------

inline void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw DimensionError(std::string(what) + ": parameter outside [0, 1]");
}

inline Channel identity_channel(std::int64_t d) {
  return Channel("identity(" + std::to_string(d) + ")", d, d, {MatrixXcd::Identity(d, d)});
}

// Erasure: output dim d+1; the flag state is the last basis vector of the
// enlarged output space (orthogonal to the embedded input image).
inline Channel erasure_channel(std::int64_t d, double p) {
  require_probability(p, "erasure");
  std::vector<MatrixXcd> kraus;
  MatrixXcd keep = MatrixXcd::Zero(d + 1, d);
  keep.topRows(d) = std::sqrt(1.0 - p) * MatrixXcd::Identity(d, d);
  kraus.push_back(std::move(keep));
  for (std::int64_t j = 0; j < d; ++j) {
    MatrixXcd flag = MatrixXcd::Zero(d + 1, d);
    flag(d, j) = std::sqrt(p);
    kraus.push_back(std::move(flag));
  }
  return Channel("erasure(" + std::to_string(d) + "," + std::to_string(p) + ")", d, d + 1,
                 std::move(kraus));
}

// rho -> (1-p) rho + p I/d, realized with the d^2 unitary shift-and-phase
// operators (d^2 + 1 Kraus operators in total).
inline Channel depolarizing_channel(std::int64_t d, double p) {
  require_probability(p, "depolarizing");
  std::vector<MatrixXcd> kraus;
  kraus.push_back(std::sqrt(1.0 - p) * MatrixXcd::Identity(d, d));
  MatrixXcd x = MatrixXcd::Zero(d, d);
  for (std::int64_t j = 0; j < d; ++j) x((j + 1) % d, j) = 1.0;
  MatrixXcd z = MatrixXcd::Zero(d, d);
  for (std::int64_t k = 0; k < d; ++k) {
    const double th = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(d);
    z(k, k) = Complex(std::cos(th), std::sin(th));
  }
  MatrixXcd xa = MatrixXcd::Identity(d, d);
  const double c = std::sqrt(p) / static_cast<double>(d);
  for (std::int64_t aa = 0; aa < d; ++aa) {
    MatrixXcd w = xa;
    for (std::int64_t bb = 0; bb < d; ++bb) {
      kraus.push_back(c * w);
      w = w * z;
    }
    xa = x * xa;
  }
  return Channel("depolarizing(" + std::to_string(d) + "," + std::to_string(p) + ")", d, d,
                 std::move(kraus));
}

// Minimal 4-Kraus qubit depolarizing representation (used for
// dilation-independence checks against the generic representation).
inline Channel depolarizing_qubit_minimal(double p) {
  require_probability(p, "depolarizing");
  MatrixXcd i2 = MatrixXcd::Identity(2, 2), x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  z << 1, 0, 0, -1;
  return Channel("depolarizing_minimal(" + std::to_string(p) + ")", 2, 2,
                 {std::sqrt(1.0 - 0.75 * p) * i2, std::sqrt(p / 4.0) * x, std::sqrt(p / 4.0) * y,
                  std::sqrt(p / 4.0) * z});
}

// rho -> (1-p) rho + p Z rho Z on a qubit.
inline Channel dephasing_channel(double p) {
  require_probability(p, "dephasing");
  MatrixXcd z(2, 2);
  z << 1, 0, 0, -1;
  return Channel("dephasing(" + std::to_string(p) + ")", 2, 2,
                 {std::sqrt(1.0 - p) * MatrixXcd::Identity(2, 2), std::sqrt(p) * z});
}

inline Channel amplitude_damping_channel(double gamma) {
  require_probability(gamma, "amplitude_damping");
  MatrixXcd k0(2, 2), k1(2, 2);
  k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
  k1 << 0, std::sqrt(gamma), 0, 0;
  return Channel("amplitude_damping(" + std::to_string(gamma) + ")", 2, 2, {k0, k1});
}

// Haar-random channel: restrict a Haar isometry A -> (B, env) to its Kraus
// components.  Rows of the isometry are indexed (b * kraus_count + e).
inline Channel random_channel(std::int64_t in_dim, std::int64_t out_dim, std::int64_t kraus_count,
                              Prng& rng) {
  if (kraus_count < 1 || out_dim * kraus_count < in_dim) {
    throw DimensionError("random_channel requires out_dim * kraus_count >= in_dim >= 1");
  }
  const MatrixXcd v = haar_isometry(in_dim, out_dim * kraus_count, rng);
  std::vector<MatrixXcd> kraus;
  for (std::int64_t e = 0; e < kraus_count; ++e) {
    MatrixXcd k(out_dim, in_dim);
    for (std::int64_t b = 0; b < out_dim; ++b) {
      for (std::int64_t a = 0; a < in_dim; ++a) k(b, a) = v(b * kraus_count + e, a);
    }
    kraus.push_back(std::move(k));
  }
  return Channel("random(" + std::to_string(in_dim) + "->" + std::to_string(out_dim) + "x" +
                     std::to_string(kraus_count) + ")",
                 in_dim, out_dim, std::move(kraus));
}

// ---------- Coherent information ----------

// H(B) - H(E) on the dilated output of input phi; independent of the Kraus
// representation used.
inline double coherent_information(const DensityOperator& phi, const Channel& n) {
  if (phi.dim() != n.in_dim()) throw DimensionError("coherent_information input dim mismatch");
  const MatrixXcd b = n.apply_matrix(phi.matrix());
  const std::int64_t kc = n.env_dim();
  MatrixXcd e(kc, kc);
  for (std::int64_t k = 0; k < kc; ++k) {
    for (std::int64_t l = 0; l < kc; ++l) {
      e(k, l) = (n.kraus()[static_cast<size_t>(k)] * phi.matrix() *
                 n.kraus()[static_cast<size_t>(l)].adjoint())
                    .trace();
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> esb(b, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> ese(e, Eigen::EigenvaluesOnly);
  const VectorXd lb = clamp_spectrum(esb.eigenvalues(), "coherent_information");
  const VectorXd le = clamp_spectrum(ese.eigenvalues(), "coherent_information");
  return entropy_of_spectrum(lb) - entropy_of_spectrum(le);
}

// ---------- Tensor power ----------

inline Channel tensor_power(const Channel& n, int copies) {
  if (copies < 1) throw DimensionError("tensor_power requires n >= 1");
  double entries = 1.0;
  for (int i = 0; i < copies; ++i) {
    entries *= static_cast<double>(n.env_dim()) * static_cast<double>(n.out_dim()) *
               static_cast<double>(n.in_dim());
  }
  check_budget("tensor_power(" + n.name() + ", " + std::to_string(copies) + ")",
               entries > 1e18 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(entries));
  std::vector<MatrixXcd> kraus = n.kraus();
  for (int i = 1; i < copies; ++i) {
    std::vector<MatrixXcd> next;
    next.reserve(kraus.size() * n.kraus().size());
    for (const MatrixXcd& a : kraus) {
      for (const MatrixXcd& b : n.kraus()) next.push_back(kron(a, b));
    }
    kraus = std::move(next);
  }
  std::int64_t in = 1, out = 1;
  for (int i = 0; i < copies; ++i) {
    in *= n.in_dim();
    out *= n.out_dim();
  }
  return Channel(n.name() + "^" + std::to_string(copies), in, out, std::move(kraus));
}

// ---------- JSON import/export ----------

inline nlohmann::json channel_to_json(const Channel& n) {
  nlohmann::json j;
  j["name"] = n.name();
  j["in_dim"] = n.in_dim();
  j["out_dim"] = n.out_dim();
  nlohmann::json ks = nlohmann::json::array();
  for (const MatrixXcd& k : n.kraus()) {
    nlohmann::json mat = nlohmann::json::array();
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      for (Eigen::Index jj = 0; jj < k.cols(); ++jj) {
        mat.push_back({k(i, jj).real(), k(i, jj).imag()});
      }
    }
    ks.push_back(std::move(mat));
  }
  j["kraus"] = std::move(ks);
  return j;
}

inline Channel channel_from_json(const nlohmann::json& j) {
  for (const auto& [key, _] : j.items()) {
    if (key != "name" && key != "in_dim" && key != "out_dim" && key != "kraus") {
      throw ConfigError("unknown field '" + key + "' in channel document");
    }
  }
  if (!j.contains("name") || !j.contains("in_dim") || !j.contains("out_dim") || !j.contains("kraus")) {
    throw ConfigError("channel document needs fields name, in_dim, out_dim, kraus");
  }
  const std::int64_t in = j.at("in_dim").get<std::int64_t>();
  const std::int64_t out = j.at("out_dim").get<std::int64_t>();
  std::vector<MatrixXcd> kraus;
  for (const auto& mat : j.at("kraus")) {
    if (static_cast<std::int64_t>(mat.size()) != in * out) {
      throw ConfigError("kraus matrix has " + std::to_string(mat.size()) + " entries, expected " +
                        std::to_string(in * out) + " (row-major out_dim x in_dim)");
    }
    MatrixXcd k(out, in);
    std::int64_t idx = 0;
    for (std::int64_t i = 0; i < out; ++i) {
      for (std::int64_t jj = 0; jj < in; ++jj, ++idx) {
        const auto& pair = mat.at(static_cast<size_t>(idx));
        if (pair.size() != 2) throw ConfigError("kraus entries must be [re, im] pairs");
        k(i, jj) = Complex(pair.at(0).get<double>(), pair.at(1).get<double>());
      }
    }
    kraus.push_back(std::move(k));
  }
  return Channel(j.at("name").get<std::string>(), in, out, std::move(kraus));
}

}  // namespace declab
