#pragma once
// End-to-end entanglement-generation experiments: pick a subspace of the
// n-copy channel input (whole space, a type class, or the flattened kept
// subspace), sample a Haar-random rotation of it, send the rotated maximally
// entangled state through n channel uses, measure how decoupled the reference
// is from the environment, build the aligning decoder, and record the
// achieved fidelity against the decoupling-based bound.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "declab/channel.hpp"
#include "declab/decoupling.hpp"
#include "declab/random.hpp"
#include "declab/seeding.hpp"
#include "declab/typicality.hpp"
#include "declab/uhlmann.hpp"

namespace declab {

enum class SubspaceMode { full_input, type_class, flattened };

inline const char* subspace_mode_name(SubspaceMode m) {
  switch (m) {
    case SubspaceMode::full_input: return "full-input";
    case SubspaceMode::type_class: return "type-class";
    case SubspaceMode::flattened: return "flattened";
  }
  throw ConfigError("unknown subspace mode");
}

inline SubspaceMode subspace_mode_from_string(const std::string& s) {
  if (s == "full-input") return SubspaceMode::full_input;
  if (s == "type-class") return SubspaceMode::type_class;
  if (s == "flattened") return SubspaceMode::flattened;
  throw ConfigError("unknown subspace_mode '" + s + "' (expected full-input | type-class | flattened)");
}

struct CodeExperimentConfig {
  Channel channel;      // single-copy channel
  DensityOperator phi;  // single-copy input state that selects the subspace
  std::int64_t n = 1;          // number of channel uses
  std::int64_t r_dim = 2;      // code dimension |R|; the rate is log2|R| / n
  std::int64_t trials = 10;
  double delta = 0.3;          // type / typicality width for the subspace modes
  SeededSource seed{0, 0};
  SubspaceMode mode = SubspaceMode::type_class;

  CodeExperimentConfig(Channel chan, DensityOperator phi_in)
      : channel(std::move(chan)), phi(std::move(phi_in)) {}

  // Rate in qubits per channel use.
  double rate() const { return std::log2(static_cast<double>(r_dim)) / static_cast<double>(n); }
};

struct CodeExperimentRecord {
  std::int64_t trial = 0;
  double decoupling_tdist = 0.0;   // || psi_U^{RE} - pi (x) psi^E ||_1
  double oneshot_bound = 0.0;      // exact-average decoupling bound of the instance
  double fidelity = 0.0;           // decoder overlap fidelity, >= 1 - tdist
  double one_minus_fidelity = 0.0;
  double bound_margin = 0.0;       // tdist - (1 - fidelity); nonnegative up to 1e-8
  double wall_seconds = 0.0;       // measured; excluded from serialized outputs
};

// The static part of an experiment: the embedded subspace and the reference
// decoupling instance obtained by maximally entangling with the whole
// subspace and tracing out the channel outputs.
struct CodeSubspace {
  std::int64_t s_dim;
  LinearOp embed;               // isometry S -> the n channel-input factors
  DecouplingInstance instance;  // (S, E^n) instance with the configured |R|
};

namespace detail {

inline std::string copy_label(const char* base, std::int64_t k) {
  return std::string(base) + "#" + std::to_string(k);
}

inline std::vector<std::string> copy_labels(const char* base, std::int64_t n) {
  std::vector<std::string> out;
  out.reserve(static_cast<size_t>(n));
  for (std::int64_t k = 1; k <= n; ++k) out.push_back(copy_label(base, k));
  return out;
}

inline TensorSpace copy_space(const char* base, std::int64_t n, std::int64_t d) {
  std::vector<Factor> fs;
  fs.reserve(static_cast<size_t>(n));
  for (std::int64_t k = 1; k <= n; ++k) fs.push_back(Factor{copy_label(base, k), d});
  return TensorSpace(std::move(fs));
}

}  // namespace detail

// Maximally entangle a rank-r_dim reference with the rotated subspace:
// (1/sqrt(r)) sum_{i<r} |i>_R (x) embed u^T |i>.  The reference marginal is
// exactly maximally mixed for any isometric embed and unitary u.
inline StateVector build_encoding(const LinearOp& embed, const MatrixXcd& u,
                                  std::int64_t r_dim, const std::string& r_label = "R") {
  const std::int64_t s = embed.in_space().total_dim();
  const std::int64_t an = embed.out_space().total_dim();
  if (u.rows() != s || u.cols() != s) throw DimensionError("build_encoding: unitary must act on S");
  if (r_dim < 1 || r_dim > s) {
    throw DimensionError("build_encoding: need 1 <= |R| <= |S|, got |R| = " +
                         std::to_string(r_dim) + ", |S| = " + std::to_string(s));
  }
  const MatrixXcd cols = embed.matrix() * u.transpose().leftCols(r_dim);
  VectorXcd amp = VectorXcd::Zero(r_dim * an);
  const double c = 1.0 / std::sqrt(static_cast<double>(r_dim));
  for (std::int64_t i = 0; i < r_dim; ++i) {
    for (std::int64_t x = 0; x < an; ++x) amp(i * an + x) = c * cols(x, i);
  }
  TensorSpace sp = TensorSpace::single(r_label, r_dim).tensor_with(embed.out_space());
  return StateVector(std::move(sp), std::move(amp));
}

// Send every channel-input factor of `psi` through the channel's dilation
// and regroup as (rest..., B#1..B#n, E#1..E#n).
inline StateVector push_through(const Channel& chan, const StateVector& psi, std::int64_t n) {
  StateVector out = psi;
  for (std::int64_t k = 1; k <= n; ++k) {
    const StinespringIsometry st =
        stinespring(chan, detail::copy_label("B", k), detail::copy_label("E", k), "chan_in");
    out = apply_to_factors(st.isometry, out, {detail::copy_label("Ain", k)});
  }
  std::vector<std::string> order;
  for (const Factor& f : psi.space().factors()) {
    if (f.label.rfind("Ain#", 0) != 0) order.push_back(f.label);
  }
  const std::vector<std::string> bs = detail::copy_labels("B", n);
  const std::vector<std::string> es = detail::copy_labels("E", n);
  order.insert(order.end(), bs.begin(), bs.end());
  order.insert(order.end(), es.begin(), es.end());
  return reorder(out, order);
}

inline CodeSubspace build_code_subspace(const Channel& chan, const DensityOperator& phi,
                                        std::int64_t n, std::int64_t r_dim, SubspaceMode mode,
                                        double delta) {
  if (phi.dim() != chan.in_dim()) throw DimensionError("subspace input state dim mismatch");
  if (n < 1) throw DimensionError("need n >= 1 channel uses");
  const std::int64_t a = chan.in_dim();
  double an_d = 1.0, be_d = 1.0;
  for (std::int64_t k = 0; k < n; ++k) {
    an_d *= static_cast<double>(a);
    be_d *= static_cast<double>(chan.out_dim() * chan.env_dim());
  }
  const double worst = std::max(an_d * be_d, be_d * be_d);
  check_budget("build_code_subspace",
               worst > 1e18 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(worst));
  const auto an = static_cast<std::int64_t>(an_d);

  MatrixXcd j;
  if (mode == SubspaceMode::full_input) {
    j = MatrixXcd::Identity(an, an);
  } else if (mode == SubspaceMode::type_class) {
    const EigenSystem es = canonical_eigensystem(phi.matrix());
    const VectorXd p = clamp_spectrum(es.values, "build_code_subspace");
    const auto [t, dist] = closest_type(p, n);
    if (dist > delta) {
      throw ValidationError("no n-type within delta of the input spectrum (minimal l1 distance " +
                            std::to_string(dist) + ")");
    }
    j = type_class_compressor(es.vectors, n, t).adjoint();
  } else {
    // The flattened subspace lives in the type-compressed coordinates of the
    // purified input's A marginal, so embed it back through that same basis.
    const StateVector phi_abe = channel_input_state(chan, phi);
    const FlattenedCode fc = flatten_code(phi_abe, n, delta);
    const DensityOperator ma = partial_trace_pure(phi_abe, {"B", "E"});
    const EigenSystem ea = canonical_eigensystem(ma.matrix());
    j = type_class_compressor(ea.vectors, n, fc.chosen_type).adjoint() * fc.kept_basis;
  }
  const std::int64_t s = j.cols();
  LinearOp embed(TensorSpace::single("S", s), detail::copy_space("Ain", n, a), std::move(j));
  embed.require_isometry();

  // Reference instance: maximally entangle with the whole subspace, push
  // through the n dilations, trace the outputs, and merge the environment
  // copies into one factor.
  const StateVector gamma = build_encoding(embed, MatrixXcd::Identity(s, s), s, "S0");
  const StateVector pushed = push_through(chan, gamma, n);
  const DensityOperator traced = partial_trace_pure(pushed, detail::copy_labels("B", n));
  const std::int64_t en = traced.dim() / s;
  const DensityOperator merged(TensorSpace({Factor{"S", s}, Factor{"E", en}}), traced.matrix());
  return CodeSubspace{s, std::move(embed),
                      DecouplingInstance::make(merged, r_dim, "code_subspace")};
}

inline CodeSubspace build_code_subspace(const CodeExperimentConfig& cfg) {
  return build_code_subspace(cfg.channel, cfg.phi, cfg.n, cfg.r_dim, cfg.mode, cfg.delta);
}

// One trial: Haar-rotate the subspace, encode, transmit, and decode.
inline CodeExperimentRecord run_code_trial(const CodeExperimentConfig& cfg,
                                           const CodeSubspace& sub, std::int64_t trial,
                                           double bound) {
  const auto t0 = std::chrono::steady_clock::now();
  const MatrixXcd u = haar_unitary(sub.s_dim, cfg.seed.derive(static_cast<std::uint64_t>(trial)));
  const StateVector enc = build_encoding(sub.embed, u, cfg.r_dim);
  const StateVector pushed = push_through(cfg.channel, enc, cfg.n);

  const DensityOperator traced = partial_trace_pure(pushed, detail::copy_labels("B", cfg.n));
  const std::int64_t en = traced.dim() / cfg.r_dim;
  const DensityOperator psi_re(TensorSpace({Factor{"R", cfg.r_dim}, Factor{"E", en}}),
                               traced.matrix());
  const double tdist = trace_distance_from_decoupled(psi_re);

  const std::int64_t bn = pushed.space().total_dim() / (cfg.r_dim * en);
  const StateVector tripartite(
      TensorSpace({Factor{"R", cfg.r_dim}, Factor{"B", bn}, Factor{"E", en}}),
      pushed.amplitudes());
  const DecoderResult dec = build_decoder(tripartite);

  CodeExperimentRecord rec;
  rec.trial = trial;
  rec.decoupling_tdist = tdist;
  rec.oneshot_bound = bound;
  rec.fidelity = dec.achieved_fidelity;
  rec.one_minus_fidelity = 1.0 - dec.achieved_fidelity;
  rec.bound_margin = tdist - rec.one_minus_fidelity;
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

// Runs cfg.trials independent trials.  Records are indexed by trial and each
// trial derives its own sub-seed, so results are identical for any thread
// count (only wall_seconds varies between runs).
inline std::vector<CodeExperimentRecord> run_code_experiment(const CodeExperimentConfig& cfg,
                                                             int threads = 1) {
  if (cfg.trials < 1) throw DimensionError("need at least one trial");
  const CodeSubspace sub = build_code_subspace(cfg);
  const double bound = oneshot_bound(sub.instance);
  std::vector<CodeExperimentRecord> records(static_cast<size_t>(cfg.trials));
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(cfg.trials)));
  if (workers == 1) {
    for (std::int64_t i = 0; i < cfg.trials; ++i) {
      records[static_cast<size_t>(i)] = run_code_trial(cfg, sub, i, bound);
    }
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::int64_t i = w; i < cfg.trials; i += workers) {
            records[static_cast<size_t>(i)] = run_code_trial(cfg, sub, i, bound);
          }
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  return records;
}

}  // namespace declab
