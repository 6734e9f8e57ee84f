#pragma once
// Derivative-free maximization of coherent information over channel inputs.
//
// Input states are parametrized without constraints: a real vector
// theta in R^{2 d^2} is read as a complex d x d matrix M (normalized to unit
// Frobenius norm), and the candidate state is M M^dagger -- automatically
// positive with unit trace.  A Nelder-Mead simplex then maximizes
// I_c(M M^dagger, N).  Restart 0 always starts from the maximally mixed
// state; further restarts start from Gaussian random parameters.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "declab/channel.hpp"
#include "declab/seeding.hpp"
#include "declab/state.hpp"

namespace declab {

struct OptimizerResult {
  DensityOperator phi_star;           // best input state found
  double value = 0.0;                 // its objective value
  std::vector<double> best_history;   // best-so-far after each iteration (nondecreasing)
};

namespace detail {

inline MatrixXcd theta_to_state(const VectorXd& theta, std::int64_t d) {
  VectorXcd w(d * d);
  for (std::int64_t j = 0; j < d * d; ++j) {
    w(j) = std::complex<double>(theta(2 * j), theta(2 * j + 1));
  }
  const double nrm = w.norm();
  if (nrm < 1e-8) return MatrixXcd::Zero(d, d);
  w /= nrm;
  MatrixXcd m(d, d);
  for (std::int64_t a = 0; a < d; ++a) {
    for (std::int64_t p = 0; p < d; ++p) m(a, p) = w(a * d + p);
  }
  return m * m.adjoint();
}

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2), maximizing f.  (best_x, best_v) track the best point ever
// evaluated across calls, and the running best is appended to history after
// every iteration, so history is nondecreasing.
template <typename F>
inline void nelder_mead_max(F&& f, const VectorXd& x0, int iterations, double step,
                            VectorXd& best_x, double& best_v, std::vector<double>& history) {
  const int dim = static_cast<int>(x0.size());
  std::vector<VectorXd> xs(static_cast<size_t>(dim + 1), x0);
  std::vector<double> fs(static_cast<size_t>(dim + 1));
  for (int i = 1; i <= dim; ++i) xs[static_cast<size_t>(i)](i - 1) += step;
  auto note = [&](const VectorXd& x, double v) {
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
    return v;
  };
  for (int i = 0; i <= dim; ++i) {
    fs[static_cast<size_t>(i)] = note(xs[static_cast<size_t>(i)], f(xs[static_cast<size_t>(i)]));
  }

  auto order = [&] {
    // Insertion sort: the simplex is nearly sorted after each step.
    for (int i = 1; i <= dim; ++i) {
      VectorXd x = xs[static_cast<size_t>(i)];
      double v = fs[static_cast<size_t>(i)];
      int j = i - 1;
      while (j >= 0 && fs[static_cast<size_t>(j)] < v) {
        xs[static_cast<size_t>(j + 1)] = xs[static_cast<size_t>(j)];
        fs[static_cast<size_t>(j + 1)] = fs[static_cast<size_t>(j)];
        --j;
      }
      xs[static_cast<size_t>(j + 1)] = std::move(x);
      fs[static_cast<size_t>(j + 1)] = v;
    }
  };

  for (int it = 0; it < iterations; ++it) {
    order();  // fs[0] best ... fs[dim] worst
    VectorXd centroid = VectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i) centroid += xs[static_cast<size_t>(i)];
    centroid /= static_cast<double>(dim);

    const VectorXd worst = xs[static_cast<size_t>(dim)];
    const VectorXd refl = centroid + (centroid - worst);
    const double f_refl = note(refl, f(refl));
    if (f_refl > fs[0]) {
      const VectorXd expa = centroid + 2.0 * (centroid - worst);
      const double f_expa = note(expa, f(expa));
      if (f_expa > f_refl) {
        xs[static_cast<size_t>(dim)] = expa;
        fs[static_cast<size_t>(dim)] = f_expa;
      } else {
        xs[static_cast<size_t>(dim)] = refl;
        fs[static_cast<size_t>(dim)] = f_refl;
      }
    } else if (f_refl > fs[static_cast<size_t>(dim - 1)]) {
      xs[static_cast<size_t>(dim)] = refl;
      fs[static_cast<size_t>(dim)] = f_refl;
    } else {
      const VectorXd contr = centroid + 0.5 * (worst - centroid);
      const double f_contr = note(contr, f(contr));
      if (f_contr > fs[static_cast<size_t>(dim)]) {
        xs[static_cast<size_t>(dim)] = contr;
        fs[static_cast<size_t>(dim)] = f_contr;
      } else {
        for (int i = 1; i <= dim; ++i) {
          xs[static_cast<size_t>(i)] = xs[0] + 0.5 * (xs[static_cast<size_t>(i)] - xs[0]);
          fs[static_cast<size_t>(i)] =
              note(xs[static_cast<size_t>(i)], f(xs[static_cast<size_t>(i)]));
        }
      }
    }
    history.push_back(best_v);
  }
}

}  // namespace detail

inline OptimizerResult maximize_coherent_information(const Channel& chan, int restarts,
                                                     int iterations, SeededSource src) {
  if (restarts < 1) throw DimensionError("need at least one restart");
  if (iterations < 1) throw DimensionError("need at least one iteration");
  const std::int64_t d = chan.in_dim();
  const int dim = static_cast<int>(2 * d * d);

  auto objective = [&](const VectorXd& theta) {
    const MatrixXcd rho = detail::theta_to_state(theta, d);
    if (rho.size() == 0 || std::abs(rho.trace().real()) < 0.5) return -1e9;
    return coherent_information(DensityOperator(TensorSpace::single("A", d), rho), chan);
  };

  OptimizerResult result{DensityOperator(TensorSpace::single("A", d),
                                         MatrixXcd::Identity(d, d) / static_cast<double>(d)),
                         -1e18,
                         {}};
  VectorXd best_theta = VectorXd::Zero(dim);
  for (int r = 0; r < restarts; ++r) {
    VectorXd x0 = VectorXd::Zero(dim);
    if (r == 0) {
      // Parameters of the maximally mixed state: M = I / sqrt(d).
      for (std::int64_t a = 0; a < d; ++a) x0(2 * (a * d + a)) = 1.0;
    } else {
      Prng rng(src.derive(static_cast<std::uint64_t>(r)));
      for (int i = 0; i < dim; ++i) x0(i) = rng.gaussian();
    }
    detail::nelder_mead_max(objective, x0, iterations, 0.25, best_theta, result.value,
                            result.best_history);
  }
  result.phi_star =
      DensityOperator(TensorSpace::single("A", d), detail::theta_to_state(best_theta, d));
  return result;
}

// Per-use rate from an n-copy ansatz: maximizes coherent information of the
// n-fold channel over (possibly entangled) n-copy inputs and divides by n.
// The returned state lives on the n-copy input space; value and best_history
// are already divided by the copy count.
inline OptimizerResult multicopy_lower_bound(const Channel& chan, int copies, int restarts,
                                             int iterations, SeededSource src) {
  if (copies < 1) throw DimensionError("need at least one copy");
  OptimizerResult result =
      maximize_coherent_information(tensor_power(chan, copies), restarts, iterations, src);
  result.value /= static_cast<double>(copies);
  for (double& h : result.best_history) h /= static_cast<double>(copies);
  return result;
}

}  // namespace declab
