#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "declab/metrics.hpp"
#include "declab/random.hpp"
#include "declab/state.hpp"
#include "declab/tensor_ops.hpp"

using namespace declab;

namespace {

TensorSpace qubit(const std::string& l) { return TensorSpace::single(l, 2); }

StateVector basis_state(const TensorSpace& sp, Eigen::Index i) {
  VectorXcd v = VectorXcd::Zero(sp.total_dim());
  v(i) = 1.0;
  return StateVector(sp, v);
}

// Independent oracle: partial trace by naive index summation, no shared code
// with the library implementation.
MatrixXcd naive_partial_trace(const MatrixXcd& rho, const std::vector<std::int64_t>& dims,
                              const std::vector<int>& keep) {
  const int m = static_cast<int>(dims.size());
  std::vector<int> disc;
  for (int i = 0; i < m; ++i) {
    if (std::find(keep.begin(), keep.end(), i) == keep.end()) disc.push_back(i);
  }
  std::vector<std::int64_t> strides(dims.size(), 1);
  for (int i = m - 2; i >= 0; --i) strides[i] = strides[i + 1] * dims[i + 1];
  std::int64_t dk = 1, dd = 1;
  for (int p : keep) dk *= dims[p];
  for (int p : disc) dd *= dims[p];
  auto compose = [&](std::int64_t k, std::int64_t d) {
    std::int64_t idx = 0;
    for (int i = static_cast<int>(keep.size()) - 1; i >= 0; --i) {
      idx += (k % dims[keep[i]]) * strides[keep[i]];
      k /= dims[keep[i]];
    }
    for (int i = static_cast<int>(disc.size()) - 1; i >= 0; --i) {
      idx += (d % dims[disc[i]]) * strides[disc[i]];
      d /= dims[disc[i]];
    }
    return idx;
  };
  MatrixXcd out = MatrixXcd::Zero(dk, dk);
  for (std::int64_t a = 0; a < dk; ++a) {
    for (std::int64_t b = 0; b < dk; ++b) {
      for (std::int64_t d = 0; d < dd; ++d) {
        out(a, b) += rho(compose(a, d), compose(b, d));
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("tensor space bookkeeping") {
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 3}});
  CHECK(sp.total_dim() == 6);
  CHECK(sp.position("B") == 1);
  CHECK_THROWS_AS(sp.position("C"), DimensionError);
  CHECK_THROWS_AS(TensorSpace({Factor{"A", 2}, Factor{"A", 2}}), DimensionError);
  CHECK_THROWS_AS(sp.tensor_with(TensorSpace::single("A", 2)), DimensionError);
  CHECK(sp.strides() == std::vector<std::int64_t>({3, 1}));
}

TEST_CASE("tensor products of canonical states") {
  auto pi2 = DensityOperator::maximally_mixed(qubit("A"));
  auto pi2b = DensityOperator::maximally_mixed(qubit("B"));
  auto prod = tensor(pi2, pi2b);
  CHECK(prod.space().total_dim() == 4);
  CHECK((prod.matrix() - MatrixXcd::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() == 0.0);

  auto v0 = basis_state(qubit("A"), 0);
  auto v1 = basis_state(qubit("B"), 1);
  auto w = tensor(v0, v1);
  VectorXcd e1 = VectorXcd::Zero(4);
  e1(1) = 1.0;
  CHECK((w.amplitudes() - e1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tensor then partial trace returns the retained factor") {
  Prng rng(SeededSource{11, 0});
  for (int rep = 0; rep < 5; ++rep) {
    auto rho = random_density(TensorSpace::single("A", 3), 3, rng);
    auto sig = random_density(TensorSpace::single("B", 2), 2, rng);
    auto joint = tensor(rho, sig);
    auto back = partial_trace(joint, {"B"});
    CHECK((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff() <= 1e-12);
    // Against the independent summation oracle as well.
    MatrixXcd oracle = naive_partial_trace(joint.matrix(), {3, 2}, {0});
    CHECK((back.matrix() - oracle).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("partial trace of entangled and product states") {
  auto bell = maximally_entangled(2, "A", "B");
  auto red = partial_trace_pure(bell, {"B"});
  CHECK((red.matrix() - MatrixXcd::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() <= 1e-15);

  Prng rng(SeededSource{12, 0});
  auto rho = random_density(TensorSpace::single("A", 2), 2, rng);
  // Scaled second factor: the partial trace picks up its trace.
  MatrixXcd sig = 0.7 * random_density(TensorSpace::single("B", 3), 2, rng).matrix();
  DensityOperator joint(TensorSpace({Factor{"A", 2}, Factor{"B", 3}}), kron(rho.matrix(), sig),
                        true);
  auto back = partial_trace(joint, {"B"});
  CHECK((back.matrix() - 0.7 * rho.matrix()).cwiseAbs().maxCoeff() <= 1e-12);

  // Random 3-qubit pure state vs the naive summation oracle.
  TensorSpace three({Factor{"A", 2}, Factor{"B", 2}, Factor{"C", 2}});
  auto psi = random_state(three, rng);
  MatrixXcd full = psi.amplitudes() * psi.amplitudes().adjoint();
  MatrixXcd oracle = naive_partial_trace(full, {2, 2, 2}, {0, 2});
  auto lib = partial_trace_pure(psi, {"B"});
  CHECK((lib.matrix() - oracle).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(lib.space().describe() == "[A:2, C:2]");
  CHECK_THROWS_AS(partial_trace_pure(psi, {"Z"}), DimensionError);
}

TEST_CASE("maximally entangled state") {
  auto s1 = maximally_entangled(1);
  CHECK(s1.amplitudes().size() == 1);
  CHECK(std::abs(s1.amplitudes()(0) - 1.0) <= 1e-15);

  auto s2 = maximally_entangled(2);
  VectorXcd expect(4);
  const double c = 1.0 / std::sqrt(2.0);
  expect << c, 0.0, 0.0, c;
  CHECK((s2.amplitudes() - expect).cwiseAbs().maxCoeff() <= 1e-15);

  // (X (x) I)|Phi> = (I (x) X^T)|Phi> for random X at d=3.
  Prng rng(SeededSource{13, 0});
  auto s3 = maximally_entangled(3, "A", "B");
  MatrixXcd x = ginibre(3, 3, rng);
  x /= x.norm();  // keep the projected state subnormalized
  TensorSpace t3 = TensorSpace::single("T", 3);
  LinearOp left(t3, t3, x), right(t3, t3, x.transpose());
  auto lhs = apply_to_factors(left, s3, {"A"});
  auto rhs = apply_to_factors(right, s3, {"B"});
  // Output labels are "T" on different slots; compare raw amplitude layouts.
  VectorXcd la = lhs.amplitudes(), ra = rhs.amplitudes();
  CHECK((la - ra).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("schmidt decomposition") {
  // Product state: single coefficient equal to the norm.
  Prng rng(SeededSource{14, 0});
  auto a = random_state(TensorSpace::single("A", 3), rng);
  auto b = random_state(TensorSpace::single("B", 4), rng);
  auto prod = tensor(a, b);
  auto sr = schmidt(prod, {"A"});
  CHECK(sr.coefficients(0) == doctest::Approx(1.0).epsilon(1e-12));
  for (Eigen::Index i = 1; i < sr.coefficients.size(); ++i) {
    CHECK(sr.coefficients(i) <= 1e-10);
  }

  // Maximally entangled: d equal coefficients 1/sqrt(d).
  auto phi = maximally_entangled(3, "A", "B");
  auto sp = schmidt(phi, {"A"});
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(sp.coefficients(i) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  }

  // Random 2x3: squared coefficients = eigenvalues of the reduced state.
  TensorSpace sp23({Factor{"A", 2}, Factor{"B", 3}});
  auto psi = random_state(sp23, rng);
  auto s = schmidt(psi, {"A"});
  auto red = partial_trace_pure(psi, {"B"});
  EigenSystem es = canonical_eigensystem(red.matrix());
  for (Eigen::Index i = 0; i < 2; ++i) {
    CHECK(s.coefficients(i) * s.coefficients(i) == doctest::Approx(es.values(i)).epsilon(1e-9));
  }
  double total = s.coefficients.squaredNorm();
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(schmidt(psi, std::vector<std::string>{}), DimensionError);
  CHECK_THROWS_AS(schmidt(psi, {"A", "B"}), DimensionError);
}

TEST_CASE("purification") {
  // Pure input: trivial purifying factor.
  Prng rng(SeededSource{15, 0});
  auto v = random_state(TensorSpace::single("A", 3), rng);
  DensityOperator vv(v.space(), v.amplitudes() * v.amplitudes().adjoint());
  auto pur = purify(vv);
  CHECK(pur.space().factors().back().dim == 1);
  CHECK(std::abs(std::norm(pur.amplitudes().head(3).dot(v.amplitudes()))) ==
        doctest::Approx(1.0).epsilon(1e-10));

  // Maximally mixed qubit: marginal comes back exactly.
  auto pi2 = DensityOperator::maximally_mixed(qubit("A"));
  auto p2 = purify(pi2);
  CHECK(p2.space().factors().back().dim == 2);
  auto m2 = partial_trace_pure(p2, {"P"});
  CHECK((m2.matrix() - pi2.matrix()).cwiseAbs().maxCoeff() <= 1e-12);

  // Random rank-3 state on dim 4: purifier has dim 3 and marginal matches.
  auto rho = random_density(TensorSpace::single("A", 4), 3, rng);
  auto pr = purify(rho);
  CHECK(pr.space().factors().back().dim == 3);
  auto marg = partial_trace_pure(pr, {"P"});
  CHECK((marg.matrix() - rho.matrix()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("swap operator and two-copy purity identities") {
  auto f = swap_operator(3, "A", "B");
  Prng rng(SeededSource{16, 0});
  auto a = random_state(TensorSpace::single("A", 3), rng);
  auto b = random_state(TensorSpace::single("B", 3), rng);
  auto ab = tensor(a, b);
  VectorXcd swapped = f.matrix() * ab.amplitudes();
  VectorXcd expect = kron(b.amplitudes(), a.amplitudes());
  CHECK((swapped - expect).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("reorder round trips and relabeled views") {
  Prng rng(SeededSource{17, 0});
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 3}, Factor{"C", 2}});
  auto psi = random_state(sp, rng);
  auto fwd = reorder(psi, {"C", "A", "B"});
  auto back = reorder(fwd, {"A", "B", "C"});
  CHECK((back.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() == 0.0);

  auto rho = random_density(sp, 4, rng);
  auto rfwd = reorder(rho, {"B", "C", "A"});
  auto rback = reorder(rfwd, {"A", "B", "C"});
  CHECK((rback.matrix() - rho.matrix()).cwiseAbs().maxCoeff() == 0.0);
  // Partial trace is order-insensitive.
  auto t1 = partial_trace(rho, {"B"});
  auto t2 = reorder(partial_trace(rfwd, {"B"}), {"A", "C"});
  CHECK((t1.matrix() - t2.matrix()).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("apply_to_factors equals explicit Kronecker conjugation") {
  Prng rng(SeededSource{18, 0});
  TensorSpace sp({Factor{"A", 2}, Factor{"B", 3}, Factor{"C", 2}});
  auto psi = random_state(sp, rng);
  MatrixXcd u = haar_unitary(3, rng);
  LinearOp op(TensorSpace::single("B", 3), TensorSpace::single("B", 3), u);
  auto out = apply_to_factors(op, psi, {"B"});
  MatrixXcd full = kron(kron(MatrixXcd::Identity(2, 2), u), MatrixXcd::Identity(2, 2));
  CHECK((out.amplitudes() - full * psi.amplitudes()).cwiseAbs().maxCoeff() <= 1e-13);

  auto rho = random_density(sp, 5, rng);
  auto rout = apply_to_factors(op, rho, {"B"});
  MatrixXcd expect = full * rho.matrix() * full.adjoint();
  CHECK((rout.matrix() - expect).cwiseAbs().maxCoeff() <= 1e-12);

  // Applying on two factors at once, in permuted order.
  MatrixXcd w = haar_unitary(4, rng);
  LinearOp op2(TensorSpace({Factor{"X", 2}, Factor{"Y", 2}}),
               TensorSpace({Factor{"X", 2}, Factor{"Y", 2}}), w);
  auto out2 = apply_to_factors(op2, psi, {"C", "A"});
  // Oracle: reorder to (C, A, B), apply w (x) I, reorder back.
  auto pre = reorder(psi, {"C", "A", "B"});
  VectorXcd mid = kron(w, MatrixXcd::Identity(3, 3)) * pre.amplitudes();
  StateVector oracle(TensorSpace({Factor{"X", 2}, Factor{"Y", 2}, Factor{"B", 3}}), mid);
  auto out2r = reorder(out2, {"X", "Y", "B"});
  CHECK((out2r.amplitudes() - oracle.amplitudes()).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("state validation rejects malformed inputs") {
  VectorXcd v = VectorXcd::Ones(2);
  CHECK_THROWS_AS(StateVector(qubit("A"), v), ValidationError);      // norm sqrt(2)
  CHECK_THROWS_AS(StateVector(qubit("A"), v, true), ValidationError);  // still > 1
  MatrixXcd m(2, 2);
  m << 0.5, 0.3, -0.3, 0.5;  // not hermitian
  CHECK_THROWS_AS(DensityOperator(qubit("A"), m), ValidationError);
  m << 1.5, 0.0, 0.0, -0.5;  // negative eigenvalue
  CHECK_THROWS_AS(DensityOperator(qubit("A"), m), ValidationError);
  m << 0.6, 0.0, 0.0, 0.6;  // trace 1.2
  CHECK_THROWS_AS(DensityOperator(qubit("A"), m), ValidationError);
  CHECK_NOTHROW(DensityOperator(qubit("A"), MatrixXcd::Identity(2, 2) * 0.3, true));
}
