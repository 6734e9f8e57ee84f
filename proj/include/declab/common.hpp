#pragma once
// Shared numeric tolerances, error types, and the global dimension budget.

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace declab {

// All tolerances are absolute.  Every downstream identity check depends on
// construction-time validation being strict, so violations throw.
namespace tol {
inline constexpr double norm = 1e-12;        // pure-state normalization
inline constexpr double herm = 1e-12;        // hermiticity of density operators
inline constexpr double eig_floor = -1e-10;  // eigenvalue floor; [-1e-10, 0) clamps to 0
inline constexpr double trace = 1e-10;       // unit trace of density operators
inline constexpr double op_check = 1e-10;    // isometry / projector / reconstruction checks
inline constexpr double marginal = 1e-8;     // maximally-mixed-marginal preconditions
}  // namespace tol

// Invalid inputs (shape mismatches, bad labels, malformed values).
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A constructed value violates its type invariants.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A computation exceeded the dimension budget.
struct BudgetError : std::runtime_error {
  std::uint64_t required;
  std::uint64_t budget;
  BudgetError(const std::string& what, std::uint64_t required_, std::uint64_t budget_)
      : std::runtime_error(what), required(required_), budget(budget_) {}
};

// A malformed configuration file or CLI usage error (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A runtime check that should hold by construction failed (CLI exit code 1).
struct InvariantError : std::logic_error {
  using std::logic_error::logic_error;
};

// Total-matrix-entry budget for eagerly materialized products.
// Overridable through the DECOUPLING_LAB_BUDGET environment variable.
inline std::uint64_t dimension_budget() {
  static const std::uint64_t value = [] {
    if (const char* env = std::getenv("DECOUPLING_LAB_BUDGET")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(env, &end, 10);
      if (end != env && v > 0) return static_cast<std::uint64_t>(v);
    }
    return static_cast<std::uint64_t>(1) << 26;
  }();
  return value;
}

inline void check_budget(const std::string& what, std::uint64_t required) {
  if (required > dimension_budget()) {
    throw BudgetError(what + ": requires " + std::to_string(required) +
                          " matrix entries, budget is " + std::to_string(dimension_budget()),
                      required, dimension_budget());
  }
}

}  // namespace declab
