#pragma once
// An ordered list of labeled finite-dimensional factors.  Every state and
// operator records the space it lives in; binary operations require equal
// spaces.  Linear indices follow Kronecker convention: the first factor is
// the slowest-varying index.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "declab/common.hpp"

namespace declab {

struct Factor {
  std::string label;
  std::int64_t dim = 1;
  friend bool operator==(const Factor& a, const Factor& b) {
    return a.label == b.label && a.dim == b.dim;
  }
};

class TensorSpace {
 public:
  TensorSpace() = default;  // scalar space, total_dim 1

  explicit TensorSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
    std::set<std::string> seen;
    for (const Factor& f : factors_) {
      if (f.dim < 1) throw DimensionError("factor '" + f.label + "' has dim " + std::to_string(f.dim));
      if (!seen.insert(f.label).second) throw DimensionError("duplicate factor label '" + f.label + "'");
      total_ *= f.dim;
    }
  }

  static TensorSpace single(const std::string& label, std::int64_t dim) {
    return TensorSpace({Factor{label, dim}});
  }

  std::int64_t total_dim() const { return total_; }
  int num_factors() const { return static_cast<int>(factors_.size()); }
  const std::vector<Factor>& factors() const { return factors_; }
  const Factor& factor(int i) const { return factors_.at(static_cast<size_t>(i)); }

  bool has(const std::string& label) const {
    return std::any_of(factors_.begin(), factors_.end(),
                       [&](const Factor& f) { return f.label == label; });
  }

  int position(const std::string& label) const {
    for (size_t i = 0; i < factors_.size(); ++i) {
      if (factors_[i].label == label) return static_cast<int>(i);
    }
    throw DimensionError("unknown factor label '" + label + "'");
  }

  std::vector<int> positions(const std::vector<std::string>& labels) const {
    std::vector<int> out;
    out.reserve(labels.size());
    for (const std::string& l : labels) out.push_back(position(l));
    return out;
  }

  std::int64_t dim_of(const std::string& label) const { return factors_[static_cast<size_t>(position(label))].dim; }

  // Stride of each factor in the linear index (first factor slowest).
  std::vector<std::int64_t> strides() const {
    std::vector<std::int64_t> s(factors_.size(), 1);
    for (int i = static_cast<int>(factors_.size()) - 2; i >= 0; --i) {
      s[static_cast<size_t>(i)] = s[static_cast<size_t>(i + 1)] * factors_[static_cast<size_t>(i + 1)].dim;
    }
    return s;
  }

  // Sub-space made of the factors at the given positions, in the given order.
  TensorSpace select(const std::vector<int>& pos) const {
    std::vector<Factor> fs;
    fs.reserve(pos.size());
    for (int p : pos) fs.push_back(factor(p));
    return TensorSpace(std::move(fs));
  }

  // Concatenation; rejects label collisions.
  TensorSpace tensor_with(const TensorSpace& other) const {
    std::vector<Factor> fs = factors_;
    for (const Factor& f : other.factors_) {
      if (has(f.label)) throw DimensionError("label collision on '" + f.label + "' in tensor product");
      fs.push_back(f);
    }
    return TensorSpace(std::move(fs));
  }

  friend bool operator==(const TensorSpace& a, const TensorSpace& b) {
    return a.factors_ == b.factors_;
  }
  friend bool operator!=(const TensorSpace& a, const TensorSpace& b) { return !(a == b); }

  std::string describe() const {
    std::string s = "[";
    for (size_t i = 0; i < factors_.size(); ++i) {
      if (i) s += ", ";
      s += factors_[i].label + ":" + std::to_string(factors_[i].dim);
    }
    return s + "]";
  }

 private:
  std::vector<Factor> factors_;
  std::int64_t total_ = 1;
};

inline void require_same_space(const TensorSpace& a, const TensorSpace& b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": mismatched spaces " + a.describe() + " vs " + b.describe());
  }
}

}  // namespace declab
