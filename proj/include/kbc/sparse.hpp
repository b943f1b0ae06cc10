#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "kbc/errors.hpp"

namespace kbc {

// Sparse vector with strictly increasing indices and an explicit dimension.
// Zero weights are never stored.
class SparseVector {
 public:
  struct Entry {
    std::uint32_t index;
    double value;
    bool operator==(const Entry&) const = default;
  };

  SparseVector() = default;
  explicit SparseVector(std::uint32_t dim) : dim_(dim) {}

  // Sorts, validates uniqueness and bounds, drops zeros.
  static SparseVector from_unsorted(std::vector<Entry> entries, std::uint32_t dim);

  // Appends an entry; index must be strictly greater than the current last
  // index and smaller than dim. Zero values are dropped.
  void push_back(std::uint32_t index, double value);

  const std::vector<Entry>& entries() const { return entries_; }
  std::uint32_t dim() const { return dim_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  double squared_norm() const {
    double s = 0.0;
    for (const Entry& e : entries_) s += e.value * e.value;
    return s;
  }

  void scale(double alpha) {
    for (Entry& e : entries_) e.value *= alpha;
  }

  // Normalizes to unit L2 norm; zero vectors are left untouched.
  void l2_normalize() {
    double n = std::sqrt(squared_norm());
    if (n > 0.0) scale(1.0 / n);
  }

  double dot(const SparseVector& other) const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<Entry> entries_;
  std::uint32_t dim_ = 0;
};

// a - b over the common dimension; exact zeros are dropped.
SparseVector subtract(const SparseVector& a, const SparseVector& b);

// Dense-sparse dot product; w.size() must cover x's indices.
double dot_dense(const std::vector<double>& w, const SparseVector& x);

// w += alpha * x.
void axpy(std::vector<double>& w, double alpha, const SparseVector& x);

}  // namespace kbc
