#include "kbc/sparse.hpp"

#include <algorithm>
#include <string>

namespace kbc {

SparseVector SparseVector::from_unsorted(std::vector<Entry> entries, std::uint32_t dim) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.index < b.index; });
  SparseVector out(dim);
  out.entries_.reserve(entries.size());
  for (const Entry& e : entries) {
    if (e.index >= dim) {
      throw DataError("sparse index " + std::to_string(e.index) +
                      " out of range for dimension " + std::to_string(dim));
    }
    if (!out.entries_.empty() && out.entries_.back().index == e.index) {
      throw DataError("duplicate sparse index " + std::to_string(e.index));
    }
    if (e.value != 0.0) out.entries_.push_back(e);
  }
  return out;
}

void SparseVector::push_back(std::uint32_t index, double value) {
  if (index >= dim_) {
    throw DataError("sparse index " + std::to_string(index) +
                    " out of range for dimension " + std::to_string(dim_));
  }
  if (!entries_.empty() && index <= entries_.back().index) {
    throw DataError("sparse indices must be strictly increasing");
  }
  if (value != 0.0) entries_.push_back({index, value});
}

double SparseVector::dot(const SparseVector& other) const {
  double s = 0.0;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->index < b->index) {
      ++a;
    } else if (b->index < a->index) {
      ++b;
    } else {
      s += a->value * b->value;
      ++a;
      ++b;
    }
  }
  return s;
}

SparseVector subtract(const SparseVector& a, const SparseVector& b) {
  if (a.dim() != b.dim()) throw DataError("sparse dimension mismatch in subtract");
  SparseVector out(a.dim());
  auto ai = a.entries().begin();
  auto bi = b.entries().begin();
  auto push = [&out](std::uint32_t idx, double v) {
    if (v != 0.0) out.push_back(idx, v);
  };
  while (ai != a.entries().end() || bi != b.entries().end()) {
    if (bi == b.entries().end() || (ai != a.entries().end() && ai->index < bi->index)) {
      push(ai->index, ai->value);
      ++ai;
    } else if (ai == a.entries().end() || bi->index < ai->index) {
      push(bi->index, -bi->value);
      ++bi;
    } else {
      push(ai->index, ai->value - bi->value);
      ++ai;
      ++bi;
    }
  }
  return out;
}

double dot_dense(const std::vector<double>& w, const SparseVector& x) {
  if (w.size() < x.dim()) throw DataError("dense vector shorter than sparse dimension");
  double s = 0.0;
  for (const auto& e : x.entries()) s += w[e.index] * e.value;
  return s;
}

void axpy(std::vector<double>& w, double alpha, const SparseVector& x) {
  if (w.size() < x.dim()) throw DataError("dense vector shorter than sparse dimension");
  for (const auto& e : x.entries()) w[e.index] += alpha * e.value;
}

}  // namespace kbc
