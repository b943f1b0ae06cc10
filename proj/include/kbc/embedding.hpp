#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kbc/features.hpp"
#include "kbc/linear.hpp"
#include "kbc/sampler.hpp"
#include "kbc/snapshot.hpp"
#include "kbc/sparse.hpp"

namespace kbc {

// Bilinear model: s(e, t) = psi(t)^T V U^T phi(e), with U and V projecting
// entity and type features into a shared d-dimensional space.
struct EmbeddingModel {
  std::uint32_t entity_dim = 0;
  std::uint32_t type_dim = 0;
  std::int32_t embed_dim = 0;
  std::vector<double> u;  // row-major entity_dim x embed_dim
  std::vector<double> v;  // row-major type_dim x embed_dim

  double u_at(std::uint32_t row, std::int32_t col) const {
    return u[row * static_cast<std::uint32_t>(embed_dim) + static_cast<std::uint32_t>(col)];
  }
  double v_at(std::uint32_t row, std::int32_t col) const {
    return v[row * static_cast<std::uint32_t>(embed_dim) + static_cast<std::uint32_t>(col)];
  }
  bool all_finite() const;

  // Entries i.i.d. uniform in [-1/sqrt(d), 1/sqrt(d)].
  static EmbeddingModel random_init(std::uint32_t entity_dim, std::uint32_t type_dim,
                                    std::int32_t embed_dim, std::uint64_t seed);
};

double score_embedding(const EmbeddingModel& model, const SparseVector& phi_e,
                       const SparseVector& psi_t);

struct MatrixEntry {
  std::uint32_t row;
  std::int32_t col;
  double value;
};

// Gradient entries of the violated-pair margin s(e',t) - s(e,t) with respect
// to U and V, at the current parameters. Appended to du/dv.
void embedding_entity_pair_gradient(const EmbeddingModel& model, const SparseVector& phi_e,
                                    const SparseVector& phi_neg, const SparseVector& psi_t,
                                    std::vector<MatrixEntry>& du, std::vector<MatrixEntry>& dv);

// Same for the margin s(e,t') - s(e,t).
void embedding_type_pair_gradient(const EmbeddingModel& model, const SparseVector& phi_e,
                                  const SparseVector& psi_t, const SparseVector& psi_neg,
                                  std::vector<MatrixEntry>& du, std::vector<MatrixEntry>& dv);

// Trains U, V with per-coordinate Adagrad on the L1 hinge, no regularizer.
// type_features holds psi per type id (one-hot in the standard pipeline).
EmbeddingModel train_embedding(std::span<const Fact> positives, const FeatureMatrix& entity_features,
                               std::span<const SparseVector> type_features, const KBSnapshot& train,
                               const TrainConfig& cfg, std::int32_t embed_dim);

// Exhaustive violation count over all eligible entity and type negatives.
std::int64_t count_embedding_violations(const EmbeddingModel& model,
                                        std::span<const Fact> positives,
                                        const FeatureMatrix& entity_features,
                                        std::span<const SparseVector> type_features,
                                        const KBSnapshot& train);

// L1-hinge objective (no regularizer) over fixed negative sets.
double embedding_objective(const EmbeddingModel& model, std::span<const Fact> positives,
                           const FeatureMatrix& entity_features,
                           std::span<const SparseVector> type_features,
                           const SampledNegatives& negatives);

// One-hot psi vectors for num_types types.
std::vector<SparseVector> one_hot_type_features(std::int32_t num_types);

}  // namespace kbc
