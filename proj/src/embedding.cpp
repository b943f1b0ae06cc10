#include "kbc/embedding.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace kbc {
namespace {

constexpr std::uint64_t kInitSalt = 0x6b62632d696e6974ULL;
constexpr std::uint64_t kShuffleSalt = 0x6b62632d73687566ULL;

double hinge(double x) { return x > 0.0 ? x : 0.0; }

// U^T phi (or V^T psi): sparse-times-dense projection into the embedding space.
std::vector<double> project(const std::vector<double>& matrix, std::int32_t d,
                            const SparseVector& x) {
  std::vector<double> out(static_cast<std::size_t>(d), 0.0);
  for (const auto& e : x.entries()) {
    const double* row = matrix.data() + static_cast<std::size_t>(e.index) * static_cast<std::size_t>(d);
    for (std::int32_t i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] += e.value * row[i];
  }
  return out;
}

void check_dims(const EmbeddingModel& model, const SparseVector& phi, const SparseVector& psi) {
  if (phi.dim() != model.entity_dim) {
    throw DataError("entity feature dimension " + std::to_string(phi.dim()) +
                    " does not match model dimension " + std::to_string(model.entity_dim));
  }
  if (psi.dim() != model.type_dim) {
    throw DataError("type feature dimension " + std::to_string(psi.dim()) +
                    " does not match model dimension " + std::to_string(model.type_dim));
  }
}

// emits (row, col, coeff[col] * vec[row]) for every touched matrix entry
void outer_product_entries(const std::vector<double>& coeff, const SparseVector& vec,
                           std::vector<MatrixEntry>& out) {
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    double c = coeff[i];
    if (c == 0.0) continue;
    for (const auto& e : vec.entries()) {
      out.push_back({e.index, static_cast<std::int32_t>(i), c * e.value});
    }
  }
}

class AdagradState {
 public:
  AdagradState(std::size_t size, double eta, double eps) : accum_(size, 0.0), eta_(eta), eps_(eps) {}

  void apply(std::vector<double>& matrix, std::int32_t d, std::span<const MatrixEntry> grad,
             std::int64_t step) {
    for (const MatrixEntry& g : grad) {
      std::size_t flat = static_cast<std::size_t>(g.row) * static_cast<std::size_t>(d) +
                         static_cast<std::size_t>(g.col);
      accum_[flat] += g.value * g.value;
      double next = matrix[flat] - eta_ * g.value / (std::sqrt(accum_[flat]) + eps_);
      if (!std::isfinite(next)) {
        throw NumericalError("non-finite embedding entry at update step " + std::to_string(step));
      }
      matrix[flat] = next;
    }
  }

 private:
  std::vector<double> accum_;
  double eta_;
  double eps_;
};

}  // namespace

bool EmbeddingModel::all_finite() const {
  for (double x : u) {
    if (!std::isfinite(x)) return false;
  }
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

EmbeddingModel EmbeddingModel::random_init(std::uint32_t entity_dim, std::uint32_t type_dim,
                                           std::int32_t embed_dim, std::uint64_t seed) {
  if (embed_dim < 1) throw UsageError("embedding dimension must be >= 1");
  EmbeddingModel model;
  model.entity_dim = entity_dim;
  model.type_dim = type_dim;
  model.embed_dim = embed_dim;
  double scale = 1.0 / std::sqrt(static_cast<double>(embed_dim));
  Rng rng(mix_seed(seed, kInitSalt));
  model.u.resize(static_cast<std::size_t>(entity_dim) * static_cast<std::size_t>(embed_dim));
  model.v.resize(static_cast<std::size_t>(type_dim) * static_cast<std::size_t>(embed_dim));
  for (double& x : model.u) x = rng.uniform(-scale, scale);
  for (double& x : model.v) x = rng.uniform(-scale, scale);
  return model;
}

double score_embedding(const EmbeddingModel& model, const SparseVector& phi_e,
                       const SparseVector& psi_t) {
  check_dims(model, phi_e, psi_t);
  std::vector<double> u_phi = project(model.u, model.embed_dim, phi_e);
  std::vector<double> v_psi = project(model.v, model.embed_dim, psi_t);
  return std::inner_product(u_phi.begin(), u_phi.end(), v_psi.begin(), 0.0);
}

void embedding_entity_pair_gradient(const EmbeddingModel& model, const SparseVector& phi_e,
                                    const SparseVector& phi_neg, const SparseVector& psi_t,
                                    std::vector<MatrixEntry>& du, std::vector<MatrixEntry>& dv) {
  SparseVector delta_phi = subtract(phi_neg, phi_e);
  std::vector<double> mu = project(model.v, model.embed_dim, psi_t);          // V^T psi(t)
  std::vector<double> eta = project(model.u, model.embed_dim, delta_phi);     // U^T (phi' - phi)
  outer_product_entries(mu, delta_phi, du);
  outer_product_entries(eta, psi_t, dv);
}

void embedding_type_pair_gradient(const EmbeddingModel& model, const SparseVector& phi_e,
                                  const SparseVector& psi_t, const SparseVector& psi_neg,
                                  std::vector<MatrixEntry>& du, std::vector<MatrixEntry>& dv) {
  SparseVector delta_psi = subtract(psi_neg, psi_t);
  std::vector<double> mu = project(model.v, model.embed_dim, delta_psi);   // V^T (psi' - psi)
  std::vector<double> eta = project(model.u, model.embed_dim, phi_e);      // U^T phi(e)
  outer_product_entries(mu, phi_e, du);
  outer_product_entries(eta, delta_psi, dv);
}

EmbeddingModel train_embedding(std::span<const Fact> positives, const FeatureMatrix& entity_features,
                               std::span<const SparseVector> type_features, const KBSnapshot& train,
                               const TrainConfig& cfg, std::int32_t embed_dim) {
  if (cfg.loss_power != 1) throw UsageError("the embedding trainer uses loss power 1");
  cfg.negatives.validate();
  if (static_cast<std::int32_t>(type_features.size()) < train.num_types()) {
    throw DataError("type feature list does not cover the type vocabulary");
  }
  std::uint32_t type_dim = type_features.empty() ? 0 : type_features[0].dim();
  EmbeddingModel model =
      EmbeddingModel::random_init(entity_features.dim(), type_dim, embed_dim, cfg.seed);
  AdagradState u_state(model.u.size(), cfg.learning_rate, cfg.adagrad_epsilon);
  AdagradState v_state(model.v.size(), cfg.learning_rate, cfg.adagrad_epsilon);

  std::vector<MatrixEntry> du, dv;
  std::vector<std::size_t> order(positives.size());
  std::iota(order.begin(), order.end(), 0);
  std::int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::uint64_t tag = cfg.negative_mode == NegativeMode::kFixed
                            ? 0
                            : static_cast<std::uint64_t>(epoch) + 1;
    SampledNegatives negs = sample_all_negatives(positives, train, cfg.negatives, tag);
    Rng shuffle_rng(mix_seed(cfg.seed, kShuffleSalt, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    for (std::size_t idx : order) {
      const Fact& f = positives[idx];
      const SparseVector& phi = entity_features.row(f.entity);
      const SparseVector& psi = type_features[static_cast<std::size_t>(f.type)];
      for (EntityId neg : negs.entities[idx]) {
        ++step;
        const SparseVector& phi_neg = entity_features.row(neg);
        if (score_embedding(model, phi, psi) - score_embedding(model, phi_neg, psi) - 1.0 < 0.0) {
          du.clear();
          dv.clear();
          embedding_entity_pair_gradient(model, phi, phi_neg, psi, du, dv);
          u_state.apply(model.u, model.embed_dim, du, step);
          v_state.apply(model.v, model.embed_dim, dv, step);
        }
      }
      for (TypeId neg : negs.types[idx]) {
        ++step;
        const SparseVector& psi_neg = type_features[static_cast<std::size_t>(neg)];
        if (score_embedding(model, phi, psi) - score_embedding(model, phi, psi_neg) - 1.0 < 0.0) {
          du.clear();
          dv.clear();
          embedding_type_pair_gradient(model, phi, psi, psi_neg, du, dv);
          u_state.apply(model.u, model.embed_dim, du, step);
          v_state.apply(model.v, model.embed_dim, dv, step);
        }
      }
    }
  }
  return model;
}

std::int64_t count_embedding_violations(const EmbeddingModel& model,
                                        std::span<const Fact> positives,
                                        const FeatureMatrix& entity_features,
                                        std::span<const SparseVector> type_features,
                                        const KBSnapshot& train) {
  std::int64_t violations = 0;
  for (const Fact& f : positives) {
    const SparseVector& phi = entity_features.row(f.entity);
    const SparseVector& psi = type_features[static_cast<std::size_t>(f.type)];
    double s_pos = score_embedding(model, phi, psi);
    for (EntityId e = 0; e < train.num_entities(); ++e) {
      if (e == f.entity || train.contains(e, f.type)) continue;
      if (s_pos - score_embedding(model, entity_features.row(e), psi) - 1.0 < 0.0) ++violations;
    }
    for (TypeId t = 0; t < train.num_types(); ++t) {
      if (t == f.type || train.contains(f.entity, t)) continue;
      double s_neg = score_embedding(model, phi, type_features[static_cast<std::size_t>(t)]);
      if (s_pos - s_neg - 1.0 < 0.0) ++violations;
    }
  }
  return violations;
}

double embedding_objective(const EmbeddingModel& model, std::span<const Fact> positives,
                           const FeatureMatrix& entity_features,
                           std::span<const SparseVector> type_features,
                           const SampledNegatives& negatives) {
  if (negatives.size() != positives.size()) {
    throw DataError("negative sets are not aligned with the positives");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const Fact& f = positives[i];
    const SparseVector& phi = entity_features.row(f.entity);
    const SparseVector& psi = type_features[static_cast<std::size_t>(f.type)];
    double s_pos = score_embedding(model, phi, psi);
    for (EntityId neg : negatives.entities[i]) {
      loss += hinge(score_embedding(model, entity_features.row(neg), psi) - s_pos + 1.0);
    }
    for (TypeId neg : negatives.types[i]) {
      loss += hinge(score_embedding(model, phi, type_features[static_cast<std::size_t>(neg)]) -
                    s_pos + 1.0);
    }
  }
  return loss;
}

std::vector<SparseVector> one_hot_type_features(std::int32_t num_types) {
  std::vector<SparseVector> out;
  out.reserve(static_cast<std::size_t>(num_types));
  for (TypeId t = 0; t < num_types; ++t) out.push_back(type_one_hot(t, num_types));
  return out;
}

}  // namespace kbc
