#include "kbc/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kbc {
namespace {

constexpr std::uint64_t kShuffleSalt = 0x6b62632d73687566ULL;
constexpr std::uint64_t kDcdSweepSalt = 0x6b62632d64636473ULL;

double hinge(double x) { return x > 0.0 ? x : 0.0; }

// Per-coordinate Adagrad step on w along gradient g (sparse): accumulate
// G_i += g_i^2, then w_i -= eta * g_i / (sqrt(G_i) + eps).
void adagrad_update(std::vector<double>& w, std::vector<double>& accum, const SparseVector& g,
                    double eta, double eps, std::int64_t step) {
  for (const auto& entry : g.entries()) {
    accum[entry.index] += entry.value * entry.value;
    double next = w[entry.index] - eta * entry.value / (std::sqrt(accum[entry.index]) + eps);
    if (!std::isfinite(next)) {
      throw NumericalError("non-finite weight at update step " + std::to_string(step) +
                           ", coordinate " + std::to_string(entry.index));
    }
    w[entry.index] = next;
  }
}

void check_feature_dim(const FeatureMatrix& features, const LinearModel& model) {
  if (features.dim() != model.dim) {
    throw DataError("feature dimension " + std::to_string(features.dim()) +
                    " does not match model dimension " + std::to_string(model.dim));
  }
}

}  // namespace

LinearModel LinearModel::zeros(std::int32_t num_types, std::uint32_t dim) {
  LinearModel model;
  model.dim = dim;
  model.weights.assign(static_cast<std::size_t>(num_types), std::vector<double>(dim, 0.0));
  return model;
}

bool LinearModel::all_finite() const {
  for (const auto& w : weights) {
    for (double v : w) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

double score_linear(const LinearModel& model, const SparseVector& phi_e, TypeId t) {
  if (t < 0 || t >= model.num_types()) {
    throw DataError("type id " + std::to_string(t) + " out of range for model with " +
                    std::to_string(model.num_types()) + " types");
  }
  if (phi_e.dim() != model.dim) {
    throw DataError("feature dimension " + std::to_string(phi_e.dim()) +
                    " does not match model dimension " + std::to_string(model.dim));
  }
  return dot_dense(model.weights[static_cast<std::size_t>(t)], phi_e);
}

double objective_value(const LinearModel& model, std::span<const Fact> positives,
                       const FeatureMatrix& features, const SampledNegatives& negatives,
                       const TrainConfig& cfg) {
  check_feature_dim(features, model);
  if (negatives.size() != positives.size()) {
    throw DataError("negative sets are not aligned with the positives");
  }
  const int k = cfg.loss_power;
  if (k != 1 && k != 2) throw UsageError("loss power must be 1 or 2");
  auto powk = [k](double x) { return k == 1 ? x : x * x; };

  double loss_entities = 0.0;
  double loss_types = 0.0;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const Fact& f = positives[i];
    const SparseVector& phi = features.row(f.entity);
    double s_pos = score_linear(model, phi, f.type);
    for (EntityId neg : negatives.entities[i]) {
      double s_neg = score_linear(model, features.row(neg), f.type);
      loss_entities += powk(hinge(s_neg - s_pos + 1.0));
    }
    for (TypeId neg : negatives.types[i]) {
      double s_neg = score_linear(model, phi, neg);
      loss_types += powk(hinge(s_neg - s_pos + 1.0));
    }
  }
  double reg = 0.0;
  if (k == 2) {
    for (const auto& w : model.weights) {
      reg += 0.5 * std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
    }
  }
  const double c = k == 1 ? 1.0 : cfg.regularization_c;
  return reg + c * (loss_types + loss_entities);
}

LinearModel train_linear_adagrad(std::span<const Fact> positives, const FeatureMatrix& features,
                                 const KBSnapshot& train, const TrainConfig& cfg) {
  if (cfg.loss_power != 1) throw UsageError("the Adagrad trainer uses loss power 1");
  cfg.negatives.validate();
  LinearModel model = LinearModel::zeros(train.num_types(), features.dim());
  std::vector<std::vector<double>> accum(model.weights.size(),
                                         std::vector<double>(features.dim(), 0.0));

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
      const SparseVector& phi = features.row(f.entity);
      auto& w_t = model.weights[static_cast<std::size_t>(f.type)];
      auto& g_t = accum[static_cast<std::size_t>(f.type)];
      for (EntityId neg : negs.entities[idx]) {
        ++step;
        const SparseVector& phi_neg = features.row(neg);
        if (dot_dense(w_t, phi) - dot_dense(w_t, phi_neg) - 1.0 < 0.0) {
          adagrad_update(w_t, g_t, subtract(phi_neg, phi), cfg.learning_rate,
                         cfg.adagrad_epsilon, step);
        }
      }
      for (TypeId neg : negs.types[idx]) {
        ++step;
        auto& w_neg = model.weights[static_cast<std::size_t>(neg)];
        if (dot_dense(w_t, phi) - dot_dense(w_neg, phi) - 1.0 < 0.0) {
          SparseVector minus_phi = phi;
          minus_phi.scale(-1.0);
          adagrad_update(w_t, g_t, minus_phi, cfg.learning_rate, cfg.adagrad_epsilon, step);
          adagrad_update(w_neg, accum[static_cast<std::size_t>(neg)], phi, cfg.learning_rate,
                         cfg.adagrad_epsilon, step);
        }
      }
    }
  }
  return model;
}

std::vector<DcdConstraint> build_dcd_constraints(std::span<const Fact> positives,
                                                 const FeatureMatrix& features,
                                                 const SampledNegatives& negatives) {
  if (negatives.size() != positives.size()) {
    throw DataError("negative sets are not aligned with the positives");
  }
  std::vector<DcdConstraint> constraints;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const Fact& f = positives[i];
    const SparseVector& phi = features.row(f.entity);
    for (EntityId neg : negatives.entities[i]) {
      SparseVector diff = subtract(phi, features.row(neg));
      double q = diff.squared_norm();
      if (q == 0.0) continue;  // degenerate pair, no information
      constraints.push_back({f.type, -1, std::move(diff), q});
    }
    double phi_sq = phi.squared_norm();
    for (TypeId neg : negatives.types[i]) {
      if (phi_sq == 0.0) continue;
      constraints.push_back({f.type, neg, phi, 2.0 * phi_sq});
    }
  }
  return constraints;
}

LinearModel train_linear_dcd(std::span<const Fact> positives, const FeatureMatrix& features,
                             const KBSnapshot& train, const TrainConfig& cfg, DcdTrace* trace) {
  if (cfg.loss_power != 2) throw UsageError("the DCD trainer uses loss power 2");
  if (cfg.regularization_c <= 0.0) throw UsageError("regularization constant C must be > 0");
  cfg.negatives.validate();
  LinearModel model = LinearModel::zeros(train.num_types(), features.dim());
  if (cfg.epochs == 0) return model;

  SampledNegatives negs = sample_all_negatives(positives, train, cfg.negatives, 0);
  std::vector<DcdConstraint> constraints = build_dcd_constraints(positives, features, negs);
  std::vector<double> alpha(constraints.size(), 0.0);
  const double inv_2c = 1.0 / (2.0 * cfg.regularization_c);

  auto theta_dot_x = [&model](const DcdConstraint& c) {
    double s = dot_dense(model.weights[static_cast<std::size_t>(c.type_pos)], c.x);
    if (c.type_neg >= 0) s -= dot_dense(model.weights[static_cast<std::size_t>(c.type_neg)], c.x);
    return s;
  };

  std::vector<std::size_t> order(constraints.size());
  std::iota(order.begin(), order.end(), 0);
  for (int sweep = 0; sweep < cfg.dcd_max_sweeps; ++sweep) {
    Rng rng(mix_seed(cfg.seed, kDcdSweepSalt, static_cast<std::uint64_t>(sweep)));
    rng.shuffle(order);
    double max_step = 0.0;
    for (std::size_t i : order) {
      const DcdConstraint& c = constraints[i];
      double gradient = theta_dot_x(c) - 1.0 + alpha[i] * inv_2c;
      double next = std::max(0.0, alpha[i] - gradient / (c.squared_norm + inv_2c));
      double delta = next - alpha[i];
      if (delta == 0.0) continue;
      alpha[i] = next;
      max_step = std::max(max_step, std::abs(delta));
      axpy(model.weights[static_cast<std::size_t>(c.type_pos)], delta, c.x);
      if (c.type_neg >= 0) {
        axpy(model.weights[static_cast<std::size_t>(c.type_neg)], -delta, c.x);
      }
    }
    if (trace != nullptr) {
      double theta_sq = 0.0;
      for (const auto& w : model.weights) {
        theta_sq += std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
      }
      double dual = 0.0;
      for (double a : alpha) dual += a - 0.5 * inv_2c * a * a;
      dual -= 0.5 * theta_sq;
      trace->dual_objective.push_back(dual);
      trace->sweeps = sweep + 1;
    }
    if (max_step < cfg.dcd_tolerance) {
      if (trace != nullptr) trace->converged = true;
      break;
    }
  }
  if (!model.all_finite()) throw NumericalError("DCD produced non-finite weights");
  return model;
}

std::int64_t count_hinge_violations(const LinearModel& model, std::span<const Fact> positives,
                                    const FeatureMatrix& features, const KBSnapshot& train) {
  check_feature_dim(features, model);
  std::int64_t violations = 0;
  for (const Fact& f : positives) {
    const SparseVector& phi = features.row(f.entity);
    double s_pos = score_linear(model, phi, f.type);
    for (EntityId e = 0; e < train.num_entities(); ++e) {
      if (e == f.entity || train.contains(e, f.type)) continue;
      if (s_pos - score_linear(model, features.row(e), f.type) - 1.0 < 0.0) ++violations;
    }
    for (TypeId t = 0; t < train.num_types(); ++t) {
      if (t == f.type || train.contains(f.entity, t)) continue;
      if (s_pos - score_linear(model, phi, t) - 1.0 < 0.0) ++violations;
    }
  }
  return violations;
}

}  // namespace kbc
