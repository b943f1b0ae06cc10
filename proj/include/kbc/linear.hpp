#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kbc/features.hpp"
#include "kbc/sampler.hpp"
#include "kbc/snapshot.hpp"
#include "kbc/sparse.hpp"

namespace kbc {

// One weight vector per type over the entity feature space.
struct LinearModel {
  std::uint32_t dim = 0;
  std::vector<std::vector<double>> weights;  // [type][feature]

  static LinearModel zeros(std::int32_t num_types, std::uint32_t dim);
  std::int32_t num_types() const { return static_cast<std::int32_t>(weights.size()); }
  bool all_finite() const;
};

enum class NegativeMode { kResampleEachEpoch, kFixed };

struct TrainConfig {
  int loss_power = 1;               // hinge power k; 1 for Adagrad, 2 for DCD
  double regularization_c = 1.0;    // C; DCD only
  double learning_rate = 0.1;       // Adagrad eta
  double adagrad_epsilon = 1e-8;
  int epochs = 5;
  NegativeConfig negatives;
  std::uint64_t seed = 0;
  NegativeMode negative_mode = NegativeMode::kResampleEachEpoch;
  double dcd_tolerance = 1e-6;      // stop when the largest dual step falls below
  int dcd_max_sweeps = 200;
};

// s(e, t) = w_t . phi(e).
double score_linear(const LinearModel& model, const SparseVector& phi_e, TypeId t);

// Reg(theta) + C * (L_T + L_E) over the fixed negative sets, with hinge power
// cfg.loss_power. Reg is the L2 term for k=2 and zero for the k=1
// configuration.
double objective_value(const LinearModel& model, std::span<const Fact> positives,
                       const FeatureMatrix& features, const SampledNegatives& negatives,
                       const TrainConfig& cfg);

// Online trainer: per-coordinate Adagrad on the L1 hinge, no regularizer.
// Positives are shuffled per epoch; negatives are resampled per epoch unless
// cfg.negative_mode is kFixed.
LinearModel train_linear_adagrad(std::span<const Fact> positives, const FeatureMatrix& features,
                                 const KBSnapshot& train, const TrainConfig& cfg);

// One ranking constraint of the batch problem, expressed in the stacked
// per-type weight space: block type_pos receives +x, block type_neg (negative
// type pairs only) receives -x.
struct DcdConstraint {
  TypeId type_pos;
  TypeId type_neg = -1;  // -1 when the constraint compares entities
  SparseVector x;        // phi(e) - phi(e') for entity pairs, phi(e) for type pairs
  double squared_norm;   // x_i . x_i in the stacked space
};

std::vector<DcdConstraint> build_dcd_constraints(std::span<const Fact> positives,
                                                 const FeatureMatrix& features,
                                                 const SampledNegatives& negatives);

struct DcdTrace {
  std::vector<double> dual_objective;  // value after each sweep
  int sweeps = 0;
  bool converged = false;
};

// Batch solver: dual coordinate descent on the L2-hinge objective with L2
// regularizer, sweeping constraints in seeded random permutations until the
// largest dual update drops below cfg.dcd_tolerance. Negatives are drawn once
// and frozen. Globally optimal for the convex problem.
LinearModel train_linear_dcd(std::span<const Fact> positives, const FeatureMatrix& features,
                             const KBSnapshot& train, const TrainConfig& cfg,
                             DcdTrace* trace = nullptr);

// Hinge violations of the trained model counted over the complete eligible
// negative sets (every eligible entity and type per positive).
std::int64_t count_hinge_violations(const LinearModel& model, std::span<const Fact> positives,
                                    const FeatureMatrix& features, const KBSnapshot& train);

}  // namespace kbc
