#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "kbc/vocab.hpp"

namespace kbc {

struct Prediction {
  EntityId entity;
  TypeId type;
  double score;
  bool label;
};

// AP over an already-ranked label sequence: mean of precision@i at each
// positive rank. Undefined (nullopt) when the list has no positive.
std::optional<double> average_precision(std::span<const std::uint8_t> ranked_labels);

// Descending score, ties broken by (ascending entity id, ascending type id).
// NaN scores are rejected.
std::vector<Prediction> rank_predictions(std::vector<Prediction> preds);

// Unweighted mean of per-type APs over types with at least one positive.
std::optional<double> mean_average_precision(std::span<const Prediction> preds);

// AP of the single pooled ranking across all pairs.
std::optional<double> global_average_precision(std::span<const Prediction> preds);

enum class GakNorm {
  kWindow,  // divide by the positives inside the top-k window
  kGlobal,  // divide by min(k, total positives)
};

// GAP restricted to the top k pooled predictions; 0.0 when the window (or
// the global denominator) holds no positive.
double gap_at_k(std::span<const Prediction> preds, std::int64_t k, GakNorm norm = GakNorm::kWindow);

struct EvalReport {
  std::optional<double> map;
  std::optional<double> gap;
  std::vector<std::pair<std::int64_t, double>> g_at_k;
  std::map<TypeId, double> per_type_ap;  // only types with a defined AP
  std::int64_t num_predictions = 0;
  std::int64_t num_positives = 0;
  std::int64_t num_negatives = 0;
  std::int64_t num_types = 0;
  std::int64_t num_types_with_positives = 0;
};

EvalReport evaluate_predictions(std::span<const Prediction> preds, std::span<const std::int64_t> ks,
                                GakNorm norm = GakNorm::kWindow);

}  // namespace kbc
