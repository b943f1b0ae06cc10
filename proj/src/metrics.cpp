#include "kbc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "kbc/errors.hpp"

namespace kbc {
namespace {

bool ranks_before(const Prediction& a, const Prediction& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.entity != b.entity) return a.entity < b.entity;
  return a.type < b.type;
}

void check_scores(std::span<const Prediction> preds) {
  for (const Prediction& p : preds) {
    if (std::isnan(p.score)) {
      throw DataError("NaN score for prediction (" + std::to_string(p.entity) + ", " +
                      std::to_string(p.type) + ")");
    }
  }
}

std::optional<double> ap_of_ranked(std::span<const Prediction> ranked) {
  std::int64_t positives = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].label) {
      ++positives;
      sum += static_cast<double>(positives) / static_cast<double>(i + 1);
    }
  }
  if (positives == 0) return std::nullopt;
  return sum / static_cast<double>(positives);
}

}  // namespace

std::optional<double> average_precision(std::span<const std::uint8_t> ranked_labels) {
  std::int64_t positives = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < ranked_labels.size(); ++i) {
    if (ranked_labels[i]) {
      ++positives;
      sum += static_cast<double>(positives) / static_cast<double>(i + 1);
    }
  }
  if (positives == 0) return std::nullopt;
  return sum / static_cast<double>(positives);
}

std::vector<Prediction> rank_predictions(std::vector<Prediction> preds) {
  check_scores(preds);
  std::sort(preds.begin(), preds.end(), ranks_before);
  return preds;
}

std::optional<double> mean_average_precision(std::span<const Prediction> preds) {
  EvalReport report = evaluate_predictions(preds, {});
  return report.map;
}

std::optional<double> global_average_precision(std::span<const Prediction> preds) {
  std::vector<Prediction> ranked = rank_predictions({preds.begin(), preds.end()});
  return ap_of_ranked(ranked);
}

double gap_at_k(std::span<const Prediction> preds, std::int64_t k, GakNorm norm) {
  if (k < 1) throw UsageError("k must be >= 1");
  std::vector<Prediction> ranked = rank_predictions({preds.begin(), preds.end()});
  std::int64_t total_positives = 0;
  for (const Prediction& p : ranked) total_positives += p.label ? 1 : 0;
  std::size_t window = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));

  std::int64_t window_positives = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    if (ranked[i].label) {
      ++window_positives;
      sum += static_cast<double>(window_positives) / static_cast<double>(i + 1);
    }
  }
  std::int64_t denom = norm == GakNorm::kWindow
                           ? window_positives
                           : std::min<std::int64_t>(k, total_positives);
  if (denom == 0) return 0.0;
  return sum / static_cast<double>(denom);
}

EvalReport evaluate_predictions(std::span<const Prediction> preds, std::span<const std::int64_t> ks,
                                GakNorm norm) {
  check_scores(preds);
  {
    std::set<std::pair<EntityId, TypeId>> seen;
    for (const Prediction& p : preds) {
      if (!seen.insert({p.entity, p.type}).second) {
        throw DataError("duplicate prediction for pair (" + std::to_string(p.entity) + ", " +
                        std::to_string(p.type) + ")");
      }
    }
  }

  EvalReport report;
  report.num_predictions = static_cast<std::int64_t>(preds.size());
  for (const Prediction& p : preds) {
    if (p.label) {
      ++report.num_positives;
    } else {
      ++report.num_negatives;
    }
  }

  // per-type ranking: group, rank within group, AP per group
  std::vector<Prediction> by_type(preds.begin(), preds.end());
  std::sort(by_type.begin(), by_type.end(), [](const Prediction& a, const Prediction& b) {
    if (a.type != b.type) return a.type < b.type;
    return ranks_before(a, b);
  });
  double ap_sum = 0.0;
  for (std::size_t begin = 0; begin < by_type.size();) {
    std::size_t end = begin;
    while (end < by_type.size() && by_type[end].type == by_type[begin].type) ++end;
    ++report.num_types;
    auto ap = ap_of_ranked(std::span<const Prediction>(by_type.data() + begin, end - begin));
    if (ap) {
      report.per_type_ap[by_type[begin].type] = *ap;
      ap_sum += *ap;
      ++report.num_types_with_positives;
    }
    begin = end;
  }
  if (report.num_types_with_positives > 0) {
    report.map = ap_sum / static_cast<double>(report.num_types_with_positives);
  }

  std::vector<Prediction> pooled = rank_predictions({preds.begin(), preds.end()});
  report.gap = ap_of_ranked(pooled);
  for (std::int64_t k : ks) report.g_at_k.emplace_back(k, gap_at_k(preds, k, norm));
  return report;
}

}  // namespace kbc
