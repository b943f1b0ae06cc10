#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kbc/embedding.hpp"
#include "kbc/features.hpp"
#include "kbc/linear.hpp"
#include "kbc/vocab.hpp"

namespace kbc {

// All numeric text output uses 9 significant digits for cross-platform diffs.
std::string format_g9(double x);
// The value format_g9 would round-trip to; applied to JSON payloads as well.
double round_9sig(double x);

std::string sha256_file_hex(const std::filesystem::path& path);

// ---- line-oriented TSV files ------------------------------------------------

// `\t`, `\n` and `\\` escaping for free-text fields.
std::string escape_text(std::string_view text);
std::string unescape_text(std::string_view text);  // DataError on bad escapes

void write_facts_file(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& facts);

struct TestSetRow {
  std::string entity;
  std::string type;
  bool label;
};
std::vector<TestSetRow> read_test_set_file(const std::filesystem::path& path);
void write_test_set_file(const std::filesystem::path& path, const std::vector<TestSetRow>& rows);

// `entity<TAB>escaped text`, one document per entity
std::vector<std::pair<std::string, std::string>> read_text_corpus_file(
    const std::filesystem::path& path);
void write_text_corpus_file(const std::filesystem::path& path,
                            const std::vector<std::pair<std::string, std::string>>& docs);

struct TypeListEntry {
  std::string symbol;
  std::int64_t train_count;
};
std::vector<TypeListEntry> read_types_file(const std::filesystem::path& path);
void write_types_file(const std::filesystem::path& path, const std::vector<TypeListEntry>& types);

struct PredictionRow {
  std::string entity;
  std::string type;
  double score;
};
std::vector<PredictionRow> read_predictions_file(const std::filesystem::path& path);
void write_predictions_file(const std::filesystem::path& path,
                            const std::vector<PredictionRow>& rows);

// ---- feature matrix ---------------------------------------------------------
// Header lines `dim<TAB>D` and `block<TAB>NAME<TAB>OFFSET<TAB>WIDTH`, then one
// `row<TAB>entity<TAB>idx:weight idx:weight ...` line per entity.

void write_feature_matrix_file(const std::filesystem::path& path, const FeatureMatrix& features,
                               const Vocab& entities);

struct LoadedFeatures {
  FeatureMatrix matrix;
  std::shared_ptr<Vocab> entities;
};
// Interns row symbols into `entities` (creating it when null).
LoadedFeatures read_feature_matrix_file(const std::filesystem::path& path,
                                        std::shared_ptr<Vocab> entities = nullptr);

// ---- model files ------------------------------------------------------------

struct LinearModelFile {
  std::string algorithm;  // "linear.adagrad" or "linear.dcd"
  std::vector<std::string> type_symbols;
  LinearModel model;
  std::string config_echo;  // JSON echo of the train configuration
};
void write_linear_model_file(const std::filesystem::path& path, const LinearModelFile& file);
LinearModelFile read_linear_model_file(const std::filesystem::path& path);

struct EmbeddingModelFile {
  std::vector<std::string> type_symbols;
  EmbeddingModel model;
  std::string config_echo;
};
void write_embedding_model_file(const std::filesystem::path& path, const EmbeddingModelFile& file);
EmbeddingModelFile read_embedding_model_file(const std::filesystem::path& path);

std::string train_config_echo(const std::string& algorithm, const TrainConfig& cfg,
                              std::int32_t embed_dim);

}  // namespace kbc
