#include "kbc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <unordered_map>

#include "CLI11.hpp"
#include "kbc/dataset.hpp"
#include "kbc/embedding.hpp"
#include "kbc/errors.hpp"
#include "kbc/features.hpp"
#include "kbc/io.hpp"
#include "kbc/linear.hpp"
#include "kbc/manifest.hpp"
#include "kbc/metrics.hpp"
#include "kbc/parallel.hpp"
#include "kbc/sampler.hpp"
#include "kbc/snapshot.hpp"
#include "kbc/synth.hpp"
#include "nlohmann/json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kbc {
namespace {

// --config file.json: a flat JSON object of flag values, e.g.
// {"num-types": 70, "seed": 7}. Values are injected as flags before parsing;
// flags given explicitly on the command line win.
void apply_config_file(std::vector<std::string>& args) {
  std::string file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string_view arg = args[i];
    if (arg == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file path");
      file = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (arg.rfind("--config=", 0) == 0) {
      file = std::string(arg.substr(9));
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      continue;
    }
    break;
  }
  if (file.empty()) return;

  std::ifstream in(file);
  if (!in) throw DataError("cannot open config file: " + file);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("config file " + file + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw DataError("config file must hold a flat JSON object");
  for (const auto& [key, value] : j.items()) {
    std::string flag = "--" + key;
    bool given = false;
    for (const std::string& arg : args) {
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) {
        given = true;
        break;
      }
    }
    if (given || value.is_null()) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_string()) {
      args.push_back(flag);
      args.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      args.push_back(flag);
      args.push_back(value.dump());
    } else {
      throw UsageError("config value for '" + key + "' must be a scalar");
    }
  }
}

class ManifestBuilder {
 public:
  ManifestBuilder(std::string command, std::vector<std::string> args, std::uint64_t seed) {
    manifest_.command = std::move(command);
    manifest_.args = std::move(args);
    manifest_.seed = seed;
  }

  void add_input(const fs::path& path) {
    manifest_.inputs[path.string()] = sha256_file_hex(path);
  }
  void add_output(const fs::path& path) {
    manifest_.outputs[path.string()] = sha256_file_hex(path);
  }

  void write(const fs::path& path) {
    auto elapsed = std::chrono::steady_clock::now() - start_;
    manifest_.duration_seconds = std::chrono::duration<double>(elapsed).count();
    write_manifest(path, manifest_);
  }

 private:
  Manifest manifest_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<std::string> manifest_args(const std::vector<std::string>& original) {
  if (original.empty()) return {};
  return {original.begin() + 1, original.end()};
}

// two-column entity/type candidate files for predict --pairs
std::vector<std::pair<std::string, std::string>> read_pair_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pairs file: " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected entity<TAB>type");
    }
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

// ---------------------------------------------------------------- synth ----

struct SynthOpts {
  std::string out_dir;
  SynthConfig cfg;
};

void run_synth(const SynthOpts& opts, const std::vector<std::string>& args) {
  ManifestBuilder manifest("synth", args, opts.cfg.seed);
  SynthOutput out = generate_synthetic(opts.cfg);
  fs::path dir(opts.out_dir);
  fs::create_directories(dir);
  write_facts_file(dir / "train_snapshot.tsv", out.train_facts);
  write_facts_file(dir / "test_snapshot.tsv", out.test_facts);
  write_text_corpus_file(dir / "text.tsv", out.documents);
  manifest.add_output(dir / "train_snapshot.tsv");
  manifest.add_output(dir / "test_snapshot.tsv");
  manifest.add_output(dir / "text.tsv");
  manifest.write(dir / "manifest.json");
  std::cerr << "synth: " << out.train_facts.size() << " train facts, " << out.test_facts.size()
            << " test facts, " << out.documents.size() << " documents -> " << dir.string() << "\n";
}

// -------------------------------------------------------- build-dataset ----

struct BuildDatasetOpts {
  std::string train_snapshot;
  std::string test_snapshot;
  std::int32_t num_types = 0;
  DatasetConfig cfg;
  bool strict_vocab = false;
  std::string out_dir;
};

void run_build_dataset(const BuildDatasetOpts& opts, const std::vector<std::string>& args) {
  ManifestBuilder manifest("build-dataset", args, opts.cfg.seed);
  auto entities = std::make_shared<Vocab>();
  auto type_vocab = std::make_shared<Vocab>();
  KBSnapshot train = load_snapshot_file(opts.train_snapshot, entities, type_vocab);
  KBSnapshot test = load_snapshot_file(opts.test_snapshot, entities, type_vocab,
                                       opts.strict_vocab ? VocabMode::kReject : VocabMode::kExtend);
  manifest.add_input(opts.train_snapshot);
  manifest.add_input(opts.test_snapshot);

  std::vector<TypeId> types = select_top_types(train, opts.num_types);
  std::vector<Fact> positives = build_training_positives(train, types);
  DatasetConfig cfg = opts.cfg;
  cfg.num_types = opts.num_types;
  std::vector<LabeledExample> test_set = build_test_set(train, test, types, cfg);
  DatasetStats stats = dataset_stats(positives, test_set, entities->size());

  fs::path dir(opts.out_dir);
  fs::create_directories(dir);

  std::vector<std::pair<std::string, std::string>> positive_rows;
  positive_rows.reserve(positives.size());
  for (const Fact& f : positives) {
    positive_rows.emplace_back(entities->symbol(f.entity), type_vocab->symbol(f.type));
  }
  write_facts_file(dir / "train_positives.tsv", positive_rows);

  std::vector<TypeListEntry> type_rows;
  for (TypeId t : types) type_rows.push_back({type_vocab->symbol(t), train.count_for_type(t)});
  write_types_file(dir / "types.tsv", type_rows);

  std::vector<TestSetRow> test_rows;
  test_rows.reserve(test_set.size());
  for (const LabeledExample& ex : test_set) {
    test_rows.push_back({entities->symbol(ex.entity), type_vocab->symbol(ex.type), ex.label});
  }
  write_test_set_file(dir / "test_set.tsv", test_rows);

  json j;
  j["num_entities"] = stats.num_entities;
  j["num_positive_train"] = stats.num_positive_train;
  j["num_positive_test"] = stats.num_positive_test;
  j["num_negative_test"] = stats.num_negative_test;
  j["neg_pos_ratio"] = stats.neg_pos_ratio ? json(round_9sig(*stats.neg_pos_ratio)) : json();
  j["max_positives_per_type"] = stats.max_positives_per_type;
  j["min_positives_per_type"] = stats.min_positives_per_type;
  {
    std::ofstream out(dir / "stats.json", std::ios::binary);
    if (!out) throw DataError("cannot write stats.json");
    out << j.dump(2) << '\n';
  }

  for (const char* name : {"train_positives.tsv", "types.tsv", "test_set.tsv", "stats.json"}) {
    manifest.add_output(dir / name);
  }
  manifest.write(dir / "manifest.json");
  std::cerr << "build-dataset: " << stats.num_positive_train << " train positives, "
            << stats.num_positive_test << " test positives, " << stats.num_negative_test
            << " test negatives -> " << dir.string() << "\n";
}

// ------------------------------------------------------------ featurize ----

struct FeaturizeOpts {
  std::string train_snapshot;
  std::string types_path;
  std::string descriptions;
  std::string wikipedia;
  std::string blocks;  // comma-separated subset of T,D,W; default: all available
  std::int64_t min_df = 2;
  int threads = 1;
  std::string out;
};

void run_featurize(const FeaturizeOpts& opts, const std::vector<std::string>& args) {
  ManifestBuilder manifest("featurize", args, 0);
  auto entities = std::make_shared<Vocab>();
  auto type_vocab = std::make_shared<Vocab>();
  KBSnapshot train = load_snapshot_file(opts.train_snapshot, entities, type_vocab);
  manifest.add_input(opts.train_snapshot);
  manifest.add_input(opts.types_path);

  std::vector<TypeId> types;
  for (const TypeListEntry& entry : read_types_file(opts.types_path)) {
    auto t = type_vocab->find(entry.symbol);
    if (!t) throw DataError("type '" + entry.symbol + "' does not occur in the train snapshot");
    types.push_back(*t);
  }

  std::vector<char> block_names;
  if (opts.blocks.empty()) {
    block_names.push_back('T');
    if (!opts.descriptions.empty()) block_names.push_back('D');
    if (!opts.wikipedia.empty()) block_names.push_back('W');
  } else {
    for (const std::string& tok : CLI::detail::split(opts.blocks, ',')) {
      if (tok.size() != 1 || (tok[0] != 'T' && tok[0] != 'D' && tok[0] != 'W')) {
        throw UsageError("--blocks takes a comma-separated subset of T,D,W");
      }
      block_names.push_back(tok[0]);
    }
  }
  auto wants = [&](char b) {
    return std::find(block_names.begin(), block_names.end(), b) != block_names.end();
  };
  if (wants('D') && opts.descriptions.empty()) {
    throw UsageError("block D requires --descriptions");
  }
  if (wants('W') && opts.wikipedia.empty()) {
    throw UsageError("block W requires --wikipedia");
  }

  auto load_corpus = [&](const std::string& path) {
    std::vector<std::pair<EntityId, std::string>> docs;
    for (auto& [symbol, text] : read_text_corpus_file(path)) {
      docs.emplace_back(entities->intern(symbol), std::move(text));
    }
    manifest.add_input(path);
    return docs;
  };
  std::vector<std::pair<EntityId, std::string>> docs_d, docs_w;
  TextVocabulary vocab_d, vocab_w;
  if (wants('D')) {
    docs_d = load_corpus(opts.descriptions);
    vocab_d = TextVocabulary::build(docs_d, opts.min_df);
  }
  if (wants('W')) {
    docs_w = load_corpus(opts.wikipedia);
    vocab_w = TextVocabulary::build(docs_w, opts.min_df);
  }

  std::vector<std::pair<char, std::uint32_t>> widths;
  for (char b : block_names) {
    if (b == 'T') widths.emplace_back('T', static_cast<std::uint32_t>(types.size()));
    if (b == 'D') widths.emplace_back('D', vocab_d.size());
    if (b == 'W') widths.emplace_back('W', vocab_w.size());
  }
  FeatureSpace space = FeatureSpace::make(widths);

  std::unordered_map<EntityId, const std::string*> text_d, text_w;
  for (const auto& [e, text] : docs_d) text_d[e] = &text;
  for (const auto& [e, text] : docs_w) text_w[e] = &text;

  const std::int32_t num_entities = entities->size();
  std::vector<SparseVector> rows(static_cast<std::size_t>(num_entities));
  parallel_for(num_entities, opts.threads, [&](std::int64_t i) {
    EntityId e = static_cast<EntityId>(i);
    std::vector<std::pair<char, SparseVector>> parts;
    for (char b : block_names) {
      if (b == 'T') {
        parts.emplace_back('T', type_feature_vector(e, train, types));
      } else if (b == 'D') {
        auto it = text_d.find(e);
        parts.emplace_back('D', it == text_d.end() ? SparseVector(vocab_d.size())
                                                   : tfidf_vector(*it->second, vocab_d));
      } else {
        auto it = text_w.find(e);
        parts.emplace_back('W', it == text_w.end() ? SparseVector(vocab_w.size())
                                                   : tfidf_vector(*it->second, vocab_w));
      }
    }
    rows[static_cast<std::size_t>(i)] = compose_entity_features(parts, space);
  });

  FeatureMatrix matrix(space);
  for (EntityId e = 0; e < num_entities; ++e) {
    matrix.set_row(e, std::move(rows[static_cast<std::size_t>(e)]));
  }
  write_feature_matrix_file(opts.out, matrix, *entities);
  manifest.add_output(opts.out);
  manifest.write(opts.out + ".manifest.json");
  std::cerr << "featurize: " << num_entities << " entities, dim " << space.total_dim() << " -> "
            << opts.out << "\n";
}

// ---------------------------------------------------------------- train ----

struct TrainOpts {
  std::string positives;
  std::string features;
  std::string types_path;
  std::string algo;
  TrainConfig cfg;
  std::int32_t embed_dim = 50;
  std::string negative_mode;  // "", "resample" or "fixed"
  std::string out;
};

void run_train(const TrainOpts& opts, const std::vector<std::string>& args) {
  ManifestBuilder manifest("train", args, opts.cfg.seed);
  LoadedFeatures loaded = read_feature_matrix_file(opts.features);
  manifest.add_input(opts.features);

  auto type_vocab = std::make_shared<Vocab>();
  std::vector<std::string> type_symbols;
  for (const TypeListEntry& entry : read_types_file(opts.types_path)) {
    type_vocab->intern(entry.symbol);
    type_symbols.push_back(entry.symbol);
  }
  if (type_vocab->size() != static_cast<std::int32_t>(type_symbols.size())) {
    throw DataError("duplicate type symbols in " + opts.types_path);
  }
  manifest.add_input(opts.types_path);

  const std::int32_t num_types = type_vocab->size();
  KBSnapshot train_view = load_snapshot_file(opts.positives, loaded.entities, type_vocab);
  if (type_vocab->size() != num_types) {
    throw DataError("training positives use types missing from " + opts.types_path);
  }
  manifest.add_input(opts.positives);

  TrainConfig cfg = opts.cfg;
  cfg.negatives.seed = cfg.seed;
  if (!opts.negative_mode.empty()) {
    if (opts.negative_mode == "resample") {
      cfg.negative_mode = NegativeMode::kResampleEachEpoch;
    } else if (opts.negative_mode == "fixed") {
      cfg.negative_mode = NegativeMode::kFixed;
    } else {
      throw UsageError("--negatives must be 'resample' or 'fixed'");
    }
  }

  const std::vector<Fact>& positives = train_view.facts();
  if (opts.algo == "linear.adagrad" || opts.algo == "linear.dcd") {
    LinearModel model;
    if (opts.algo == "linear.adagrad") {
      cfg.loss_power = 1;
      model = train_linear_adagrad(positives, loaded.matrix, train_view, cfg);
    } else {
      cfg.loss_power = 2;
      model = train_linear_dcd(positives, loaded.matrix, train_view, cfg);
    }
    write_linear_model_file(opts.out, {opts.algo, type_symbols, std::move(model),
                                       train_config_echo(opts.algo, cfg, 0)});
  } else if (opts.algo == "embedding") {
    cfg.loss_power = 1;
    EmbeddingModel model = train_embedding(positives, loaded.matrix,
                                           one_hot_type_features(num_types), train_view, cfg,
                                           opts.embed_dim);
    write_embedding_model_file(opts.out, {type_symbols, std::move(model),
                                          train_config_echo("embedding", cfg, opts.embed_dim)});
  } else {
    throw UsageError("--algo must be linear.adagrad, linear.dcd or embedding");
  }
  manifest.add_output(opts.out);
  manifest.write(opts.out + ".manifest.json");
  std::cerr << "train: " << opts.algo << " on " << positives.size() << " positives -> " << opts.out
            << "\n";
}

// -------------------------------------------------------------- predict ----

struct PredictOpts {
  std::string model;
  std::string features;
  std::string test_set;
  std::string pairs;
  std::int64_t top_k = 0;
  int threads = 1;
  std::string out;
};

std::string peek_model_algorithm(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("#algo\t", 0) == 0) return line.substr(6);
    if (line[0] != '#') break;
  }
  throw DataError(path.string() + ": missing algo header");
}

void run_predict(const PredictOpts& opts, const std::vector<std::string>& args) {
  ManifestBuilder manifest("predict", args, 0);
  LoadedFeatures loaded = read_feature_matrix_file(opts.features);
  manifest.add_input(opts.features);
  manifest.add_input(opts.model);

  std::vector<std::pair<std::string, std::string>> candidates;
  if (!opts.test_set.empty()) {
    for (const TestSetRow& row : read_test_set_file(opts.test_set)) {
      candidates.emplace_back(row.entity, row.type);
    }
    manifest.add_input(opts.test_set);
  } else {
    candidates = read_pair_file(opts.pairs);
    manifest.add_input(opts.pairs);
  }

  std::string algo = peek_model_algorithm(opts.model);
  std::vector<std::string> type_symbols;
  std::unordered_map<std::string, TypeId> type_index;
  LinearModel linear;
  EmbeddingModel embedding;
  if (algo == "embedding") {
    EmbeddingModelFile file = read_embedding_model_file(opts.model);
    if (file.model.entity_dim != loaded.matrix.dim()) {
      throw DataError("model entity dimension " + std::to_string(file.model.entity_dim) +
                      " does not match feature file dimension " +
                      std::to_string(loaded.matrix.dim()));
    }
    type_symbols = std::move(file.type_symbols);
    embedding = std::move(file.model);
  } else {
    LinearModelFile file = read_linear_model_file(opts.model);
    if (file.model.dim != loaded.matrix.dim()) {
      throw DataError("model dimension " + std::to_string(file.model.dim) +
                      " does not match feature file dimension " +
                      std::to_string(loaded.matrix.dim()));
    }
    type_symbols = std::move(file.type_symbols);
    linear = std::move(file.model);
  }
  for (std::size_t i = 0; i < type_symbols.size(); ++i) {
    type_index[type_symbols[i]] = static_cast<TypeId>(i);
  }

  // validate types up front so the parallel pass cannot fail on lookups
  {
    std::vector<std::string> offenders;
    for (const auto& [esym, tsym] : candidates) {
      if (!type_index.contains(tsym)) {
        offenders.push_back(esym + "\t" + tsym);
        if (offenders.size() >= 10) break;
      }
    }
    if (!offenders.empty()) {
      std::string msg = "candidate types unknown to the model:";
      for (const std::string& o : offenders) msg += "\n  " + o;
      throw DataError(msg);
    }
  }

  // per-entity projections make one-hot embedding scoring a d-dim dot product
  std::unordered_map<std::string, std::vector<double>> projection;
  if (algo == "embedding") {
    for (const auto& [esym, tsym] : candidates) {
      if (projection.contains(esym)) continue;
      auto e = loaded.entities->find(esym);
      std::vector<double> u_phi(static_cast<std::size_t>(embedding.embed_dim), 0.0);
      if (e) {
        const SparseVector& phi = loaded.matrix.row(*e);
        for (const auto& entry : phi.entries()) {
          for (std::int32_t i = 0; i < embedding.embed_dim; ++i) {
            u_phi[static_cast<std::size_t>(i)] += entry.value * embedding.u_at(entry.index, i);
          }
        }
      }
      projection.emplace(esym, std::move(u_phi));
    }
  }

  const SparseVector empty_row(loaded.matrix.dim());
  std::vector<PredictionRow> rows(candidates.size());
  parallel_for(static_cast<std::int64_t>(candidates.size()), opts.threads, [&](std::int64_t i) {
    const auto& [esym, tsym] = candidates[static_cast<std::size_t>(i)];
    TypeId t = type_index.at(tsym);
    double score = 0.0;
    if (algo == "embedding") {
      const std::vector<double>& u_phi = projection.at(esym);
      for (std::int32_t d = 0; d < embedding.embed_dim; ++d) {
        score += u_phi[static_cast<std::size_t>(d)] *
                 embedding.v_at(static_cast<std::uint32_t>(t), d);
      }
    } else {
      auto e = loaded.entities->find(esym);
      const SparseVector& phi = e ? loaded.matrix.row(*e) : empty_row;
      score = score_linear(linear, phi, t);
    }
    rows[static_cast<std::size_t>(i)] = {esym, tsym, score};
  });

  if (opts.top_k > 0) {
    std::sort(rows.begin(), rows.end(), [](const PredictionRow& a, const PredictionRow& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.entity != b.entity) return a.entity < b.entity;
      return a.type < b.type;
    });
    if (static_cast<std::int64_t>(rows.size()) > opts.top_k) {
      rows.resize(static_cast<std::size_t>(opts.top_k));
    }
  }
  write_predictions_file(opts.out, rows);
  manifest.add_output(opts.out);
  manifest.write(opts.out + ".manifest.json");
  std::cerr << "predict: " << rows.size() << " scored pairs -> " << opts.out << "\n";
}

// ------------------------------------------------------------- evaluate ----

struct EvaluateOpts {
  std::string predictions;
  std::string test_set;
  std::string metrics = "map,gap";
  std::string gak_norm = "window";
  std::string out;
};

void run_evaluate(const EvaluateOpts& opts, const std::vector<std::string>& args) {
  ManifestBuilder manifest("evaluate", args, 0);
  std::vector<TestSetRow> gold = read_test_set_file(opts.test_set);
  std::vector<PredictionRow> pred_rows = read_predictions_file(opts.predictions);
  manifest.add_input(opts.test_set);
  manifest.add_input(opts.predictions);

  std::vector<std::int64_t> ks;
  for (const std::string& tok : CLI::detail::split(opts.metrics, ',')) {
    if (tok == "map" || tok == "gap" || tok.empty()) continue;
    if (tok.rfind("g@", 0) == 0) {
      std::int64_t k = 0;
      try {
        k = std::stoll(tok.substr(2));
      } catch (...) {
        throw UsageError("bad metric token '" + tok + "'");
      }
      if (k < 1) throw UsageError("g@k requires k >= 1");
      ks.push_back(k);
    } else {
      throw UsageError("unknown metric '" + tok + "' (expected map, gap or g@K)");
    }
  }
  GakNorm norm;
  if (opts.gak_norm == "window") {
    norm = GakNorm::kWindow;
  } else if (opts.gak_norm == "global") {
    norm = GakNorm::kGlobal;
  } else {
    throw UsageError("--gak-norm must be 'window' or 'global'");
  }

  std::map<std::pair<std::string, std::string>, bool> labels;
  for (const TestSetRow& row : gold) {
    if (!labels.emplace(std::make_pair(row.entity, row.type), row.label).second) {
      throw DataError("duplicate test-set pair " + row.entity + "\t" + row.type);
    }
  }

  // ids follow sorted symbol order so ranking tie-breaks are input-order free
  auto entity_vocab = std::make_shared<Vocab>();
  auto type_vocab = std::make_shared<Vocab>();
  {
    std::set<std::string> entity_syms, type_syms;
    for (const PredictionRow& row : pred_rows) {
      entity_syms.insert(row.entity);
      type_syms.insert(row.type);
    }
    for (const std::string& s : entity_syms) entity_vocab->intern(s);
    for (const std::string& s : type_syms) type_vocab->intern(s);
  }

  std::vector<Prediction> preds;
  preds.reserve(pred_rows.size());
  std::vector<std::string> offenders;
  for (const PredictionRow& row : pred_rows) {
    auto it = labels.find(std::make_pair(row.entity, row.type));
    if (it == labels.end()) {
      offenders.push_back(row.entity + "\t" + row.type);
      if (offenders.size() >= 10) break;
      continue;
    }
    preds.push_back({*entity_vocab->find(row.entity), *type_vocab->find(row.type), row.score,
                     it->second});
  }
  if (!offenders.empty()) {
    std::string msg = "predictions for pairs absent from the test set:";
    for (const std::string& o : offenders) msg += "\n  " + o;
    throw DataError(msg);
  }

  EvalReport report = evaluate_predictions(preds, ks, norm);

  json j;
  j["map"] = report.map ? json(round_9sig(*report.map)) : json();
  j["gap"] = report.gap ? json(round_9sig(*report.gap)) : json();
  json gk = json::object();
  for (const auto& [k, v] : report.g_at_k) gk[std::to_string(k)] = round_9sig(v);
  j["g_at_k"] = gk;
  json per_type = json::object();
  for (const auto& [t, ap] : report.per_type_ap) per_type[type_vocab->symbol(t)] = round_9sig(ap);
  j["per_type_ap"] = per_type;
  j["num_predictions"] = report.num_predictions;
  j["num_positives"] = report.num_positives;
  j["num_negatives"] = report.num_negatives;
  j["num_types"] = report.num_types;
  j["num_types_with_positives"] = report.num_types_with_positives;
  {
    fs::path out_path(opts.out);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write report: " + opts.out);
    out << j.dump(2) << '\n';
  }
  manifest.add_output(opts.out);
  manifest.write(opts.out + ".manifest.json");

  std::cout << "map=" << (report.map ? format_g9(*report.map) : "undefined")
            << " gap=" << (report.gap ? format_g9(*report.gap) : "undefined");
  for (const auto& [k, v] : report.g_at_k) std::cout << " g@" << k << "=" << format_g9(v);
  std::cout << "\n";
}

// ---------------------------------------------------------------- rerun ----

struct RerunOpts {
  std::string manifest_path;
  bool verify = false;
};

int run_rerun(const RerunOpts& opts) {
  Manifest m = read_manifest(opts.manifest_path);
  std::vector<std::string> args;
  args.push_back(m.command);
  args.insert(args.end(), m.args.begin(), m.args.end());
  int rc = dispatch_command(args);
  if (rc != 0) return rc;
  if (opts.verify) {
    std::vector<std::string> mismatches;
    for (const auto& [path, digest] : m.outputs) {
      if (sha256_file_hex(path) != digest) mismatches.push_back(path);
    }
    if (!mismatches.empty()) {
      std::string msg = "rerun did not reproduce:";
      for (const std::string& p : mismatches) msg += "\n  " + p;
      throw DataError(msg);
    }
    std::cerr << "rerun: verified " << m.outputs.size() << " outputs\n";
  }
  return 0;
}

void add_json_config(CLI::App* sub) {
  // consumed by apply_config_file before parsing; registered for the help text
  sub->add_option("--config")->description("Flat JSON file of flag values")->type_name("FILE");
}

}  // namespace

int dispatch_command(std::vector<std::string> args) {
  const std::vector<std::string> original = args;
  try {
    apply_config_file(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
  CLI::App app{"knowledge-base completion toolkit", "kbc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SynthOpts synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic snapshot pair and corpus");
  synth_cmd->add_option("--out-dir", synth.out_dir)->required();
  synth_cmd->add_option("--entities", synth.cfg.entities)->required();
  synth_cmd->add_option("--types", synth.cfg.types)->required();
  synth_cmd->add_option("--clusters", synth.cfg.clusters)->required();
  synth_cmd->add_option("--missing-rate", synth.cfg.missing_rate)->required();
  synth_cmd->add_option("--seed", synth.cfg.seed)->envname("KBC_SEED");
  synth_cmd->add_option("--tokens-per-doc", synth.cfg.tokens_per_doc);
  synth_cmd->add_option("--text-noise", synth.cfg.text_noise);
  add_json_config(synth_cmd);
  synth_cmd->callback([&] { run_synth(synth, manifest_args(original)); });

  BuildDatasetOpts build;
  auto* build_cmd = app.add_subcommand("build-dataset", "Derive train/test data from two snapshots");
  build_cmd->add_option("--train-snapshot", build.train_snapshot)->required();
  build_cmd->add_option("--test-snapshot", build.test_snapshot)->required();
  build_cmd->add_option("--num-types", build.num_types)->required();
  build_cmd->add_option("--extra-negative-fraction", build.cfg.extra_negative_fraction);
  build_cmd->add_option("--seed", build.cfg.seed)->envname("KBC_SEED");
  build_cmd->add_flag("--strict-vocab", build.strict_vocab,
                      "Reject symbols missing from the train snapshot");
  build_cmd->add_option("--out-dir", build.out_dir)->required();
  add_json_config(build_cmd);
  build_cmd->callback([&] { run_build_dataset(build, manifest_args(original)); });

  FeaturizeOpts feat;
  auto* feat_cmd = app.add_subcommand("featurize", "Build sparse entity features");
  feat_cmd->add_option("--train-snapshot", feat.train_snapshot)->required();
  feat_cmd->add_option("--types", feat.types_path)->required();
  feat_cmd->add_option("--descriptions", feat.descriptions);
  feat_cmd->add_option("--wikipedia", feat.wikipedia);
  feat_cmd->add_option("--blocks", feat.blocks);
  feat_cmd->add_option("--min-df", feat.min_df);
  feat_cmd->add_option("--threads", feat.threads);
  feat_cmd->add_option("--out", feat.out)->required();
  add_json_config(feat_cmd);
  feat_cmd->callback([&] { run_featurize(feat, manifest_args(original)); });

  TrainOpts train;
  auto* train_cmd = app.add_subcommand("train", "Train a ranking model");
  train_cmd->add_option("--positives", train.positives)->required();
  train_cmd->add_option("--features", train.features)->required();
  train_cmd->add_option("--types", train.types_path)->required();
  train_cmd->add_option("--algo", train.algo)->required();
  train_cmd->add_option("--m", train.cfg.negatives.m);
  train_cmd->add_option("--n", train.cfg.negatives.n);
  train_cmd->add_option("--epochs", train.cfg.epochs);
  auto* opt_lr = train_cmd->add_option("--learning-rate", train.cfg.learning_rate);
  auto* opt_eps = train_cmd->add_option("--adagrad-epsilon", train.cfg.adagrad_epsilon);
  auto* opt_c = train_cmd->add_option("--C", train.cfg.regularization_c);
  auto* opt_tol = train_cmd->add_option("--dcd-tolerance", train.cfg.dcd_tolerance);
  auto* opt_sweeps = train_cmd->add_option("--dcd-max-sweeps", train.cfg.dcd_max_sweeps);
  auto* opt_dim = train_cmd->add_option("--embed-dim", train.embed_dim);
  auto* opt_mode = train_cmd->add_option("--negatives", train.negative_mode,
                                         "resample (default) or fixed");
  train_cmd->add_option("--seed", train.cfg.seed)->envname("KBC_SEED");
  train_cmd->add_option("--out", train.out)->required();
  add_json_config(train_cmd);
  train_cmd->callback([&] {
    auto forbid = [&](const CLI::Option* opt, const char* name) {
      if (opt->count() > 0) {
        throw UsageError(std::string(name) + " does not apply to --algo " + train.algo);
      }
    };
    if (train.algo == "linear.adagrad" || train.algo == "embedding") {
      forbid(opt_c, "--C");
      forbid(opt_tol, "--dcd-tolerance");
      forbid(opt_sweeps, "--dcd-max-sweeps");
      if (train.algo == "linear.adagrad") forbid(opt_dim, "--embed-dim");
    } else if (train.algo == "linear.dcd") {
      forbid(opt_lr, "--learning-rate");
      forbid(opt_eps, "--adagrad-epsilon");
      forbid(opt_dim, "--embed-dim");
      forbid(opt_mode, "--negatives");
    }
    run_train(train, manifest_args(original));
  });

  PredictOpts predict;
  auto* predict_cmd = app.add_subcommand("predict", "Score candidate entity-type pairs");
  predict_cmd->add_option("--model", predict.model)->required();
  predict_cmd->add_option("--features", predict.features)->required();
  auto* opt_test = predict_cmd->add_option("--test-set", predict.test_set);
  auto* opt_pairs = predict_cmd->add_option("--pairs", predict.pairs);
  opt_test->excludes(opt_pairs);
  predict_cmd->add_option("--top-k", predict.top_k);
  predict_cmd->add_option("--threads", predict.threads);
  predict_cmd->add_option("--out", predict.out)->required();
  add_json_config(predict_cmd);
  predict_cmd->callback([&] {
    if (predict.test_set.empty() && predict.pairs.empty()) {
      throw UsageError("predict needs --test-set or --pairs");
    }
    run_predict(predict, manifest_args(original));
  });

  EvaluateOpts eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Compute ranking metrics against gold labels");
  eval_cmd->add_option("--predictions", eval.predictions)->required();
  eval_cmd->add_option("--test-set", eval.test_set)->required();
  eval_cmd->add_option("--metrics", eval.metrics, "Comma-separated: map, gap, g@K");
  eval_cmd->add_option("--gak-norm", eval.gak_norm, "window (default) or global");
  eval_cmd->add_option("--out", eval.out)->required();
  add_json_config(eval_cmd);
  eval_cmd->callback([&] { run_evaluate(eval, manifest_args(original)); });

  RerunOpts rerun;
  int rerun_rc = 0;
  auto* rerun_cmd = app.add_subcommand("rerun", "Re-execute a command from its manifest");
  rerun_cmd->add_option("--manifest", rerun.manifest_path)->required();
  rerun_cmd->add_flag("--verify", rerun.verify, "Compare output digests after the rerun");
  rerun_cmd->callback([&] { rerun_rc = run_rerun(rerun); });

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rerun_rc;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch_command(std::move(args));
}

}  // namespace kbc
