#include "kbc/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kbc/embedding.hpp"
#include "kbc/linear.hpp"
#include "nlohmann/json.hpp"

namespace kbc {
namespace {

using nlohmann::json;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

[[noreturn]] void malformed(const std::filesystem::path& path, std::int64_t line_no,
                            const std::string& what) {
  throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

// Calls fn(line_no, fields) for every non-comment, non-empty line.
template <typename Fn>
void for_each_tsv_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    fn(line_no, split_tabs(line));
  }
}

// For files with '#'-prefixed header records ahead of bare data rows:
// calls header_fn(line_no, fields-after-#) or row_fn(line_no, fields).
template <typename HeaderFn, typename RowFn>
void for_each_headed_line(const std::filesystem::path& path, HeaderFn&& header_fn,
                          RowFn&& row_fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      header_fn(line_no, split_tabs(std::string_view(line).substr(1)));
    } else {
      row_fn(line_no, split_tabs(line));
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  return out;
}

double parse_double(const std::filesystem::path& path, std::int64_t line_no,
                    std::string_view field) {
  std::string buf(field);
  char* end = nullptr;
  double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || buf.empty()) {
    malformed(path, line_no, "bad number '" + buf + "'");
  }
  return v;
}

std::int64_t parse_int(const std::filesystem::path& path, std::int64_t line_no,
                       std::string_view field) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    malformed(path, line_no, "bad integer '" + std::string(field) + "'");
  }
  return v;
}

std::string sparse_row_to_string(const SparseVector& row) {
  std::string out;
  bool first = true;
  for (const auto& e : row.entries()) {
    if (!first) out.push_back(' ');
    first = false;
    out += std::to_string(e.index);
    out.push_back(':');
    out += format_g9(e.value);
  }
  return out;
}

SparseVector parse_sparse_row(const std::filesystem::path& path, std::int64_t line_no,
                              std::string_view field, std::uint32_t dim) {
  SparseVector row(dim);
  std::size_t start = 0;
  while (start < field.size()) {
    std::size_t space = field.find(' ', start);
    std::string_view item =
        space == std::string_view::npos ? field.substr(start) : field.substr(start, space - start);
    start = space == std::string_view::npos ? field.size() : space + 1;
    if (item.empty()) continue;
    std::size_t colon = item.find(':');
    if (colon == std::string_view::npos) malformed(path, line_no, "bad idx:weight pair");
    std::int64_t idx = parse_int(path, line_no, item.substr(0, colon));
    double w = parse_double(path, line_no, item.substr(colon + 1));
    if (idx < 0 || idx >= static_cast<std::int64_t>(dim)) {
      malformed(path, line_no, "index " + std::to_string(idx) + " out of range");
    }
    try {
      row.push_back(static_cast<std::uint32_t>(idx), w);
    } catch (const DataError& e) {
      malformed(path, line_no, e.what());
    }
  }
  return row;
}

}  // namespace

std::string format_g9(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

double round_9sig(double x) {
  return std::strtod(format_g9(x).c_str(), nullptr);
}

std::string sha256_file_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for digest: " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw DataError("sha256 init failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (i + 1 >= text.size()) throw DataError("dangling escape at end of text field");
    char next = text[++i];
    switch (next) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      default: throw DataError(std::string("unknown escape '\\") + next + "'");
    }
  }
  return out;
}

void write_facts_file(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& facts) {
  std::ofstream out = open_out(path);
  for (const auto& [e, t] : facts) out << e << '\t' << t << '\n';
}

std::vector<TestSetRow> read_test_set_file(const std::filesystem::path& path) {
  std::vector<TestSetRow> rows;
  for_each_tsv_line(path, [&](std::int64_t line_no, const std::vector<std::string_view>& f) {
    if (f.size() != 3) malformed(path, line_no, "expected entity<TAB>type<TAB>label");
    if (f[2] != "0" && f[2] != "1") malformed(path, line_no, "label must be 0 or 1");
    rows.push_back({std::string(f[0]), std::string(f[1]), f[2] == "1"});
  });
  return rows;
}

void write_test_set_file(const std::filesystem::path& path, const std::vector<TestSetRow>& rows) {
  std::ofstream out = open_out(path);
  for (const auto& r : rows) out << r.entity << '\t' << r.type << '\t' << (r.label ? 1 : 0) << '\n';
}

std::vector<std::pair<std::string, std::string>> read_text_corpus_file(
    const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> docs;
  for_each_tsv_line(path, [&](std::int64_t line_no, const std::vector<std::string_view>& f) {
    if (f.size() != 2) malformed(path, line_no, "expected entity<TAB>text");
    try {
      docs.emplace_back(std::string(f[0]), unescape_text(f[1]));
    } catch (const DataError& e) {
      malformed(path, line_no, e.what());
    }
  });
  return docs;
}

void write_text_corpus_file(const std::filesystem::path& path,
                            const std::vector<std::pair<std::string, std::string>>& docs) {
  std::ofstream out = open_out(path);
  for (const auto& [entity, text] : docs) out << entity << '\t' << escape_text(text) << '\n';
}

std::vector<TypeListEntry> read_types_file(const std::filesystem::path& path) {
  std::vector<TypeListEntry> types;
  for_each_tsv_line(path, [&](std::int64_t line_no, const std::vector<std::string_view>& f) {
    if (f.size() != 2) malformed(path, line_no, "expected type<TAB>count");
    types.push_back({std::string(f[0]), parse_int(path, line_no, f[1])});
  });
  return types;
}

void write_types_file(const std::filesystem::path& path, const std::vector<TypeListEntry>& types) {
  std::ofstream out = open_out(path);
  for (const auto& t : types) out << t.symbol << '\t' << t.train_count << '\n';
}

std::vector<PredictionRow> read_predictions_file(const std::filesystem::path& path) {
  std::vector<PredictionRow> rows;
  for_each_tsv_line(path, [&](std::int64_t line_no, const std::vector<std::string_view>& f) {
    if (f.size() != 3) malformed(path, line_no, "expected entity<TAB>type<TAB>score");
    rows.push_back({std::string(f[0]), std::string(f[1]), parse_double(path, line_no, f[2])});
  });
  return rows;
}

void write_predictions_file(const std::filesystem::path& path,
                            const std::vector<PredictionRow>& rows) {
  std::ofstream out = open_out(path);
  for (const auto& r : rows) out << r.entity << '\t' << r.type << '\t' << format_g9(r.score) << '\n';
}

void write_feature_matrix_file(const std::filesystem::path& path, const FeatureMatrix& features,
                               const Vocab& entities) {
  std::ofstream out = open_out(path);
  out << "#dim\t" << features.dim() << '\n';
  for (const FeatureBlock& b : features.space().blocks()) {
    out << "#block\t" << b.name << '\t' << b.offset << '\t' << b.width << '\n';
  }
  for (EntityId e = 0; e < entities.size(); ++e) {
    out << entities.symbol(e) << '\t' << sparse_row_to_string(features.row(e)) << '\n';
  }
}

LoadedFeatures read_feature_matrix_file(const std::filesystem::path& path,
                                        std::shared_ptr<Vocab> entities) {
  if (entities == nullptr) entities = std::make_shared<Vocab>();
  std::optional<std::uint32_t> dim;
  std::vector<std::pair<char, std::uint32_t>> widths;
  std::vector<std::pair<EntityId, SparseVector>> rows;
  std::uint32_t next_offset = 0;
  for_each_headed_line(
      path,
      [&](std::int64_t line_no, const std::vector<std::string_view>& f) {
        if (f[0] == "dim") {
          if (f.size() != 2 || dim) malformed(path, line_no, "bad dim header");
          dim = static_cast<std::uint32_t>(parse_int(path, line_no, f[1]));
        } else if (f[0] == "block") {
          if (f.size() != 4 || f[1].size() != 1) malformed(path, line_no, "bad block header");
          auto offset = static_cast<std::uint32_t>(parse_int(path, line_no, f[2]));
          auto width = static_cast<std::uint32_t>(parse_int(path, line_no, f[3]));
          if (offset != next_offset) malformed(path, line_no, "non-cumulative block offset");
          next_offset += width;
          widths.emplace_back(f[1][0], width);
        }
        // other # lines are comments
      },
      [&](std::int64_t line_no, const std::vector<std::string_view>& f) {
        if (f.size() != 2) malformed(path, line_no, "expected entity<TAB>idx:weight entries");
        if (!dim) malformed(path, line_no, "entity row before the dim header");
        EntityId e = entities->intern(f[0]);
        rows.emplace_back(e, parse_sparse_row(path, line_no, f[1], *dim));
      });
  if (!dim) throw DataError(path.string() + ": missing dim header");
  FeatureSpace space = FeatureSpace::make(widths);
  if (space.total_dim() != *dim) {
    throw DataError(path.string() + ": block widths do not sum to dim");
  }
  LoadedFeatures loaded{FeatureMatrix(space), std::move(entities)};
  for (auto& [e, row] : rows) {
    if (loaded.matrix.has_row(e)) {
      throw DataError(path.string() + ": duplicate feature row for entity '" +
                      loaded.entities->symbol(e) + "'");
    }
    loaded.matrix.set_row(e, std::move(row));
  }
  return loaded;
}

std::string train_config_echo(const std::string& algorithm, const TrainConfig& cfg,
                              std::int32_t embed_dim) {
  json j;
  j["algo"] = algorithm;
  j["loss_power"] = cfg.loss_power;
  j["epochs"] = cfg.epochs;
  j["m"] = cfg.negatives.m;
  j["n"] = cfg.negatives.n;
  j["seed"] = cfg.seed;
  j["negative_mode"] =
      cfg.negative_mode == NegativeMode::kResampleEachEpoch ? "resample" : "fixed";
  if (algorithm == "linear.dcd") {
    j["C"] = round_9sig(cfg.regularization_c);
    j["dcd_tolerance"] = round_9sig(cfg.dcd_tolerance);
    j["dcd_max_sweeps"] = cfg.dcd_max_sweeps;
  } else {
    j["learning_rate"] = round_9sig(cfg.learning_rate);
    j["adagrad_epsilon"] = round_9sig(cfg.adagrad_epsilon);
  }
  if (algorithm == "embedding") j["embed_dim"] = embed_dim;
  return j.dump();
}

void write_linear_model_file(const std::filesystem::path& path, const LinearModelFile& file) {
  if (static_cast<std::int32_t>(file.type_symbols.size()) != file.model.num_types()) {
    throw DataError("type symbol list does not match model");
  }
  std::ofstream out = open_out(path);
  out << "#algo\t" << file.algorithm << '\n';
  out << "#dim\t" << file.model.dim << '\n';
  out << "#num_types\t" << file.model.num_types() << '\n';
  out << "#config\t" << file.config_echo << '\n';
  for (std::size_t t = 0; t < file.type_symbols.size(); ++t) {
    SparseVector row(file.model.dim);
    const auto& w = file.model.weights[t];
    for (std::uint32_t i = 0; i < file.model.dim; ++i) {
      if (w[i] != 0.0) row.push_back(i, w[i]);
    }
    out << file.type_symbols[t] << '\t' << sparse_row_to_string(row) << '\n';
  }
}

LinearModelFile read_linear_model_file(const std::filesystem::path& path) {
  LinearModelFile file;
  std::optional<std::uint32_t> dim;
  std::optional<std::int64_t> num_types;
  std::vector<SparseVector> rows;
  for_each_headed_line(
      path,
      [&](std::int64_t line_no, const std::vector<std::string_view>& f) {
        if (f[0] == "algo" && f.size() == 2) {
          file.algorithm = std::string(f[1]);
        } else if (f[0] == "dim" && f.size() == 2) {
          dim = static_cast<std::uint32_t>(parse_int(path, line_no, f[1]));
        } else if (f[0] == "num_types" && f.size() == 2) {
          num_types = parse_int(path, line_no, f[1]);
        } else if (f[0] == "config" && f.size() == 2) {
          file.config_echo = std::string(f[1]);
        }
      },
      [&](std::int64_t line_no, const std::vector<std::string_view>& f) {
        if (f.size() != 2) malformed(path, line_no, "expected type<TAB>idx:weight entries");
        if (!dim) malformed(path, line_no, "weight row before the dim header");
        file.type_symbols.emplace_back(f[0]);
        rows.push_back(parse_sparse_row(path, line_no, f[1], *dim));
      });
  if (!dim || !num_types) throw DataError(path.string() + ": missing model header");
  if (file.algorithm != "linear.adagrad" && file.algorithm != "linear.dcd") {
    throw DataError(path.string() + ": not a linear model file");
  }
  if (static_cast<std::int64_t>(rows.size()) != *num_types) {
    throw DataError(path.string() + ": type row count does not match num_types");
  }
  file.model = LinearModel::zeros(static_cast<std::int32_t>(*num_types), *dim);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (const auto& e : rows[t].entries()) file.model.weights[t][e.index] = e.value;
  }
  return file;
}

void write_embedding_model_file(const std::filesystem::path& path,
                                const EmbeddingModelFile& file) {
  const EmbeddingModel& m = file.model;
  if (static_cast<std::uint32_t>(file.type_symbols.size()) != m.type_dim) {
    throw DataError("type symbol list does not match model type dimension");
  }
  std::ofstream out = open_out(path);
  out << "#algo\tembedding\n";
  out << "#entity_dim\t" << m.entity_dim << '\n';
  out << "#type_dim\t" << m.type_dim << '\n';
  out << "#embed_dim\t" << m.embed_dim << '\n';
  out << "#config\t" << file.config_echo << '\n';
  for (const std::string& sym : file.type_symbols) out << "#type\t" << sym << '\n';
  auto dump_matrix = [&](char name, const std::vector<double>& mat, std::uint32_t rows) {
    for (std::uint32_t r = 0; r < rows; ++r) {
      out << name << '\t';
      for (std::int32_t c = 0; c < m.embed_dim; ++c) {
        if (c > 0) out << ' ';
        out << format_g9(mat[r * static_cast<std::uint32_t>(m.embed_dim) +
                             static_cast<std::uint32_t>(c)]);
      }
      out << '\n';
    }
  };
  dump_matrix('U', m.u, m.entity_dim);
  dump_matrix('V', m.v, m.type_dim);
}

EmbeddingModelFile read_embedding_model_file(const std::filesystem::path& path) {
  EmbeddingModelFile file;
  EmbeddingModel& m = file.model;
  bool saw_algo = false;
  std::vector<std::vector<double>> u_rows, v_rows;
  for_each_headed_line(
      path,
      [&](std::int64_t line_no, const std::vector<std::string_view>& f) {
        if (f[0] == "algo" && f.size() == 2) {
          if (f[1] != "embedding") malformed(path, line_no, "not an embedding model file");
          saw_algo = true;
        } else if (f[0] == "entity_dim" && f.size() == 2) {
          m.entity_dim = static_cast<std::uint32_t>(parse_int(path, line_no, f[1]));
        } else if (f[0] == "type_dim" && f.size() == 2) {
          m.type_dim = static_cast<std::uint32_t>(parse_int(path, line_no, f[1]));
        } else if (f[0] == "embed_dim" && f.size() == 2) {
          m.embed_dim = static_cast<std::int32_t>(parse_int(path, line_no, f[1]));
        } else if (f[0] == "config" && f.size() == 2) {
          file.config_echo = std::string(f[1]);
        } else if (f[0] == "type" && f.size() == 2) {
          file.type_symbols.emplace_back(f[1]);
        }
      },
      [&](std::int64_t line_no, const std::vector<std::string_view>& f) {
        if ((f[0] != "U" && f[0] != "V") || f.size() != 2) {
          malformed(path, line_no, "expected a U or V matrix row");
        }
        std::vector<double> row;
        std::size_t start = 0;
        std::string_view field = f[1];
        while (start < field.size()) {
          std::size_t space = field.find(' ', start);
          std::string_view item = space == std::string_view::npos
                                      ? field.substr(start)
                                      : field.substr(start, space - start);
          start = space == std::string_view::npos ? field.size() : space + 1;
          if (!item.empty()) row.push_back(parse_double(path, line_no, item));
        }
        if (m.embed_dim <= 0 || static_cast<std::int64_t>(row.size()) != m.embed_dim) {
          malformed(path, line_no, "matrix row does not match embed_dim");
        }
        (f[0] == "U" ? u_rows : v_rows).push_back(std::move(row));
      });
  if (!saw_algo) throw DataError(path.string() + ": missing algo header");
  if (u_rows.size() != m.entity_dim || v_rows.size() != m.type_dim ||
      file.type_symbols.size() != m.type_dim) {
    throw DataError(path.string() + ": matrix rows do not match declared dimensions");
  }
  m.u.reserve(u_rows.size() * static_cast<std::size_t>(m.embed_dim));
  for (const auto& r : u_rows) m.u.insert(m.u.end(), r.begin(), r.end());
  m.v.reserve(v_rows.size() * static_cast<std::size_t>(m.embed_dim));
  for (const auto& r : v_rows) m.v.insert(m.v.end(), r.begin(), r.end());
  return file;
}

}  // namespace kbc
