#include "kbc/manifest.hpp"

#include <fstream>

#include "kbc/errors.hpp"
#include "kbc/io.hpp"
#include "nlohmann/json.hpp"

namespace kbc {

using nlohmann::json;

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  json j;
  j["command"] = manifest.command;
  j["args"] = manifest.args;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  j["seed"] = manifest.seed;
  j["version"] = manifest.version;
  j["duration_seconds"] = round_9sig(manifest.duration_seconds);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  out << j.dump(2) << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("bad manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.args = j.at("args").get<std::vector<std::string>>();
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
    m.outputs = j.value("outputs", std::map<std::string, std::string>{});
    m.seed = j.value("seed", std::uint64_t{0});
    m.version = j.value("version", std::string{});
    m.duration_seconds = j.value("duration_seconds", 0.0);
  } catch (const json::exception& e) {
    throw DataError("bad manifest " + path.string() + ": " + e.what());
  }
  return m;
}

}  // namespace kbc
