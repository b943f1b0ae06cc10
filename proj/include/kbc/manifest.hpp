#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace kbc {

inline constexpr const char* kToolVersion = "0.1.0";

// Written alongside every artifact-producing command's output: enough to
// re-run the command and to audit what it read and wrote. Digest maps are
// keyed by the path as given on the command line.
struct Manifest {
  std::string command;
  std::vector<std::string> args;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256
  std::uint64_t seed = 0;
  std::string version = kToolVersion;
  double duration_seconds = 0.0;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace kbc
