#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace gapfit::cli {

// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string digest(std::string_view bytes);

struct FileRecord {
  std::string path;
  std::string fnv1a64;

  friend bool operator==(const FileRecord&, const FileRecord&) = default;
};

// Everything needed to repeat a run: the command, its resolved settings,
// the seed, digests of the inputs it read and of the artifacts it wrote.
// Artifact paths are relative to the output directory. No timestamps, so
// a repeated run writes the same manifest byte for byte.
struct Manifest {
  std::string tool = "gapfit";
  std::string version;
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<FileRecord> inputs;
  std::vector<FileRecord> artifacts;

  nlohmann::ordered_json to_json() const;
  static Manifest from_json(const nlohmann::json& json);
};

void save_manifest(const std::filesystem::path& path, const Manifest& manifest);
// Throws IoError when unreadable and UsageError when malformed.
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace gapfit::cli
