#pragma once

#include <map>
#include <string>

namespace vppfra {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::string& path);

// Reproducibility record written next to every subcommand's outputs.
struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> config;      // resolved flag values
  std::map<std::string, std::string> input_digests;  // path -> sha256
  std::uint64_t seed = 0;
  std::string tool_version;
  double wall_seconds = 0.0;

  std::string to_json() const;
  // `out` may be a directory (manifest.json inside) or a file path
  // (<file>.manifest.json next to it).
  void write_next_to(const std::string& out_path) const;
};

}  // namespace vppfra
