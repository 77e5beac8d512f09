#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace comviewer {

/// Serving parameters. Text format: one `key = value` per line, `#`
/// comments; see docs/config.md for the keys.
struct ServerConfig {
  int port = 8080;
  std::vector<std::string> palette{"yellow", "green", "red"};
  std::size_t k = 4;
  std::size_t n_top = 150;
  double theta = 0.6;
  std::size_t iterations = 500;
  double beta = 0.01;
  std::uint64_t seed = 42;
  std::size_t keywords = 5;

  /// Throws std::runtime_error naming the line for unknown keys or bad values.
  static ServerConfig parse(std::string_view content);
  static ServerConfig load(const std::filesystem::path& path);
};

}  // namespace comviewer
