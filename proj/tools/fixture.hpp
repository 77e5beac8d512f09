#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace comviewer::fixture {

struct DeskOptions {
  std::size_t posts = 200;  // surviving posts; a few tombstoned records come on top
  std::uint64_t seed = 7;
};

/// Synthetic r/Anxiety-style dump: exam, sleep, work and social threads
/// with nested replies, seeking/providing marker phrases at mixed
/// densities, and both tombstone kinds. Same options, same bytes.
std::string desk_dump(const DeskOptions& options = {});

void write_desk_dump(const std::filesystem::path& path, const DeskOptions& options = {});

}  // namespace comviewer::fixture
