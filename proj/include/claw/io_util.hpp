#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "claw/errors.hpp"

namespace claw {

/// Atomic file write: the content appears under `path` completely or not at
/// all (temp file in the same directory, then rename).
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace claw
