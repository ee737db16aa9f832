#pragma once

// Scratch copies of the bundled toy corpus.

#include <filesystem>
#include <map>
#include <string>

#include "psv/util.hpp"

namespace toy {

namespace fs = std::filesystem;

inline fs::path source_dir() { return fs::path(PSV_TEST_DATA) / "data" / "toy"; }

// Fresh copy of the input files (no outputs, no cache) under the temp dir.
inline fs::path copy(const std::string& name) {
  auto dst = fs::temp_directory_path() / ("psv_" + name);
  fs::remove_all(dst);
  fs::create_directories(dst);
  for (const auto& e : fs::directory_iterator(source_dir())) {
    if (e.is_regular_file()) fs::copy_file(e.path(), dst / e.path().filename());
  }
  return dst;
}

// filename -> bytes for every regular file directly under `dir`.
inline std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) out[e.path().filename().string()] = psv::util::read_file(e.path());
  }
  return out;
}

}  // namespace toy
