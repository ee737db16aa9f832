#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace psv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file could not be parsed; carries the 1-based line (or row) number.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace util {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename, so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string to_lower(std::string_view s);

// Shortest round-trip decimal representation; stable across runs and platforms.
std::string format_double(double v);
double parse_double(std::string_view s);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Exceptions are rethrown
// (the one from the lowest index wins) after all workers join.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

std::size_t default_threads();

}  // namespace util
}  // namespace psv
