#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "procedit/procedure.hpp"

namespace procedit::testing {

inline std::filesystem::path source_path(const std::string& relative) {
  return std::filesystem::path(PROCEDIT_SOURCE_DIR) / relative;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("procedit-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ignored;
    std::filesystem::remove_all(path_, ignored);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

// Step texts that stress the edit grammar: commas, parens, quotes, unicode.
inline const std::vector<std::string>& awkward_texts() {
  static const std::vector<std::string> texts{
      "Boil water.",
      "Mix flour, sugar, and salt.",
      "Bake (about 30 min) until golden.",
      "Say \"hello\" to the dough.",
      "Use the baker's peel.",
      "\"Quoted whole step\"",
      "'single quoted'",
      "Add 2 tbsp (30 ml) oil, then stir)",
      "Crème brûlée, naïve café ☕",
      "Tie the 結び knot",
      "replace(1, nested)",
      "a",
  };
  return texts;
}

inline Procedure random_procedure(std::mt19937& rng, std::size_t max_steps) {
  std::uniform_int_distribution<std::size_t> length(1, max_steps);
  std::uniform_int_distribution<std::size_t> pick(0, awkward_texts().size() - 1);
  std::vector<std::string> steps;
  std::size_t n = length(rng);
  for (std::size_t i = 0; i < n; ++i) steps.push_back(awkward_texts()[pick(rng)] + " #" + std::to_string(i));
  return Procedure::from_steps(steps);
}

} // namespace procedit::testing
