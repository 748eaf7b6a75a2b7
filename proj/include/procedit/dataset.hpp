#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procedit/procedure.hpp"

namespace procedit {

/// Dataset files are JSON lines. An optional first line `{"format":1}` names
/// the schema version; every other non-blank line is one record:
///
///   {"id":"r01","goal":"Bake Bread","steps":["..."],
///    "hint":{"text":"...","constraint_subtype":"preference",
///            "expertise":"beginner","critical_type":"constraint"},
///    "source":"real"}
inline constexpr int kDatasetFormat = 1;

struct DatasetDiagnostic {
  std::size_t line_number = 0;
  std::string message;

  friend bool operator==(const DatasetDiagnostic&, const DatasetDiagnostic&) = default;
};

class DatasetError : public InputError {
public:
  explicit DatasetError(DatasetDiagnostic diagnostic)
      : InputError("line " + std::to_string(diagnostic.line_number) + ": " + diagnostic.message),
        diagnostic_(std::move(diagnostic)) {}
  const DatasetDiagnostic& diagnostic() const noexcept { return diagnostic_; }

private:
  DatasetDiagnostic diagnostic_;
};

enum class LoadMode { lenient, strict };

/// One record line of a dataset file: either a valid record or the reason it
/// was refused. `id` is filled whenever the line carried a string id.
struct DatasetEntry {
  std::size_t line_number = 0;
  std::string id;
  std::optional<CustomizationRecord> record;
  std::optional<DatasetDiagnostic> diagnostic;
};

/// Parses a single record line. Throws InputError describing the first
/// problem found.
CustomizationRecord parse_record(std::string_view line);

/// Canonical single-line JSON with fixed field order.
std::string format_record(const CustomizationRecord& record);

/// Every record line of `text` in order, header and blank lines excluded.
/// Duplicate ids keep the first occurrence. In strict mode the first bad line
/// throws DatasetError.
std::vector<DatasetEntry> parse_entries(std::string_view text, LoadMode mode = LoadMode::lenient);
std::vector<DatasetEntry> load_entries(const std::filesystem::path& path, LoadMode mode = LoadMode::lenient);

struct LoadResult {
  std::vector<CustomizationRecord> records;
  std::vector<DatasetDiagnostic> diagnostics;
};

LoadResult load_records(const std::filesystem::path& path, LoadMode mode = LoadMode::lenient);

/// Header line followed by one canonical record per line.
std::string format_records(std::span<const CustomizationRecord> records);
void save_records(const std::filesystem::path& path, std::span<const CustomizationRecord> records);

struct CategoryShare {
  std::string name;
  std::size_t count = 0;
  double percent = 0.0;
};

struct DatasetStats {
  std::size_t records = 0;
  std::size_t unique_goals = 0;
  std::size_t unique_hints = 0;
  std::vector<CategoryShare> constraint_subtype;
  std::vector<CategoryShare> expertise;
  std::vector<CategoryShare> critical_type;
  std::vector<CategoryShare> source;
};

/// Counts per metadata value (every enum value listed, zeros included) and
/// unique goal / hint texts.
DatasetStats dataset_stats(std::span<const CustomizationRecord> records);

std::string format_stats(const DatasetStats& stats);

} // namespace procedit
