#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procedit/error.hpp"

namespace procedit {

/// Strips ASCII whitespace from both ends. Non-ASCII bytes are left alone.
std::string trim(std::string_view text);

/// An ordered list of step texts. Externally steps are numbered from 1.
///
/// Every step is trimmed, non-empty and free of line breaks. A procedure may be
/// empty, but only as the outcome of deletions; loaders require at least one
/// step.
class Procedure {
public:
  Procedure() = default;

  /// Trims each entry. Throws EmptyStep (1-based index) for blank entries and
  /// InputError for entries that span several lines.
  static Procedure from_steps(std::span<const std::string> steps);
  static Procedure from_steps(std::initializer_list<std::string_view> steps);

  const std::vector<std::string>& steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_.size(); }
  bool empty() const noexcept { return steps_.empty(); }

  /// 1-based access.
  const std::string& step(std::size_t number) const { return steps_.at(number - 1); }

  friend bool operator==(const Procedure&, const Procedure&) = default;

private:
  std::vector<std::string> steps_;
};

inline Procedure make_procedure(std::span<const std::string> steps) { return Procedure::from_steps(steps); }

/// "1. first\n2. second" with no trailing newline; "" for an empty procedure.
std::string to_numbered_text(const Procedure& procedure);

enum class ParseMode { lenient, strict };

/// Reads "<n>. text", "<n>) text" or "<n>: text" lines, optionally indented.
/// Blank lines are skipped and the input numbers are discarded, so the result
/// is always numbered 1..n. Lenient mode also skips unnumbered lines and
/// tolerates gaps or repeats in the numbering; strict mode throws
/// MalformedLine for either. Throws NoStepsFound when nothing parses.
Procedure parse_numbered_text(std::string_view text, ParseMode mode = ParseMode::lenient);

/// Trimmed, non-empty goal statement.
class Goal {
public:
  Goal() = default;
  explicit Goal(std::string_view text);
  const std::string& text() const noexcept { return text_; }
  friend bool operator==(const Goal&, const Goal&) = default;

private:
  std::string text_;
};

enum class ConstraintSubtype { prerequisite, preference, refinement, none };
enum class Expertise { beginner, intermediate, expert, unspecified };
enum class CriticalType { constraint, expertise, both, unspecified };
enum class RecordSource { real, simulated, other };

std::string_view to_string(ConstraintSubtype value);
std::string_view to_string(Expertise value);
std::string_view to_string(CriticalType value);
std::string_view to_string(RecordSource value);

// Exact, case-sensitive lookups against the names printed by to_string.
std::optional<ConstraintSubtype> constraint_subtype_from_string(std::string_view name);
std::optional<Expertise> expertise_from_string(std::string_view name);
std::optional<CriticalType> critical_type_from_string(std::string_view name);
std::optional<RecordSource> record_source_from_string(std::string_view name);

struct CustomizationHint {
  std::string text;
  ConstraintSubtype constraint_subtype = ConstraintSubtype::none;
  Expertise expertise = Expertise::unspecified;
  CriticalType critical_type = CriticalType::unspecified;

  friend bool operator==(const CustomizationHint&, const CustomizationHint&) = default;
};

/// Trims the text and rejects blank hints.
CustomizationHint make_hint(std::string_view text,
                            ConstraintSubtype constraint_subtype = ConstraintSubtype::none,
                            Expertise expertise = Expertise::unspecified,
                            CriticalType critical_type = CriticalType::unspecified);

struct CustomizationRecord {
  std::string id;
  Goal goal;
  Procedure procedure;
  CustomizationHint hint;
  RecordSource source = RecordSource::other;

  friend bool operator==(const CustomizationRecord&, const CustomizationRecord&) = default;
};

} // namespace procedit
