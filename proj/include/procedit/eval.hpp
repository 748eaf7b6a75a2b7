#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procedit/procedure.hpp"

namespace procedit {

enum class Criterion { customized, executable };

enum class ErrorCategory { missing_steps, extra_steps, underspecified_steps, incorrect_steps, wrong_order };

inline constexpr std::array<ErrorCategory, 5> kErrorCategories{
    ErrorCategory::missing_steps, ErrorCategory::extra_steps, ErrorCategory::underspecified_steps,
    ErrorCategory::incorrect_steps, ErrorCategory::wrong_order};

std::string_view to_string(Criterion criterion);
std::string_view to_string(ErrorCategory category);
std::optional<Criterion> criterion_from_string(std::string_view name);
std::optional<ErrorCategory> error_category_from_string(std::string_view name);

/// One annotator's verdict on one criterion for one method's output on one
/// record. A negative verdict carries at least one error category; a
/// positive one carries none.
struct JudgmentRecord {
  std::string method;
  std::string record_id;
  std::string annotator_id;
  Criterion criterion = Criterion::customized;
  bool verdict = false;
  std::vector<ErrorCategory> error_categories;

  friend bool operator==(const JudgmentRecord&, const JudgmentRecord&) = default;
};

class EvenPanel : public InputError {
public:
  explicit EvenPanel(std::size_t size)
      : InputError("panel of " + std::to_string(size) + " annotators has no strict majority rule"), size_(size) {}
  std::size_t size() const noexcept { return size_; }

private:
  std::size_t size_;
};

class MissingCriterion : public InputError {
public:
  MissingCriterion(const std::string& record_id, Criterion criterion)
      : InputError("record '" + record_id + "' has no " + std::string(to_string(criterion)) + " judgments") {}
};

/// How to settle an even split. `refuse` throws EvenPanel for any even-sized
/// panel, tied or not.
enum class TieRule { refuse, negative, positive };

/// True iff positives outnumber negatives. Throws EvenPanel for an empty
/// panel, and for even panels under TieRule::refuse.
bool majority(std::span<const bool> verdicts, TieRule tie_rule = TieRule::refuse);

struct ItemVerdicts {
  bool customized = false;
  bool executable = false;
  bool fully_correct = false;

  friend bool operator==(const ItemVerdicts&, const ItemVerdicts&) = default;
};

/// Majority per criterion over the judgments of a single item; fully correct
/// is the conjunction. Throws MissingCriterion.
ItemVerdicts item_verdicts(std::span<const JudgmentRecord> judgments, TieRule tie_rule = TieRule::refuse);

/// 100 * count / n rounded half-up to hundredths, returned in hundredths
/// (6068 for 60.68). n must be positive.
std::int64_t percent_hundredths(std::size_t count, std::size_t n);
/// "60.68"
std::string format_hundredths(std::int64_t hundredths);

struct MetricsRow {
  std::string method;
  std::optional<std::string> group;
  std::size_t n = 0;
  std::size_t customized = 0;
  std::size_t executable = 0;
  std::size_t fully_correct = 0;

  std::int64_t customized_pct() const { return percent_hundredths(customized, n); }
  std::int64_t executable_pct() const { return percent_hundredths(executable, n); }
  std::int64_t fully_correct_pct() const { return percent_hundredths(fully_correct, n); }
};

enum class GroupDimension { constraint_subtype, expertise, critical_type };

std::string_view to_string(GroupDimension dimension);
std::optional<GroupDimension> group_dimension_from_string(std::string_view name);

struct Grouping {
  GroupDimension dimension = GroupDimension::constraint_subtype;
  /// Hint metadata per record id, usually taken from the dataset file.
  std::map<std::string, CustomizationHint, std::less<>> hints;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  /// Omitted empty groups and items that could not be grouped.
  std::vector<std::string> notes;
};

/// Items are (method, record id) pairs. Methods keep their order of first
/// appearance; groups follow the metadata enum order and empty groups are
/// reported as notes instead of rows.
MetricsReport aggregate(std::span<const JudgmentRecord> judgments, const Grouping* grouping = nullptr,
                        TieRule tie_rule = TieRule::refuse);

/// Record ids judged customized / executable / fully correct for `method`.
struct VerdictSets {
  std::vector<std::string> customized;
  std::vector<std::string> executable;
  std::vector<std::string> fully_correct;
};

VerdictSets verdict_sets(std::span<const JudgmentRecord> judgments, std::string_view method,
                         TieRule tie_rule = TieRule::refuse);

/// Error marks for one method. Every category an annotator ticks counts
/// once; shares are over all marks of both criteria.
struct ErrorDistribution {
  std::string method;
  std::array<std::array<std::size_t, kErrorCategories.size()>, 2> by_criterion{};
  std::size_t total_marks = 0;

  std::size_t count(ErrorCategory category) const;
  std::size_t count(Criterion criterion, ErrorCategory category) const;
  /// Share of all marks in hundredths of a percent.
  std::int64_t percent(ErrorCategory category) const;
};

ErrorDistribution error_distribution(std::span<const JudgmentRecord> judgments, std::string_view method);

/// Methods in order of first appearance.
std::vector<std::string> methods_of(std::span<const JudgmentRecord> judgments);

/// Reads line-delimited JudgmentRecord JSON. Throws InputError naming the
/// offending line.
std::vector<JudgmentRecord> parse_judgments(std::string_view text);
std::vector<JudgmentRecord> load_judgments(const std::filesystem::path& path);
std::string format_judgment(const JudgmentRecord& judgment);

std::string format_metrics_table(const MetricsReport& report);
/// One JSON object per row.
std::string format_metrics_json(const MetricsReport& report);
std::string format_error_distribution(const ErrorDistribution& distribution);

} // namespace procedit
