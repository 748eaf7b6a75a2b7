#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "procedit/edit_dsl.hpp"
#include "procedit/procedure.hpp"

namespace procedit {

enum class RejectReason { anchor_out_of_range, duplicate_replace_anchor, empty_insert };

std::string_view to_string(RejectReason reason);

struct RejectedEdit {
  Edit edit;
  RejectReason reason;

  friend bool operator==(const RejectedEdit&, const RejectedEdit&) = default;
};

/// Partition of a bag into edits that can be applied to a procedure and
/// edits that cannot. Both halves keep the input order.
struct ValidationReport {
  EditBag applicable;
  std::vector<RejectedEdit> rejected;
};

enum class ValidationMode { lenient, strict };

class DuplicateReplace : public InputError {
public:
  explicit DuplicateReplace(std::size_t anchor)
      : InputError("several replace edits target step " + std::to_string(anchor)), anchor_(anchor) {}
  std::size_t anchor() const noexcept { return anchor_; }

private:
  std::size_t anchor_;
};

/// Rejects replace anchors outside [1, n], insert anchors outside [0, n] and
/// inserts with empty text. When several replaces target the same step, the
/// last one is kept (lenient) or DuplicateReplace is thrown (strict).
ValidationReport validate(const EditBag& bag, const Procedure& procedure,
                          ValidationMode mode = ValidationMode::lenient);

struct ApplyResult {
  Procedure procedure;
  std::vector<RejectedEdit> dropped;
};

/// Applies a whole bag at once against the original numbering of
/// `procedure`. For k = 0..n: step k (replaced, deleted or unchanged), then
/// every insert(k, .) in bag order. The bag is validated first and rejected
/// edits are returned in `dropped`.
ApplyResult apply_edits(const EditBag& bag, const Procedure& procedure);

/// Same as apply_edits but discards the dropped list. Call it qualified:
/// EditBag is a std::vector, so lookup also finds std::apply.
Procedure apply(const EditBag& bag, const Procedure& procedure);

enum class ConflictReason {
  /// Both sides replace step k with different text (a deletion counts as text "").
  contradictory_text,
  /// One side deletes step k while the other inserts after it.
  delete_vs_insert,
};

std::string_view to_string(ConflictReason reason);

struct Conflict {
  Edit left;
  Edit right;
  ConflictReason reason;

  friend bool operator==(const Conflict&, const Conflict&) = default;
};

/// Every pair (l, r), l from `left` and r from `right`, that cannot both hold.
/// Identical edits never conflict.
std::vector<Conflict> detect_conflicts(const EditBag& left, const EditBag& right);

enum class MergePolicy { customize_wins, execute_wins, reject_conflicts };

std::string_view to_string(MergePolicy policy);
std::optional<MergePolicy> merge_policy_from_string(std::string_view name);

struct MergeResult {
  EditBag merged;
  /// Edits removed because they lost a conflict (or all conflicting edits
  /// under reject_conflicts).
  std::vector<Edit> dropped;
};

/// Union of both bags (customize order, then execute order) with exact
/// duplicates removed and every conflict settled by `policy`.
MergeResult merge_deterministic(const EditBag& customize, const EditBag& execute, MergePolicy policy);

/// An edit bag anchored on `from` such that apply(diff(from, to), from) == to.
/// Steps are matched by exact text along a longest common subsequence; each
/// unmatched stretch becomes replaces, then deletions or inserts for the
/// length difference.
EditBag diff(const Procedure& from, const Procedure& to);

struct EditCounts {
  std::size_t inserts = 0;
  std::size_t replacements = 0;
  std::size_t deletions = 0;

  std::size_t total() const noexcept { return inserts + replacements + deletions; }
  friend bool operator==(const EditCounts&, const EditCounts&) = default;
};

EditCounts count_edits(const EditBag& bag);

} // namespace procedit
