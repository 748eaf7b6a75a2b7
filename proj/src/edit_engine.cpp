#include "procedit/edit_engine.hpp"

#include <algorithm>
#include <optional>

namespace procedit {

std::string_view to_string(RejectReason reason) {
  switch (reason) {
  case RejectReason::anchor_out_of_range: return "anchor out of range";
  case RejectReason::duplicate_replace_anchor: return "duplicate replace anchor";
  case RejectReason::empty_insert: return "empty insert";
  }
  return "?";
}

std::string_view to_string(ConflictReason reason) {
  return reason == ConflictReason::contradictory_text ? "contradictory_text" : "delete_vs_insert";
}

std::string_view to_string(MergePolicy policy) {
  switch (policy) {
  case MergePolicy::customize_wins: return "customize_wins";
  case MergePolicy::execute_wins: return "execute_wins";
  case MergePolicy::reject_conflicts: return "reject_conflicts";
  }
  return "?";
}

std::optional<MergePolicy> merge_policy_from_string(std::string_view name) {
  for (auto policy : {MergePolicy::customize_wins, MergePolicy::execute_wins, MergePolicy::reject_conflicts})
    if (to_string(policy) == name) return policy;
  return std::nullopt;
}

ValidationReport validate(const EditBag& bag, const Procedure& procedure, ValidationMode mode) {
  const std::size_t n = procedure.size();
  std::vector<std::optional<RejectReason>> verdict(bag.size());
  // Index of the last in-range replace per step; earlier ones lose.
  std::vector<std::optional<std::size_t>> last_replace(n + 1);

  for (std::size_t i = 0; i < bag.size(); ++i) {
    const Edit& edit = bag[i];
    if (edit.kind == EditKind::replace) {
      if (edit.anchor < 1 || edit.anchor > n) {
        verdict[i] = RejectReason::anchor_out_of_range;
        continue;
      }
      auto& slot = last_replace[edit.anchor];
      if (slot) {
        if (mode == ValidationMode::strict) throw DuplicateReplace(edit.anchor);
        verdict[*slot] = RejectReason::duplicate_replace_anchor;
      }
      slot = i;
    } else {
      if (edit.anchor > n)
        verdict[i] = RejectReason::anchor_out_of_range;
      else if (edit.text.empty())
        verdict[i] = RejectReason::empty_insert;
    }
  }

  ValidationReport report;
  for (std::size_t i = 0; i < bag.size(); ++i) {
    if (verdict[i])
      report.rejected.push_back({bag[i], *verdict[i]});
    else
      report.applicable.push_back(bag[i]);
  }
  return report;
}

ApplyResult apply_edits(const EditBag& bag, const Procedure& procedure) {
  ValidationReport report = validate(bag, procedure);
  const std::size_t n = procedure.size();

  std::vector<const Edit*> replacement(n + 1, nullptr);
  std::vector<std::vector<const Edit*>> inserts_after(n + 1);
  for (const Edit& edit : report.applicable) {
    if (edit.kind == EditKind::replace)
      replacement[edit.anchor] = &edit;
    else
      inserts_after[edit.anchor].push_back(&edit);
  }

  std::vector<std::string> steps;
  steps.reserve(n + report.applicable.size());
  for (std::size_t k = 0; k <= n; ++k) {
    if (k >= 1) {
      if (replacement[k] == nullptr)
        steps.push_back(procedure.step(k));
      else if (!replacement[k]->text.empty())
        steps.push_back(replacement[k]->text);
    }
    for (const Edit* insert : inserts_after[k]) steps.push_back(insert->text);
  }
  return {Procedure::from_steps(steps), std::move(report.rejected)};
}

Procedure apply(const EditBag& bag, const Procedure& procedure) { return apply_edits(bag, procedure).procedure; }

namespace {

struct IndexedConflict {
  std::size_t left;
  std::size_t right;
  ConflictReason reason;
};

std::vector<IndexedConflict> find_conflicts(const EditBag& left, const EditBag& right) {
  std::vector<IndexedConflict> found;
  for (std::size_t i = 0; i < left.size(); ++i) {
    const Edit& l = left[i];
    for (std::size_t j = 0; j < right.size(); ++j) {
      const Edit& r = right[j];
      if (l.anchor != r.anchor || l == r) continue;
      if (l.kind == EditKind::replace && r.kind == EditKind::replace)
        found.push_back({i, j, ConflictReason::contradictory_text});
      else if ((l.is_deletion() && r.kind == EditKind::insert) || (r.is_deletion() && l.kind == EditKind::insert))
        found.push_back({i, j, ConflictReason::delete_vs_insert});
    }
  }
  return found;
}

} // namespace

std::vector<Conflict> detect_conflicts(const EditBag& left, const EditBag& right) {
  std::vector<Conflict> conflicts;
  for (const auto& c : find_conflicts(left, right)) conflicts.push_back({left[c.left], right[c.right], c.reason});
  return conflicts;
}

MergeResult merge_deterministic(const EditBag& customize, const EditBag& execute, MergePolicy policy) {
  std::vector<bool> customize_lost(customize.size(), false);
  std::vector<bool> execute_lost(execute.size(), false);
  for (const auto& c : find_conflicts(customize, execute)) {
    if (policy != MergePolicy::execute_wins) execute_lost[c.right] = true;
    if (policy != MergePolicy::customize_wins) customize_lost[c.left] = true;
  }

  auto contains = [](const std::vector<Edit>& edits, const Edit& edit) {
    return std::find(edits.begin(), edits.end(), edit) != edits.end();
  };
  MergeResult result;
  auto take = [&](const EditBag& bag, const std::vector<bool>& lost) {
    for (std::size_t i = 0; i < bag.size(); ++i) {
      if (lost[i])
        result.dropped.push_back(bag[i]);
      else if (!contains(result.merged, bag[i]))
        result.merged.push_back(bag[i]);
    }
  };
  take(customize, customize_lost);
  take(execute, execute_lost);
  return result;
}

EditBag diff(const Procedure& from, const Procedure& to) {
  const auto& a = from.steps();
  const auto& b = to.steps();
  const std::size_t n = a.size();
  const std::size_t m = b.size();

  // lcs[i][j] = LCS length of a[i..] and b[j..]
  std::vector<std::vector<std::size_t>> lcs(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);

  EditBag bag;
  std::vector<std::size_t> gap_from;  // 0-based indices into a
  std::vector<std::size_t> gap_to;    // 0-based indices into b
  std::size_t last_kept = 0;          // 1-based number of the last matched step in a

  auto flush = [&] {
    const std::size_t paired = std::min(gap_from.size(), gap_to.size());
    for (std::size_t t = 0; t < paired; ++t) bag.push_back(Edit::replace(gap_from[t] + 1, b[gap_to[t]]));
    for (std::size_t t = paired; t < gap_from.size(); ++t) bag.push_back(Edit::remove(gap_from[t] + 1));
    const std::size_t anchor = gap_from.empty() ? last_kept : gap_from.back() + 1;
    for (std::size_t t = paired; t < gap_to.size(); ++t) bag.push_back(Edit::insert(anchor, b[gap_to[t]]));
    gap_from.clear();
    gap_to.clear();
  };

  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      flush();
      last_kept = i + 1;
      ++i;
      ++j;
    } else if (j == m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1])) {
      gap_from.push_back(i++);
    } else {
      gap_to.push_back(j++);
    }
  }
  flush();
  return bag;
}

EditCounts count_edits(const EditBag& bag) {
  EditCounts counts;
  for (const Edit& edit : bag) {
    if (edit.kind == EditKind::insert)
      ++counts.inserts;
    else if (edit.text.empty())
      ++counts.deletions;
    else
      ++counts.replacements;
  }
  return counts;
}

} // namespace procedit
