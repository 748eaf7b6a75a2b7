#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "procedit/error.hpp"

namespace procedit {

enum class EditKind { insert, replace };

std::string_view to_string(EditKind kind);

/// One semi-symbolic edit. Anchors always refer to the numbering of the
/// procedure the edit was proposed against.
///
///   insert(k, text)   new step after step k; k == 0 prepends
///   replace(k, text)  new text for step k; empty text deletes step k
struct Edit {
  EditKind kind = EditKind::insert;
  std::size_t anchor = 0;
  std::string text;

  bool is_deletion() const noexcept { return kind == EditKind::replace && text.empty(); }

  static Edit insert(std::size_t anchor, std::string text) { return {EditKind::insert, anchor, std::move(text)}; }
  static Edit replace(std::size_t anchor, std::string text) { return {EditKind::replace, anchor, std::move(text)}; }
  static Edit remove(std::size_t anchor) { return {EditKind::replace, anchor, {}}; }

  friend bool operator==(const Edit&, const Edit&) = default;
};

/// Edits in emission order.
using EditBag = std::vector<Edit>;

struct ParseDiagnostic {
  std::size_t line_number = 0;
  std::string raw_line;
  std::string reason;

  friend bool operator==(const ParseDiagnostic&, const ParseDiagnostic&) = default;
};

class MalformedEdit : public InputError {
public:
  explicit MalformedEdit(std::string reason) : InputError("malformed edit: " + reason), reason_(std::move(reason)) {}
  const std::string& reason() const noexcept { return reason_; }

private:
  std::string reason_;
};

/// Parses `op(anchor, body)` with op in {insert, replace}, case-insensitive.
/// The body runs to the last ')' on the line, so step texts may contain
/// commas and parentheses. The body is trimmed and one layer of matching
/// single or double quotes is removed. Throws MalformedEdit.
Edit parse_edit(std::string_view line);

struct ParsedEditBag {
  EditBag edits;
  std::vector<ParseDiagnostic> diagnostics;
};

/// Parses every non-blank line, after stripping list markers such as "- ",
/// "* " or "3. ". Lines that fail become diagnostics; never throws.
ParsedEditBag parse_edit_bag(std::string_view text);

/// Canonical single-line form, e.g. "insert(2, XX)" or "replace(3, )".
/// parse_edit(serialize_edit(e)) == e for every edit with single-line,
/// trimmed text.
std::string serialize_edit(const Edit& edit);

/// One canonical edit per line, no trailing newline.
std::string serialize_edit_bag(const EditBag& bag);

} // namespace procedit
