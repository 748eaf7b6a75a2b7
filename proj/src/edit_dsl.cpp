#include "procedit/edit_dsl.hpp"

#include <charconv>
#include <limits>

#include "text_util.hpp"

namespace procedit {

std::string_view to_string(EditKind kind) { return kind == EditKind::insert ? "insert" : "replace"; }

namespace {

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char x = a[i] >= 'A' && a[i] <= 'Z' ? static_cast<char>(a[i] - 'A' + 'a') : a[i];
    if (x != b[i]) return false;
  }
  return true;
}

bool is_quoted(std::string_view text) {
  return text.size() >= 2 && (text.front() == '"' || text.front() == '\'') && text.back() == text.front();
}

// Leading "- ", "* ", "+ ", "• " bullets and "12. " / "12) " enumerations.
std::string_view strip_list_marker(std::string_view line) {
  line = detail::trim_view(line);
  for (std::string_view bullet : {"- ", "* ", "+ ", "\xE2\x80\xA2 "}) {
    if (line.starts_with(bullet)) return detail::trim_view(line.substr(bullet.size()));
  }
  std::size_t digits = 0;
  while (digits < line.size() && detail::is_digit(line[digits])) ++digits;
  if (digits > 0 && digits + 1 < line.size() && (line[digits] == '.' || line[digits] == ')') &&
      detail::is_space(line[digits + 1]))
    return detail::trim_view(line.substr(digits + 2));
  return line;
}

} // namespace

Edit parse_edit(std::string_view line) {
  std::string_view text = detail::trim_view(line);
  std::size_t open = text.find('(');
  if (open == std::string_view::npos) throw MalformedEdit("missing '('");
  std::size_t close = text.rfind(')');
  if (close == std::string_view::npos || close < open) throw MalformedEdit("missing ')'");
  if (close + 1 != text.size()) throw MalformedEdit("text after closing ')'");

  std::string_view op = detail::trim_view(text.substr(0, open));
  Edit edit;
  if (iequals(op, "insert"))
    edit.kind = EditKind::insert;
  else if (iequals(op, "replace"))
    edit.kind = EditKind::replace;
  else
    throw MalformedEdit("unknown operation '" + std::string(op) + "'");

  std::string_view args = text.substr(open + 1, close - open - 1);
  std::size_t comma = args.find(',');
  if (comma == std::string_view::npos) throw MalformedEdit("missing ',' after anchor");

  std::string_view anchor = detail::trim_view(args.substr(0, comma));
  if (anchor.empty()) throw MalformedEdit("missing anchor");
  if (anchor.front() == '-' && anchor.size() > 1 && detail::is_digit(anchor[1]))
    throw MalformedEdit("anchor must be non-negative");
  auto [end, ec] = std::from_chars(anchor.data(), anchor.data() + anchor.size(), edit.anchor);
  if (ec == std::errc::result_out_of_range) throw MalformedEdit("anchor out of range");
  if (ec != std::errc() || end != anchor.data() + anchor.size() || anchor.front() == '+')
    throw MalformedEdit("anchor not an integer");

  std::string_view body = detail::trim_view(args.substr(comma + 1));
  if (is_quoted(body)) body = body.substr(1, body.size() - 2);
  edit.text = std::string(body);
  return edit;
}

ParsedEditBag parse_edit_bag(std::string_view text) {
  ParsedEditBag result;
  auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::is_blank(lines[i])) continue;
    try {
      result.edits.push_back(parse_edit(strip_list_marker(lines[i])));
    } catch (const MalformedEdit& e) {
      result.diagnostics.push_back({i + 1, std::string(lines[i]), e.reason()});
    }
  }
  return result;
}

std::string serialize_edit(const Edit& edit) {
  std::string out(to_string(edit.kind));
  out += '(';
  out += std::to_string(edit.anchor);
  out += ", ";
  // A text that is itself quoted would lose its quotes on parse; wrap it once more.
  if (is_quoted(edit.text)) {
    out += '"';
    out += edit.text;
    out += '"';
  } else {
    out += edit.text;
  }
  out += ')';
  return out;
}

std::string serialize_edit_bag(const EditBag& bag) {
  std::string out;
  for (std::size_t i = 0; i < bag.size(); ++i) {
    if (i > 0) out += '\n';
    out += serialize_edit(bag[i]);
  }
  return out;
}

} // namespace procedit
