#include "procedit/procedure.hpp"

#include <array>
#include <utility>

#include "text_util.hpp"

namespace procedit {

std::string trim(std::string_view text) { return std::string(detail::trim_view(text)); }

namespace {

std::string checked_step(std::string_view raw, std::size_t number) {
  std::string_view text = detail::trim_view(raw);
  if (text.empty()) throw EmptyStep(number);
  if (detail::has_line_break(text))
    throw InputError("step " + std::to_string(number) + " spans several lines");
  return std::string(text);
}

} // namespace

Procedure Procedure::from_steps(std::span<const std::string> steps) {
  Procedure result;
  result.steps_.reserve(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) result.steps_.push_back(checked_step(steps[i], i + 1));
  return result;
}

Procedure Procedure::from_steps(std::initializer_list<std::string_view> steps) {
  Procedure result;
  result.steps_.reserve(steps.size());
  std::size_t number = 0;
  for (std::string_view step : steps) result.steps_.push_back(checked_step(step, ++number));
  return result;
}

std::string to_numbered_text(const Procedure& procedure) {
  std::string out;
  for (std::size_t i = 0; i < procedure.size(); ++i) {
    if (i > 0) out += '\n';
    out += std::to_string(i + 1);
    out += ". ";
    out += procedure.steps()[i];
  }
  return out;
}

namespace {

struct NumberedLine {
  unsigned long long number;
  std::string_view text;
};

// "<digits><sep><space>text" where sep is one of . ) :
std::optional<NumberedLine> match_numbered(std::string_view line) {
  std::string_view rest = line;
  while (!rest.empty() && detail::is_space(rest.front())) rest.remove_prefix(1);
  std::size_t digits = 0;
  while (digits < rest.size() && detail::is_digit(rest[digits])) ++digits;
  if (digits == 0 || digits > 18) return std::nullopt;
  if (digits + 1 >= rest.size()) return std::nullopt;
  char sep = rest[digits];
  if (sep != '.' && sep != ')' && sep != ':') return std::nullopt;
  if (!detail::is_space(rest[digits + 1])) return std::nullopt;
  std::string_view text = detail::trim_view(rest.substr(digits + 2));
  if (text.empty()) return std::nullopt;
  return NumberedLine{std::stoull(std::string(rest.substr(0, digits))), text};
}

} // namespace

Procedure parse_numbered_text(std::string_view text, ParseMode mode) {
  std::vector<std::string> steps;
  auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::is_blank(lines[i])) continue;
    auto parsed = match_numbered(lines[i]);
    if (!parsed) {
      if (mode == ParseMode::strict) throw MalformedLine(i + 1, "not a numbered step");
      continue;
    }
    if (mode == ParseMode::strict && parsed->number != steps.size() + 1)
      throw MalformedLine(i + 1, "expected step " + std::to_string(steps.size() + 1) + ", found " +
                                     std::to_string(parsed->number));
    steps.emplace_back(parsed->text);
  }
  if (steps.empty()) throw NoStepsFound();
  return Procedure::from_steps(steps);
}

Goal::Goal(std::string_view text) : text_(trim(text)) {
  if (text_.empty()) throw InputError("goal is empty");
}

CustomizationHint make_hint(std::string_view text, ConstraintSubtype constraint_subtype,
                            Expertise expertise, CriticalType critical_type) {
  CustomizationHint hint{trim(text), constraint_subtype, expertise, critical_type};
  if (hint.text.empty()) throw InputError("customization hint is empty");
  return hint;
}

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::pair<Enum, std::string_view>, N>& table,
                           std::string_view name) {
  for (const auto& [value, label] : table)
    if (label == name) return value;
  return std::nullopt;
}

template <typename Enum, std::size_t N>
std::string_view name_of(const std::array<std::pair<Enum, std::string_view>, N>& table, Enum value) {
  for (const auto& [candidate, label] : table)
    if (candidate == value) return label;
  return "?";
}

constexpr std::array<std::pair<ConstraintSubtype, std::string_view>, 4> kConstraintNames{{
    {ConstraintSubtype::prerequisite, "prerequisite"},
    {ConstraintSubtype::preference, "preference"},
    {ConstraintSubtype::refinement, "refinement"},
    {ConstraintSubtype::none, "none"},
}};

constexpr std::array<std::pair<Expertise, std::string_view>, 4> kExpertiseNames{{
    {Expertise::beginner, "beginner"},
    {Expertise::intermediate, "intermediate"},
    {Expertise::expert, "expert"},
    {Expertise::unspecified, "unspecified"},
}};

constexpr std::array<std::pair<CriticalType, std::string_view>, 4> kCriticalNames{{
    {CriticalType::constraint, "constraint"},
    {CriticalType::expertise, "expertise"},
    {CriticalType::both, "both"},
    {CriticalType::unspecified, "unspecified"},
}};

constexpr std::array<std::pair<RecordSource, std::string_view>, 3> kSourceNames{{
    {RecordSource::real, "real"},
    {RecordSource::simulated, "simulated"},
    {RecordSource::other, "other"},
}};

} // namespace

std::string_view to_string(ConstraintSubtype value) { return name_of(kConstraintNames, value); }
std::string_view to_string(Expertise value) { return name_of(kExpertiseNames, value); }
std::string_view to_string(CriticalType value) { return name_of(kCriticalNames, value); }
std::string_view to_string(RecordSource value) { return name_of(kSourceNames, value); }

std::optional<ConstraintSubtype> constraint_subtype_from_string(std::string_view name) {
  return lookup(kConstraintNames, name);
}
std::optional<Expertise> expertise_from_string(std::string_view name) { return lookup(kExpertiseNames, name); }
std::optional<CriticalType> critical_type_from_string(std::string_view name) {
  return lookup(kCriticalNames, name);
}
std::optional<RecordSource> record_source_from_string(std::string_view name) {
  return lookup(kSourceNames, name);
}

} // namespace procedit
