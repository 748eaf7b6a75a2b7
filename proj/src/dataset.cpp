#include "procedit/dataset.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "text_util.hpp"

namespace procedit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const json& field(const json& object, const char* name) {
  auto it = object.find(name);
  if (it == object.end()) throw InputError(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const json& object, const char* name) {
  const json& value = field(object, name);
  if (!value.is_string()) throw InputError(std::string("field '") + name + "' must be a string");
  return value.get<std::string>();
}

template <typename Enum, typename Lookup>
Enum enum_field(const json& object, const char* name, Lookup lookup) {
  std::string text = string_field(object, name);
  auto value = lookup(text);
  if (!value) throw InputError(std::string("invalid ") + name + " '" + text + "'");
  return *value;
}

bool is_header(const json& object) { return object.is_object() && object.contains("format") && !object.contains("id"); }

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

} // namespace

CustomizationRecord parse_record(std::string_view line) {
  json object = json::parse(line, nullptr, false);
  if (object.is_discarded()) throw InputError("not valid JSON");
  if (!object.is_object()) throw InputError("record must be a JSON object");

  CustomizationRecord record;
  record.id = string_field(object, "id");
  if (detail::is_blank(record.id)) throw InputError("id is empty");
  record.goal = Goal(string_field(object, "goal"));

  const json& steps = field(object, "steps");
  if (!steps.is_array()) throw InputError("field 'steps' must be an array");
  if (steps.empty()) throw InputError("procedure has no steps");
  std::vector<std::string> texts;
  for (const json& step : steps) {
    if (!step.is_string()) throw InputError("every step must be a string");
    texts.push_back(step.get<std::string>());
  }
  record.procedure = Procedure::from_steps(texts);

  const json& hint = field(object, "hint");
  if (!hint.is_object()) throw InputError("field 'hint' must be an object");
  record.hint = make_hint(string_field(hint, "text"),
                          enum_field<ConstraintSubtype>(hint, "constraint_subtype", constraint_subtype_from_string),
                          enum_field<Expertise>(hint, "expertise", expertise_from_string),
                          enum_field<CriticalType>(hint, "critical_type", critical_type_from_string));
  record.source = enum_field<RecordSource>(object, "source", record_source_from_string);
  return record;
}

std::string format_record(const CustomizationRecord& record) {
  ordered_json hint;
  hint["text"] = record.hint.text;
  hint["constraint_subtype"] = to_string(record.hint.constraint_subtype);
  hint["expertise"] = to_string(record.hint.expertise);
  hint["critical_type"] = to_string(record.hint.critical_type);

  ordered_json object;
  object["id"] = record.id;
  object["goal"] = record.goal.text();
  object["steps"] = record.procedure.steps();
  object["hint"] = std::move(hint);
  object["source"] = to_string(record.source);
  return object.dump();
}

std::vector<DatasetEntry> parse_entries(std::string_view text, LoadMode mode) {
  std::vector<DatasetEntry> entries;
  std::unordered_set<std::string> seen;
  bool first_content_line = true;
  auto lines = detail::split_lines(text);

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::is_blank(lines[i])) continue;
    const std::size_t number = i + 1;
    auto reject = [&](DatasetEntry& entry, std::string message) {
      DatasetDiagnostic diagnostic{number, std::move(message)};
      if (mode == LoadMode::strict) throw DatasetError(diagnostic);
      entry.diagnostic = std::move(diagnostic);
    };

    if (first_content_line) {
      first_content_line = false;
      json maybe_header = json::parse(lines[i], nullptr, false);
      if (!maybe_header.is_discarded() && is_header(maybe_header)) {
        const json& format = maybe_header["format"];
        if (!format.is_number_integer() || format.get<int>() != kDatasetFormat) {
          DatasetEntry entry{number, {}, std::nullopt, std::nullopt};
          reject(entry, "unsupported dataset format " + format.dump());
          entries.push_back(std::move(entry));
        }
        continue;
      }
    }

    DatasetEntry entry{number, {}, std::nullopt, std::nullopt};
    json object = json::parse(lines[i], nullptr, false);
    if (!object.is_discarded() && object.is_object() && object.contains("id") && object["id"].is_string())
      entry.id = object["id"].get<std::string>();
    try {
      CustomizationRecord record = parse_record(lines[i]);
      if (!seen.insert(record.id).second)
        reject(entry, "duplicate id '" + record.id + "'");
      else
        entry.record = std::move(record);
    } catch (const DatasetError&) {
      throw;
    } catch (const InputError& e) {
      reject(entry, e.what());
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<DatasetEntry> load_entries(const std::filesystem::path& path, LoadMode mode) {
  return parse_entries(read_all(path), mode);
}

LoadResult load_records(const std::filesystem::path& path, LoadMode mode) {
  LoadResult result;
  for (auto& entry : load_entries(path, mode)) {
    if (entry.record) result.records.push_back(std::move(*entry.record));
    if (entry.diagnostic) result.diagnostics.push_back(std::move(*entry.diagnostic));
  }
  return result;
}

std::string format_records(std::span<const CustomizationRecord> records) {
  std::string out = ordered_json{{"format", kDatasetFormat}}.dump();
  out += '\n';
  for (const auto& record : records) {
    out += format_record(record);
    out += '\n';
  }
  return out;
}

void save_records(const std::filesystem::path& path, std::span<const CustomizationRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << format_records(records);
}

namespace {

template <typename Enum>
std::vector<CategoryShare> shares(std::span<const CustomizationRecord> records, std::initializer_list<Enum> values,
                                  Enum (*pick)(const CustomizationRecord&)) {
  std::vector<CategoryShare> out;
  for (Enum value : values) {
    CategoryShare share{std::string(to_string(value)), 0, 0.0};
    for (const auto& record : records)
      if (pick(record) == value) ++share.count;
    if (!records.empty()) share.percent = 100.0 * static_cast<double>(share.count) / static_cast<double>(records.size());
    out.push_back(std::move(share));
  }
  return out;
}

} // namespace

DatasetStats dataset_stats(std::span<const CustomizationRecord> records) {
  DatasetStats stats;
  stats.records = records.size();
  std::set<std::string> goals;
  std::set<std::string> hints;
  for (const auto& record : records) {
    goals.insert(record.goal.text());
    hints.insert(record.hint.text);
  }
  stats.unique_goals = goals.size();
  stats.unique_hints = hints.size();

  stats.constraint_subtype = shares<ConstraintSubtype>(
      records,
      {ConstraintSubtype::prerequisite, ConstraintSubtype::preference, ConstraintSubtype::refinement,
       ConstraintSubtype::none},
      [](const CustomizationRecord& r) { return r.hint.constraint_subtype; });
  stats.expertise = shares<Expertise>(
      records, {Expertise::beginner, Expertise::intermediate, Expertise::expert, Expertise::unspecified},
      [](const CustomizationRecord& r) { return r.hint.expertise; });
  stats.critical_type = shares<CriticalType>(
      records, {CriticalType::constraint, CriticalType::expertise, CriticalType::both, CriticalType::unspecified},
      [](const CustomizationRecord& r) { return r.hint.critical_type; });
  stats.source = shares<RecordSource>(records, {RecordSource::real, RecordSource::simulated, RecordSource::other},
                                      [](const CustomizationRecord& r) { return r.source; });
  return stats;
}

std::string format_stats(const DatasetStats& stats) {
  std::ostringstream out;
  out << "records       " << stats.records << '\n';
  out << "unique goals  " << stats.unique_goals << '\n';
  out << "unique hints  " << stats.unique_hints << '\n';
  auto section = [&](std::string_view title, const std::vector<CategoryShare>& rows) {
    out << '\n' << title << '\n';
    for (const auto& row : rows)
      out << "  " << std::left << std::setw(14) << row.name << std::right << std::setw(6) << row.count << std::setw(9)
          << std::fixed << std::setprecision(1) << row.percent << "%\n";
  };
  section("constraint_subtype", stats.constraint_subtype);
  section("expertise", stats.expertise);
  section("critical_type", stats.critical_type);
  section("source", stats.source);
  return out.str();
}

} // namespace procedit
