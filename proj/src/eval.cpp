#include "procedit/eval.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"

namespace procedit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 5> kCategoryNames{"missing_steps", "extra_steps", "underspecified_steps",
                                                         "incorrect_steps", "wrong_order"};

std::size_t index_of(ErrorCategory category) { return static_cast<std::size_t>(category); }
std::size_t index_of(Criterion criterion) { return static_cast<std::size_t>(criterion); }

struct Item {
  std::string method;
  std::string record_id;
  std::vector<JudgmentRecord> judgments;
};

std::vector<Item> group_items(std::span<const JudgmentRecord> judgments) {
  std::vector<Item> items;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& j : judgments) {
    auto [it, inserted] = index.try_emplace({j.method, j.record_id}, items.size());
    if (inserted) items.push_back({j.method, j.record_id, {}});
    items[it->second].judgments.push_back(j);
  }
  return items;
}

} // namespace

std::string_view to_string(Criterion criterion) {
  return criterion == Criterion::customized ? "customized" : "executable";
}

std::string_view to_string(ErrorCategory category) { return kCategoryNames[index_of(category)]; }

std::optional<Criterion> criterion_from_string(std::string_view name) {
  if (name == "customized") return Criterion::customized;
  if (name == "executable") return Criterion::executable;
  return std::nullopt;
}

std::optional<ErrorCategory> error_category_from_string(std::string_view name) {
  for (ErrorCategory category : kErrorCategories)
    if (to_string(category) == name) return category;
  return std::nullopt;
}

std::string_view to_string(GroupDimension dimension) {
  switch (dimension) {
  case GroupDimension::constraint_subtype: return "constraint_subtype";
  case GroupDimension::expertise: return "expertise";
  case GroupDimension::critical_type: return "critical_type";
  }
  return "?";
}

std::optional<GroupDimension> group_dimension_from_string(std::string_view name) {
  for (auto d : {GroupDimension::constraint_subtype, GroupDimension::expertise, GroupDimension::critical_type})
    if (to_string(d) == name) return d;
  return std::nullopt;
}

bool majority(std::span<const bool> verdicts, TieRule tie_rule) {
  if (verdicts.empty()) throw EvenPanel(0);
  if (verdicts.size() % 2 == 0 && tie_rule == TieRule::refuse) throw EvenPanel(verdicts.size());
  auto positives = static_cast<std::size_t>(std::count(verdicts.begin(), verdicts.end(), true));
  auto negatives = verdicts.size() - positives;
  if (positives == negatives) return tie_rule == TieRule::positive;
  return positives > negatives;
}

ItemVerdicts item_verdicts(std::span<const JudgmentRecord> judgments, TieRule tie_rule) {
  std::string record_id = judgments.empty() ? std::string() : judgments.front().record_id;
  auto panel = [&](Criterion criterion) {
    // std::vector<bool> has no contiguous storage to span over.
    auto votes = std::make_unique<bool[]>(judgments.size());
    std::size_t size = 0;
    for (const auto& j : judgments)
      if (j.criterion == criterion) votes[size++] = j.verdict;
    if (size == 0) throw MissingCriterion(record_id, criterion);
    return majority(std::span<const bool>(votes.get(), size), tie_rule);
  };
  ItemVerdicts verdicts;
  verdicts.customized = panel(Criterion::customized);
  verdicts.executable = panel(Criterion::executable);
  verdicts.fully_correct = verdicts.customized && verdicts.executable;
  return verdicts;
}

std::int64_t percent_hundredths(std::size_t count, std::size_t n) {
  if (n == 0) throw InputError("percentage of an empty group");
  const auto c = static_cast<std::int64_t>(count);
  const auto d = static_cast<std::int64_t>(n);
  return (20000 * c + d) / (2 * d);
}

std::string format_hundredths(std::int64_t hundredths) {
  std::ostringstream out;
  if (hundredths < 0) {
    out << '-';
    hundredths = -hundredths;
  }
  out << hundredths / 100 << '.' << std::setw(2) << std::setfill('0') << hundredths % 100;
  return out.str();
}

std::vector<std::string> methods_of(std::span<const JudgmentRecord> judgments) {
  std::vector<std::string> methods;
  for (const auto& j : judgments)
    if (std::find(methods.begin(), methods.end(), j.method) == methods.end()) methods.push_back(j.method);
  return methods;
}

namespace {

std::vector<std::string> group_names(GroupDimension dimension) {
  std::vector<std::string> names;
  switch (dimension) {
  case GroupDimension::constraint_subtype:
    for (auto v : {ConstraintSubtype::prerequisite, ConstraintSubtype::preference, ConstraintSubtype::refinement,
                   ConstraintSubtype::none})
      names.emplace_back(to_string(v));
    break;
  case GroupDimension::expertise:
    for (auto v : {Expertise::beginner, Expertise::intermediate, Expertise::expert, Expertise::unspecified})
      names.emplace_back(to_string(v));
    break;
  case GroupDimension::critical_type:
    for (auto v : {CriticalType::constraint, CriticalType::expertise, CriticalType::both, CriticalType::unspecified})
      names.emplace_back(to_string(v));
    break;
  }
  return names;
}

std::string group_of(const CustomizationHint& hint, GroupDimension dimension) {
  switch (dimension) {
  case GroupDimension::constraint_subtype: return std::string(to_string(hint.constraint_subtype));
  case GroupDimension::expertise: return std::string(to_string(hint.expertise));
  case GroupDimension::critical_type: return std::string(to_string(hint.critical_type));
  }
  return {};
}

void tally(MetricsRow& row, const ItemVerdicts& v) {
  ++row.n;
  row.customized += v.customized;
  row.executable += v.executable;
  row.fully_correct += v.fully_correct;
}

} // namespace

MetricsReport aggregate(std::span<const JudgmentRecord> judgments, const Grouping* grouping, TieRule tie_rule) {
  MetricsReport report;
  auto items = group_items(judgments);

  for (const std::string& method : methods_of(judgments)) {
    if (!grouping) {
      MetricsRow row{method, std::nullopt};
      for (const Item& item : items)
        if (item.method == method) tally(row, item_verdicts(item.judgments, tie_rule));
      report.rows.push_back(std::move(row));
      continue;
    }

    std::vector<MetricsRow> rows;
    for (const auto& name : group_names(grouping->dimension)) rows.push_back({method, name});
    std::size_t ungrouped = 0;
    for (const Item& item : items) {
      if (item.method != method) continue;
      auto hint = grouping->hints.find(item.record_id);
      if (hint == grouping->hints.end()) {
        ++ungrouped;
        continue;
      }
      std::string group = group_of(hint->second, grouping->dimension);
      auto row = std::find_if(rows.begin(), rows.end(), [&](const MetricsRow& r) { return r.group == group; });
      tally(*row, item_verdicts(item.judgments, tie_rule));
    }
    for (auto& row : rows) {
      if (row.n == 0)
        report.notes.push_back(method + ": no items with " + std::string(to_string(grouping->dimension)) + " = " +
                               *row.group + "; row omitted");
      else
        report.rows.push_back(std::move(row));
    }
    if (ungrouped > 0)
      report.notes.push_back(method + ": " + std::to_string(ungrouped) + " items have no metadata and were skipped");
  }
  return report;
}

VerdictSets verdict_sets(std::span<const JudgmentRecord> judgments, std::string_view method, TieRule tie_rule) {
  VerdictSets sets;
  for (const Item& item : group_items(judgments)) {
    if (item.method != method) continue;
    ItemVerdicts v = item_verdicts(item.judgments, tie_rule);
    if (v.customized) sets.customized.push_back(item.record_id);
    if (v.executable) sets.executable.push_back(item.record_id);
    if (v.fully_correct) sets.fully_correct.push_back(item.record_id);
  }
  return sets;
}

std::size_t ErrorDistribution::count(ErrorCategory category) const {
  return by_criterion[0][index_of(category)] + by_criterion[1][index_of(category)];
}

std::size_t ErrorDistribution::count(Criterion criterion, ErrorCategory category) const {
  return by_criterion[index_of(criterion)][index_of(category)];
}

std::int64_t ErrorDistribution::percent(ErrorCategory category) const {
  return total_marks == 0 ? 0 : percent_hundredths(count(category), total_marks);
}

ErrorDistribution error_distribution(std::span<const JudgmentRecord> judgments, std::string_view method) {
  ErrorDistribution distribution;
  distribution.method = std::string(method);
  for (const auto& j : judgments) {
    if (j.method != method) continue;
    for (ErrorCategory category : j.error_categories) {
      ++distribution.by_criterion[index_of(j.criterion)][index_of(category)];
      ++distribution.total_marks;
    }
  }
  return distribution;
}

std::vector<JudgmentRecord> parse_judgments(std::string_view text) {
  std::vector<JudgmentRecord> judgments;
  auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::is_blank(lines[i])) continue;
    auto fail = [&](const std::string& why) { return InputError("judgments line " + std::to_string(i + 1) + ": " + why); };
    json object = json::parse(lines[i], nullptr, false);
    if (object.is_discarded() || !object.is_object()) throw fail("not a JSON object");

    JudgmentRecord j;
    try {
      j.method = object.at("method").get<std::string>();
      j.record_id = object.at("record_id").get<std::string>();
      j.annotator_id = object.at("annotator_id").get<std::string>();
      auto criterion = criterion_from_string(object.at("criterion").get<std::string>());
      if (!criterion) throw fail("unknown criterion");
      j.criterion = *criterion;
      j.verdict = object.at("verdict").get<bool>();
      if (object.contains("error_categories")) {
        for (const json& name : object["error_categories"]) {
          auto category = error_category_from_string(name.get<std::string>());
          if (!category) throw fail("unknown error category " + name.dump());
          j.error_categories.push_back(*category);
        }
      }
    } catch (const json::exception& e) {
      throw fail(e.what());
    }
    if (j.verdict && !j.error_categories.empty()) throw fail("positive verdict with error categories");
    if (!j.verdict && j.error_categories.empty()) throw fail("negative verdict without error categories");
    judgments.push_back(std::move(j));
  }
  return judgments;
}

std::vector<JudgmentRecord> load_judgments(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_judgments(buffer.str());
}

std::string format_judgment(const JudgmentRecord& judgment) {
  ordered_json categories = ordered_json::array();
  for (ErrorCategory c : judgment.error_categories) categories.push_back(to_string(c));
  ordered_json object;
  object["method"] = judgment.method;
  object["record_id"] = judgment.record_id;
  object["annotator_id"] = judgment.annotator_id;
  object["criterion"] = to_string(judgment.criterion);
  object["verdict"] = judgment.verdict;
  object["error_categories"] = std::move(categories);
  return object.dump();
}

std::string format_metrics_table(const MetricsReport& report) {
  const bool grouped = std::any_of(report.rows.begin(), report.rows.end(), [](const auto& r) { return r.group.has_value(); });
  std::size_t method_width = 6;
  for (const auto& row : report.rows) method_width = std::max(method_width, row.method.size());

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(method_width) + 2) << "method";
  if (grouped) out << std::setw(16) << "group";
  out << std::right << std::setw(6) << "n" << std::setw(13) << "customized" << std::setw(13) << "executable"
      << std::setw(16) << "fully_correct" << '\n';
  for (const auto& row : report.rows) {
    out << std::left << std::setw(static_cast<int>(method_width) + 2) << row.method;
    if (grouped) out << std::setw(16) << row.group.value_or("");
    out << std::right << std::setw(6) << row.n << std::setw(12) << format_hundredths(row.customized_pct()) << '%'
        << std::setw(12) << format_hundredths(row.executable_pct()) << '%' << std::setw(15)
        << format_hundredths(row.fully_correct_pct()) << "%\n";
  }
  for (const auto& note : report.notes) out << "note: " << note << '\n';
  return out.str();
}

std::string format_metrics_json(const MetricsReport& report) {
  std::string out;
  for (const auto& row : report.rows) {
    ordered_json object;
    object["method"] = row.method;
    object["group"] = row.group ? ordered_json(*row.group) : ordered_json(nullptr);
    object["n"] = row.n;
    object["customized"] = row.customized;
    object["executable"] = row.executable;
    object["fully_correct"] = row.fully_correct;
    object["customized_pct"] = format_hundredths(row.customized_pct());
    object["executable_pct"] = format_hundredths(row.executable_pct());
    object["fully_correct_pct"] = format_hundredths(row.fully_correct_pct());
    out += object.dump();
    out += '\n';
  }
  return out;
}

std::string format_error_distribution(const ErrorDistribution& distribution) {
  std::ostringstream out;
  out << "errors for " << distribution.method << " (" << distribution.total_marks << " marks)\n";
  out << std::left << std::setw(22) << "category" << std::right << std::setw(12) << "customized" << std::setw(12)
      << "executable" << std::setw(8) << "total" << std::setw(10) << "share" << '\n';
  for (ErrorCategory category : kErrorCategories) {
    out << std::left << std::setw(22) << to_string(category) << std::right << std::setw(12)
        << distribution.count(Criterion::customized, category) << std::setw(12)
        << distribution.count(Criterion::executable, category) << std::setw(8) << distribution.count(category)
        << std::setw(9) << format_hundredths(distribution.percent(category)) << "%\n";
  }
  return out.str();
}

} // namespace procedit
