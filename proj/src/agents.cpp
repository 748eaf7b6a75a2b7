#include "procedit/agents.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "procedit/default_templates.hpp"
#include "text_util.hpp"

namespace procedit {

namespace {

constexpr std::array<std::pair<AgentRole, std::string_view>, 5> kRoleNames{{
    {AgentRole::modify, "modify"},
    {AgentRole::verify, "verify"},
    {AgentRole::unified, "unified"},
    {AgentRole::resolve, "resolve"},
    {AgentRole::e2e, "e2e"},
}};

constexpr std::array<std::string_view, 5> kPlaceholders{"goal", "procedure", "hint", "edits_customize",
                                                        "edits_execute"};

struct Span {
  std::size_t begin;  // offset of "{{"
  std::size_t end;    // one past "}}"
  std::string name;
};

std::vector<Span> scan_placeholders(std::string_view body) {
  std::vector<Span> spans;
  std::size_t pos = 0;
  while ((pos = body.find("{{", pos)) != std::string_view::npos) {
    std::size_t close = body.find("}}", pos + 2);
    if (close == std::string_view::npos) break;
    spans.push_back({pos, close + 2, std::string(detail::trim_view(body.substr(pos + 2, close - pos - 2)))});
    pos = close + 2;
  }
  return spans;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

} // namespace

std::string_view to_string(AgentRole role) {
  for (const auto& [value, name] : kRoleNames)
    if (value == role) return name;
  return "?";
}

std::optional<AgentRole> agent_role_from_string(std::string_view name) {
  for (const auto& [value, label] : kRoleNames)
    if (label == name) return value;
  return std::nullopt;
}

PromptTemplate::PromptTemplate(std::string name, std::string body) : name_(std::move(name)), body_(std::move(body)) {
  for (const Span& span : scan_placeholders(body_)) {
    if (std::find(kPlaceholders.begin(), kPlaceholders.end(), span.name) == kPlaceholders.end())
      throw InputError("template '" + name_ + "' uses unknown placeholder {{" + span.name + "}}");
    if (std::find(placeholders_.begin(), placeholders_.end(), span.name) == placeholders_.end())
      placeholders_.push_back(span.name);
  }
}

std::string render_prompt(const PromptTemplate& prompt, const PromptInputs& inputs) {
  auto render_bag = [](const std::optional<EditBag>& bag) -> std::optional<std::string> {
    if (!bag) return std::nullopt;
    return bag->empty() ? std::string("(none)") : serialize_edit_bag(*bag);
  };
  auto value_of = [&](const std::string& name) -> std::optional<std::string> {
    if (name == "goal") return inputs.goal;
    if (name == "procedure") return to_numbered_text(inputs.procedure);
    if (name == "hint") return inputs.hint;
    if (name == "edits_customize") return render_bag(inputs.customize_edits);
    if (name == "edits_execute") return render_bag(inputs.execute_edits);
    return std::nullopt;
  };

  const std::string& body = prompt.body();
  std::string out;
  out.reserve(body.size());
  std::size_t cursor = 0;
  for (const Span& span : scan_placeholders(body)) {
    auto value = value_of(span.name);
    if (!value) throw UnboundPlaceholder(span.name);
    out.append(body, cursor, span.begin - cursor);
    out += *value;
    cursor = span.end;
  }
  out.append(body, cursor);
  return out;
}

TemplateSet TemplateSet::defaults() {
  TemplateSet set;
  for (const auto& [name, body] : detail::kDefaultTemplates) set.set(PromptTemplate(std::string(name), std::string(body)));
  return set;
}

TemplateSet TemplateSet::load(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) throw InputError("template directory not found: " + directory.string());
  TemplateSet set = defaults();
  for (const auto& [name, body] : detail::kDefaultTemplates) {
    auto path = directory / (std::string(name) + ".txt");
    if (std::filesystem::exists(path)) set.set(PromptTemplate(std::string(name), read_file(path)));
  }
  return set;
}

const PromptTemplate& TemplateSet::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw InputError("no template named '" + std::string(name) + "'");
  return it->second;
}

void TemplateSet::set(PromptTemplate prompt) {
  std::string name = prompt.name();
  templates_.insert_or_assign(std::move(name), std::move(prompt));
}

GatewayBackend::GatewayBackend(std::shared_ptr<Gateway> gateway, GenerationSettings settings)
    : gateway_(std::move(gateway)), settings_(std::move(settings)) {
  settings_.validate();
}

std::string GatewayBackend::complete(AgentRole, std::string_view, const std::string& prompt) {
  return gateway_->complete({settings_, prompt});
}

ScriptedBackend ScriptedBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read mock fixture file " + path.string());
  ScriptedBackend backend;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (detail::is_blank(line)) continue;
    auto entry = nlohmann::json::parse(line, nullptr, false);
    auto where = path.string() + ":" + std::to_string(number);
    if (entry.is_discarded() || !entry.is_object()) throw InputError(where + ": not a JSON object");
    auto role = entry.contains("role") && entry["role"].is_string()
                    ? agent_role_from_string(entry["role"].get<std::string>())
                    : std::nullopt;
    if (!role) throw InputError(where + ": missing or unknown role");
    if (!entry.contains("record_id") || !entry["record_id"].is_string())
      throw InputError(where + ": missing record_id");
    auto record_id = entry["record_id"].get<std::string>();
    if (entry.contains("error")) {
      backend.script_outage(*role, record_id);
    } else if (entry.contains("output") && entry["output"].is_string()) {
      backend.script(*role, record_id, entry["output"].get<std::string>());
    } else {
      throw InputError(where + ": needs an \"output\" string or an \"error\"");
    }
  }
  return backend;
}

void ScriptedBackend::script(AgentRole role, std::string record_id, std::string output) {
  entries_.insert_or_assign({role, std::move(record_id)}, Entry{std::move(output), false});
}

void ScriptedBackend::script_outage(AgentRole role, std::string record_id) {
  entries_.insert_or_assign({role, std::move(record_id)}, Entry{{}, true});
}

std::string ScriptedBackend::complete(AgentRole role, std::string_view record_id, const std::string&) {
  auto it = entries_.find({role, std::string(record_id)});
  if (it == entries_.end()) throw MissingFixture(role, std::string(record_id));
  if (it->second.outage) throw EndpointError(503, "scripted outage");
  return it->second.output;
}

AgentContext context_of(const CustomizationRecord& record) { return {record.id, record.goal, record.hint}; }

Agents::Agents(std::shared_ptr<CompletionBackend> backend, TemplateSet templates, AgentOptions options)
    : backend_(std::move(backend)), templates_(std::move(templates)), options_(options) {
  if (!backend_) throw InputError("agents need a completion backend");
}

AgentOutput Agents::run_edit_role(AgentRole role, std::string_view template_name, const AgentContext& context,
                                  PromptInputs inputs) const {
  AgentOutput output;
  output.role = role;
  output.prompt = render_prompt(templates_.get(template_name), inputs);
  output.raw = backend_->complete(role, context.record_id, output.prompt);
  auto parsed = parse_edit_bag(output.raw);
  output.parsed_edits = std::move(parsed.edits);
  output.diagnostics = std::move(parsed.diagnostics);
  return output;
}

AgentOutput Agents::modify(const AgentContext& context, const Procedure& procedure) const {
  return run_edit_role(AgentRole::modify, "modify", context,
                       {context.goal.text(), procedure, context.hint.text, std::nullopt, std::nullopt});
}

AgentOutput Agents::verify(const AgentContext& context, const Procedure& procedure) const {
  PromptInputs inputs{context.goal.text(), procedure, std::nullopt, std::nullopt, std::nullopt};
  if (options_.verify_sees_hint) {
    inputs.hint = context.hint.text;
    return run_edit_role(AgentRole::verify, "verify_with_hint", context, std::move(inputs));
  }
  return run_edit_role(AgentRole::verify, "verify", context, std::move(inputs));
}

AgentOutput Agents::unified(const AgentContext& context, const Procedure& procedure) const {
  return run_edit_role(AgentRole::unified, "unified", context,
                       {context.goal.text(), procedure, context.hint.text, std::nullopt, std::nullopt});
}

AgentOutput Agents::e2e(const AgentContext& context, const Procedure& procedure) const {
  AgentOutput output;
  output.role = AgentRole::e2e;
  output.prompt = render_prompt(templates_.get("e2e"),
                                {context.goal.text(), procedure, context.hint.text, std::nullopt, std::nullopt});
  output.raw = backend_->complete(AgentRole::e2e, context.record_id, output.prompt);
  try {
    output.parsed_procedure = parse_numbered_text(output.raw);
  } catch (const InputError& e) {
    output.failure = e.what();
  }
  return output;
}

ResolveOutcome Agents::resolve(const AgentContext& context, const Procedure& procedure, const EditBag& customize,
                               const EditBag& execute) const {
  ResolveOutcome outcome;
  EditBag candidate;
  try {
    outcome.output = run_edit_role(AgentRole::resolve, "resolve", context,
                                   {context.goal.text(), procedure, context.hint.text, customize, execute});
    candidate = outcome.output.parsed_edits;
  } catch (const GatewayError& e) {
    outcome.output.role = AgentRole::resolve;
    outcome.output.prompt = render_prompt(templates_.get("resolve"),
                                          {context.goal.text(), procedure, context.hint.text, customize, execute});
    outcome.output.failure = e.what();
    outcome.fallback = options_.fallback_policy;
    auto merge = merge_deterministic(customize, execute, options_.fallback_policy);
    candidate = std::move(merge.merged);
    outcome.conflict_losers = std::move(merge.dropped);
  }
  ValidationReport report = validate(candidate, procedure);
  outcome.merged = std::move(report.applicable);
  outcome.rejected = std::move(report.rejected);
  return outcome;
}

} // namespace procedit
