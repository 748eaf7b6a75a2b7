#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "procedit/edit_dsl.hpp"
#include "procedit/edit_engine.hpp"
#include "procedit/gateway.hpp"
#include "procedit/procedure.hpp"

namespace procedit {

enum class AgentRole { modify, verify, unified, resolve, e2e };

std::string_view to_string(AgentRole role);
std::optional<AgentRole> agent_role_from_string(std::string_view name);

class UnboundPlaceholder : public InputError {
public:
  explicit UnboundPlaceholder(std::string name)
      : InputError("template placeholder {{" + name + "}} has no value"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

/// Prompt text with {{goal}}, {{procedure}}, {{hint}}, {{edits_customize}}
/// and {{edits_execute}} placeholders. Any other {{...}} is rejected when the
/// template is built.
class PromptTemplate {
public:
  PromptTemplate(std::string name, std::string body);

  const std::string& name() const noexcept { return name_; }
  const std::string& body() const noexcept { return body_; }
  /// Distinct placeholder names in order of first use.
  const std::vector<std::string>& placeholders() const noexcept { return placeholders_; }

private:
  std::string name_;
  std::string body_;
  std::vector<std::string> placeholders_;
};

struct PromptInputs {
  std::string goal;
  Procedure procedure;
  std::optional<std::string> hint;
  std::optional<EditBag> customize_edits;
  std::optional<EditBag> execute_edits;
};

/// Substitutes every placeholder in one pass; substituted values are not
/// scanned again. The procedure is rendered as numbered text and edit bags in
/// canonical form, "(none)" for an empty bag. Throws UnboundPlaceholder.
std::string render_prompt(const PromptTemplate& prompt, const PromptInputs& inputs);

/// Templates keyed by name: modify, verify, verify_with_hint, unified,
/// resolve and e2e.
class TemplateSet {
public:
  /// The built-in defaults.
  static TemplateSet defaults();
  /// Defaults overridden by any `<name>.txt` found in `directory`.
  static TemplateSet load(const std::filesystem::path& directory);

  const PromptTemplate& get(std::string_view name) const;
  void set(PromptTemplate prompt);

private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

/// Turns a rendered prompt into raw model output.
class CompletionBackend {
public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(AgentRole role, std::string_view record_id, const std::string& prompt) = 0;
};

/// Sends prompts through a Gateway with fixed generation settings.
class GatewayBackend final : public CompletionBackend {
public:
  GatewayBackend(std::shared_ptr<Gateway> gateway, GenerationSettings settings);
  std::string complete(AgentRole role, std::string_view record_id, const std::string& prompt) override;

private:
  std::shared_ptr<Gateway> gateway_;
  GenerationSettings settings_;
};

class MissingFixture : public InputError {
public:
  MissingFixture(AgentRole role, const std::string& record_id)
      : InputError("no scripted " + std::string(to_string(role)) + " output for record '" + record_id + "'"),
        record_id_(record_id) {}
  const std::string& record_id() const noexcept { return record_id_; }

private:
  std::string record_id_;
};

/// Canned outputs keyed by (role, record id). An entry may instead simulate
/// an endpoint outage, in which case complete() throws EndpointError.
///
/// File form, one JSON object per line:
///   {"role": "modify", "record_id": "r01", "output": "insert(1, ...)"}
///   {"role": "resolve", "record_id": "r02", "error": "unavailable"}
class ScriptedBackend final : public CompletionBackend {
public:
  ScriptedBackend() = default;
  static ScriptedBackend load(const std::filesystem::path& path);

  void script(AgentRole role, std::string record_id, std::string output);
  void script_outage(AgentRole role, std::string record_id);

  std::string complete(AgentRole role, std::string_view record_id, const std::string& prompt) override;

private:
  struct Entry {
    std::string output;
    bool outage = false;
  };
  std::map<std::pair<AgentRole, std::string>, Entry> entries_;
};

/// Verbatim model output plus whatever was parsed from it. Edit-producing
/// roles fill `parsed_edits`; the e2e role fills `parsed_procedure`.
struct AgentOutput {
  AgentRole role = AgentRole::modify;
  std::string prompt;
  std::string raw;
  EditBag parsed_edits;
  std::optional<Procedure> parsed_procedure;
  std::vector<ParseDiagnostic> diagnostics;
  std::optional<std::string> failure;

  friend bool operator==(const AgentOutput&, const AgentOutput&) = default;
};

struct AgentContext {
  std::string record_id;
  Goal goal;
  CustomizationHint hint;
};

AgentContext context_of(const CustomizationRecord& record);

struct AgentOptions {
  /// Give the verify agent the customization hint as well.
  bool verify_sees_hint = false;
  /// Used by the resolver when its backend call fails.
  MergePolicy fallback_policy = MergePolicy::customize_wins;
};

struct ResolveOutcome {
  AgentOutput output;
  /// Post-filtered merged bag; always validates cleanly against the procedure.
  EditBag merged;
  std::vector<RejectedEdit> rejected;
  /// Set when the backend failed and the deterministic merge was used.
  std::optional<MergePolicy> fallback;
  /// Edits the fallback merge discarded as conflict losers.
  std::vector<Edit> conflict_losers;
};

/// The five agent roles. Agents never modify the procedure they are given;
/// applying edits is the engine's job.
class Agents {
public:
  Agents(std::shared_ptr<CompletionBackend> backend, TemplateSet templates, AgentOptions options = {});

  AgentOutput modify(const AgentContext& context, const Procedure& procedure) const;
  AgentOutput verify(const AgentContext& context, const Procedure& procedure) const;
  AgentOutput unified(const AgentContext& context, const Procedure& procedure) const;
  AgentOutput e2e(const AgentContext& context, const Procedure& procedure) const;
  ResolveOutcome resolve(const AgentContext& context, const Procedure& procedure, const EditBag& customize,
                         const EditBag& execute) const;

  const AgentOptions& options() const noexcept { return options_; }

private:
  AgentOutput run_edit_role(AgentRole role, std::string_view template_name, const AgentContext& context,
                            PromptInputs inputs) const;

  std::shared_ptr<CompletionBackend> backend_;
  TemplateSet templates_;
  AgentOptions options_;
};

} // namespace procedit
