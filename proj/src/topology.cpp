#include "procedit/topology.hpp"

#include <array>
#include <utility>

#include <omp.h>

#include <json.hpp>

namespace procedit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<Topology, std::string_view>, 5> kTopologyNames{{
    {Topology::e2e, "e2e"},
    {Topology::unified, "unified"},
    {Topology::sequential, "sequential"},
    {Topology::reverse_sequential, "reverse_sequential"},
    {Topology::parallel, "parallel"},
}};

constexpr std::array<std::pair<FailureKind, std::string_view>, 5> kFailureNames{{
    {FailureKind::invalid_record, "invalid_record"},
    {FailureKind::agent_output, "agent_output"},
    {FailureKind::missing_fixture, "missing_fixture"},
    {FailureKind::endpoint, "endpoint"},
    {FailureKind::internal, "internal"},
}};

class PipelineRun {
public:
  PipelineRun(const CustomizationRecord& record, const Agents& agents, PipelineTrace& trace)
      : record_(record), context_(context_of(record)), agents_(agents), trace_(trace) {}

  void e2e() {
    AgentOutput output = agents_.e2e(context_, record_.procedure);
    push(stage::e2e_output, output);
    if (output.failure) {
      trace_.failure = TraceFailure{FailureKind::agent_output, *output.failure};
      return;
    }
    trace_.final = *output.parsed_procedure;
  }

  void unified() {
    trace_.final = edit_and_apply(agents_.unified(context_, record_.procedure), record_.procedure,
                                  stage::unified_output, stage::unified_edits, stage::unified_applied);
  }

  void sequential() {
    Procedure customized = modify_pass(record_.procedure);
    trace_.final = verify_pass(customized);
  }

  void reverse_sequential() {
    Procedure executable = verify_pass(record_.procedure);
    trace_.final = modify_pass(executable);
  }

  void parallel() {
    const Procedure& base = record_.procedure;
    AgentOutput customize = agents_.modify(context_, base);
    push(stage::modify_output, customize);
    push(stage::modify_edits, customize.parsed_edits);
    AgentOutput execute = agents_.verify(context_, base);
    push(stage::verify_output, execute);
    push(stage::verify_edits, execute.parsed_edits);

    ResolveOutcome outcome = agents_.resolve(context_, base, customize.parsed_edits, execute.parsed_edits);
    push(stage::resolve_output, outcome.output);
    Stage merged{std::string(stage::resolve_merged), outcome.merged, std::nullopt};
    if (outcome.fallback) merged.note = "fallback merge: " + std::string(to_string(*outcome.fallback));
    trace_.stages.push_back(std::move(merged));
    for (const Edit& loser : outcome.conflict_losers)
      trace_.dropped_edits.push_back({std::string(stage::resolve_merged), loser, "lost conflict"});
    for (const RejectedEdit& rejected : outcome.rejected)
      trace_.dropped_edits.push_back(
          {std::string(stage::resolve_merged), rejected.edit, std::string(to_string(rejected.reason))});

    Procedure result = procedit::apply(outcome.merged, base);
    push(stage::resolve_applied, result);
    trace_.final = std::move(result);
  }

private:
  Procedure modify_pass(const Procedure& base) {
    return edit_and_apply(agents_.modify(context_, base), base, stage::modify_output, stage::modify_edits,
                          stage::modify_applied);
  }

  Procedure verify_pass(const Procedure& base) {
    return edit_and_apply(agents_.verify(context_, base), base, stage::verify_output, stage::verify_edits,
                          stage::verify_applied);
  }

  Procedure edit_and_apply(const AgentOutput& output, const Procedure& base, std::string_view output_label,
                           std::string_view edits_label, std::string_view applied_label) {
    push(output_label, output);
    push(edits_label, output.parsed_edits);
    ApplyResult result = apply_edits(output.parsed_edits, base);
    for (const RejectedEdit& rejected : result.dropped)
      trace_.dropped_edits.push_back(
          {std::string(applied_label), rejected.edit, std::string(to_string(rejected.reason))});
    push(applied_label, result.procedure);
    return std::move(result.procedure);
  }

  template <typename Payload>
  void push(std::string_view label, Payload payload) {
    trace_.stages.push_back({std::string(label), std::move(payload), std::nullopt});
  }

  const CustomizationRecord& record_;
  AgentContext context_;
  const Agents& agents_;
  PipelineTrace& trace_;
};

} // namespace

std::string_view to_string(Topology topology) {
  for (const auto& [value, name] : kTopologyNames)
    if (value == topology) return name;
  return "?";
}

std::optional<Topology> topology_from_string(std::string_view name) {
  for (const auto& [value, label] : kTopologyNames)
    if (label == name) return value;
  // Hyphenated spelling is accepted on input.
  if (name == "reverse-sequential") return Topology::reverse_sequential;
  return std::nullopt;
}

std::string_view to_string(FailureKind kind) {
  for (const auto& [value, name] : kFailureNames)
    if (value == kind) return name;
  return "?";
}

std::optional<FailureKind> failure_kind_from_string(std::string_view name) {
  for (const auto& [value, label] : kFailureNames)
    if (label == name) return value;
  return std::nullopt;
}

PipelineTrace run_pipeline(Topology topology, const CustomizationRecord& record, const Agents& agents) {
  PipelineTrace trace;
  trace.record_id = record.id;
  trace.topology = topology;
  trace.stages.push_back({std::string(stage::input), record.procedure, std::nullopt});

  PipelineRun run(record, agents, trace);
  try {
    switch (topology) {
    case Topology::e2e: run.e2e(); break;
    case Topology::unified: run.unified(); break;
    case Topology::sequential: run.sequential(); break;
    case Topology::reverse_sequential: run.reverse_sequential(); break;
    case Topology::parallel: run.parallel(); break;
    }
  } catch (const MissingFixture& e) {
    trace.failure = TraceFailure{FailureKind::missing_fixture, e.what()};
  } catch (const GatewayError& e) {
    trace.failure = TraceFailure{FailureKind::endpoint, e.what()};
  } catch (const InputError& e) {
    trace.failure = TraceFailure{FailureKind::agent_output, e.what()};
  } catch (const std::exception& e) {
    trace.failure = TraceFailure{FailureKind::internal, e.what()};
  }
  if (trace.failure) trace.final.reset();
  return trace;
}

PipelineTrace invalid_record_trace(Topology topology, const DatasetEntry& entry) {
  PipelineTrace trace;
  trace.record_id = entry.id.empty() ? "line:" + std::to_string(entry.line_number) : entry.id;
  trace.topology = topology;
  std::string message = entry.diagnostic ? entry.diagnostic->message : "no record";
  trace.failure = TraceFailure{FailureKind::invalid_record,
                               "line " + std::to_string(entry.line_number) + ": " + message};
  return trace;
}

namespace {

PipelineTrace run_entry(Topology topology, const DatasetEntry& entry, const Agents& agents) noexcept {
  try {
    if (!entry.record) return invalid_record_trace(topology, entry);
    return run_pipeline(topology, *entry.record, agents);
  } catch (...) {
    PipelineTrace trace;
    trace.record_id = entry.id;
    trace.topology = topology;
    trace.failure = TraceFailure{FailureKind::internal, "unexpected error"};
    return trace;
  }
}

} // namespace

std::vector<PipelineTrace> run_batch(Topology topology, std::span<const DatasetEntry> entries, const Agents& agents,
                                     int parallelism) {
  std::vector<PipelineTrace> traces(entries.size());
  const auto count = static_cast<std::ptrdiff_t>(entries.size());
  const int threads = parallelism < 1 ? 1 : parallelism;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < count; ++i) traces[i] = run_entry(topology, entries[i], agents);
  return traces;
}

std::vector<PipelineTrace> run_batch_serial(Topology topology, std::span<const DatasetEntry> entries,
                                            const Agents& agents) {
  std::vector<PipelineTrace> traces;
  traces.reserve(entries.size());
  for (const auto& entry : entries) traces.push_back(run_entry(topology, entry, agents));
  return traces;
}

std::vector<DatasetEntry> entries_of(std::span<const CustomizationRecord> records) {
  std::vector<DatasetEntry> entries;
  entries.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) entries.push_back({i + 1, records[i].id, records[i], std::nullopt});
  return entries;
}

namespace {

ordered_json edits_json(const EditBag& bag) {
  ordered_json out = ordered_json::array();
  for (const Edit& edit : bag) out.push_back(serialize_edit(edit));
  return out;
}

EditBag edits_from(const json& value) {
  EditBag bag;
  for (const json& line : value) bag.push_back(parse_edit(line.get<std::string>()));
  return bag;
}

Procedure procedure_from(const json& value) { return Procedure::from_steps(value.get<std::vector<std::string>>()); }

ordered_json agent_json(const AgentOutput& output) {
  ordered_json diagnostics = ordered_json::array();
  for (const auto& d : output.diagnostics)
    diagnostics.push_back(ordered_json{{"line", d.line_number}, {"raw", d.raw_line}, {"reason", d.reason}});
  ordered_json out;
  out["role"] = to_string(output.role);
  out["prompt"] = output.prompt;
  out["raw"] = output.raw;
  out["edits"] = edits_json(output.parsed_edits);
  out["procedure"] = output.parsed_procedure ? ordered_json(output.parsed_procedure->steps()) : ordered_json(nullptr);
  out["diagnostics"] = std::move(diagnostics);
  out["failure"] = output.failure ? ordered_json(*output.failure) : ordered_json(nullptr);
  return out;
}

AgentOutput agent_from(const json& value) {
  AgentOutput output;
  auto role = agent_role_from_string(value.at("role").get<std::string>());
  if (!role) throw InputError("unknown agent role in trace");
  output.role = *role;
  output.prompt = value.at("prompt").get<std::string>();
  output.raw = value.at("raw").get<std::string>();
  output.parsed_edits = edits_from(value.at("edits"));
  if (!value.at("procedure").is_null()) output.parsed_procedure = procedure_from(value["procedure"]);
  for (const json& d : value.at("diagnostics"))
    output.diagnostics.push_back(
        {d.at("line").get<std::size_t>(), d.at("raw").get<std::string>(), d.at("reason").get<std::string>()});
  if (!value.at("failure").is_null()) output.failure = value["failure"].get<std::string>();
  return output;
}

} // namespace

std::string trace_to_json(const PipelineTrace& trace) {
  ordered_json stages = ordered_json::array();
  for (const Stage& s : trace.stages) {
    ordered_json item;
    item["label"] = s.label;
    if (const auto* procedure = std::get_if<Procedure>(&s.payload))
      item["procedure"] = procedure->steps();
    else if (const auto* bag = std::get_if<EditBag>(&s.payload))
      item["edits"] = edits_json(*bag);
    else
      item["agent"] = agent_json(std::get<AgentOutput>(s.payload));
    if (s.note) item["note"] = *s.note;
    stages.push_back(std::move(item));
  }

  ordered_json dropped = ordered_json::array();
  for (const auto& d : trace.dropped_edits)
    dropped.push_back(ordered_json{{"stage", d.stage}, {"edit", serialize_edit(d.edit)}, {"reason", d.reason}});

  ordered_json out;
  out["record_id"] = trace.record_id;
  out["topology"] = to_string(trace.topology);
  out["stages"] = std::move(stages);
  out["final"] = trace.final ? ordered_json(trace.final->steps()) : ordered_json(nullptr);
  out["dropped_edits"] = std::move(dropped);
  out["failure"] = trace.failure
                       ? ordered_json{{"kind", to_string(trace.failure->kind)}, {"message", trace.failure->message}}
                       : ordered_json(nullptr);
  return out.dump();
}

PipelineTrace trace_from_json(std::string_view line) {
  json value = json::parse(line, nullptr, false);
  if (value.is_discarded() || !value.is_object()) throw InputError("trace line is not a JSON object");
  try {
    PipelineTrace trace;
    trace.record_id = value.at("record_id").get<std::string>();
    auto topology = topology_from_string(value.at("topology").get<std::string>());
    if (!topology) throw InputError("unknown topology in trace");
    trace.topology = *topology;
    for (const json& item : value.at("stages")) {
      Stage s{item.at("label").get<std::string>(), Procedure{}, std::nullopt};
      if (item.contains("procedure"))
        s.payload = procedure_from(item["procedure"]);
      else if (item.contains("edits"))
        s.payload = edits_from(item["edits"]);
      else
        s.payload = agent_from(item.at("agent"));
      if (item.contains("note")) s.note = item["note"].get<std::string>();
      trace.stages.push_back(std::move(s));
    }
    if (!value.at("final").is_null()) trace.final = procedure_from(value["final"]);
    for (const json& d : value.at("dropped_edits"))
      trace.dropped_edits.push_back(
          {d.at("stage").get<std::string>(), parse_edit(d.at("edit").get<std::string>()), d.at("reason").get<std::string>()});
    if (!value.at("failure").is_null()) {
      auto kind = failure_kind_from_string(value["failure"].at("kind").get<std::string>());
      if (!kind) throw InputError("unknown failure kind in trace");
      trace.failure = TraceFailure{*kind, value["failure"].at("message").get<std::string>()};
    }
    return trace;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed trace: ") + e.what());
  }
}

std::string format_traces(std::span<const PipelineTrace> traces) {
  std::string out;
  for (const auto& trace : traces) {
    out += trace_to_json(trace);
    out += '\n';
  }
  return out;
}

std::optional<std::string> check_trace_replay(const PipelineTrace& trace) {
  std::optional<Procedure> current;
  std::optional<Procedure> bag_base;
  std::optional<EditBag> pending;

  for (const Stage& s : trace.stages) {
    if (const auto* procedure = std::get_if<Procedure>(&s.payload)) {
      if (current) {
        if (!pending) return "stage " + s.label + " has no edit bag before it";
        if (procedit::apply(*pending, *bag_base) != *procedure) return "stage " + s.label + " does not follow from its edits";
      }
      current = *procedure;
      pending.reset();
    } else if (const auto* bag = std::get_if<EditBag>(&s.payload)) {
      if (!current) return "stage " + s.label + " has no procedure to apply to";
      pending = *bag;
      bag_base = current;
    } else {
      const auto& output = std::get<AgentOutput>(s.payload);
      if (output.parsed_procedure) current = *output.parsed_procedure;
    }
  }
  if (trace.failure) return std::nullopt;
  if (!trace.final) return "trace has neither a final procedure nor a failure";
  if (!current || *current != *trace.final) return "final procedure does not match the last stage";
  return std::nullopt;
}

} // namespace procedit
