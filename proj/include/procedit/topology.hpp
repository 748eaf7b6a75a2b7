#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "procedit/agents.hpp"
#include "procedit/dataset.hpp"
#include "procedit/edit_engine.hpp"
#include "procedit/procedure.hpp"

namespace procedit {

enum class Topology { e2e, unified, sequential, reverse_sequential, parallel };

std::string_view to_string(Topology topology);
std::optional<Topology> topology_from_string(std::string_view name);
inline constexpr Topology kAllTopologies[] = {Topology::e2e, Topology::unified, Topology::sequential,
                                              Topology::reverse_sequential, Topology::parallel};

/// Fixed stage labels. "<role>.output" holds the agent output, "<role>.edits"
/// the parsed bag, "<role>.applied" the procedure after applying that bag to
/// the most recent procedure stage.
namespace stage {
inline constexpr std::string_view input = "input.procedure";
inline constexpr std::string_view e2e_output = "e2e.output";
inline constexpr std::string_view unified_output = "unified.output";
inline constexpr std::string_view unified_edits = "unified.edits";
inline constexpr std::string_view unified_applied = "unified.applied";
inline constexpr std::string_view modify_output = "modify.output";
inline constexpr std::string_view modify_edits = "modify.edits";
inline constexpr std::string_view modify_applied = "modify.applied";
inline constexpr std::string_view verify_output = "verify.output";
inline constexpr std::string_view verify_edits = "verify.edits";
inline constexpr std::string_view verify_applied = "verify.applied";
inline constexpr std::string_view resolve_output = "resolve.output";
inline constexpr std::string_view resolve_merged = "resolve.merged";
inline constexpr std::string_view resolve_applied = "resolve.applied";
} // namespace stage

struct Stage {
  std::string label;
  std::variant<Procedure, EditBag, AgentOutput> payload;
  /// Free-form remark, e.g. which fallback policy the resolver used.
  std::optional<std::string> note;

  friend bool operator==(const Stage&, const Stage&) = default;
};

struct DroppedEdit {
  std::string stage;
  Edit edit;
  std::string reason;

  friend bool operator==(const DroppedEdit&, const DroppedEdit&) = default;
};

enum class FailureKind { invalid_record, agent_output, missing_fixture, endpoint, internal };

std::string_view to_string(FailureKind kind);
std::optional<FailureKind> failure_kind_from_string(std::string_view name);

struct TraceFailure {
  FailureKind kind = FailureKind::internal;
  std::string message;

  friend bool operator==(const TraceFailure&, const TraceFailure&) = default;
};

/// Everything one record went through. When `failure` is empty, `final`
/// holds the customized procedure.
struct PipelineTrace {
  std::string record_id;
  Topology topology = Topology::sequential;
  std::vector<Stage> stages;
  std::optional<Procedure> final;
  std::vector<DroppedEdit> dropped_edits;
  std::optional<TraceFailure> failure;

  friend bool operator==(const PipelineTrace&, const PipelineTrace&) = default;
};

/// Runs one record through `topology`. Never throws for per-record problems;
/// they land in trace.failure.
PipelineTrace run_pipeline(Topology topology, const CustomizationRecord& record, const Agents& agents);

/// Trace for a dataset line that did not yield a record.
PipelineTrace invalid_record_trace(Topology topology, const DatasetEntry& entry);

/// One trace per entry, in input order. Records run concurrently on up to
/// `parallelism` OpenMP threads; stages within a record stay sequential.
std::vector<PipelineTrace> run_batch(Topology topology, std::span<const DatasetEntry> entries, const Agents& agents,
                                     int parallelism);

/// Single-threaded reference for run_batch.
std::vector<PipelineTrace> run_batch_serial(Topology topology, std::span<const DatasetEntry> entries,
                                            const Agents& agents);

std::vector<DatasetEntry> entries_of(std::span<const CustomizationRecord> records);

/// Compact single-line JSON; keys in a fixed order so output is byte-stable.
std::string trace_to_json(const PipelineTrace& trace);
/// Inverse of trace_to_json. Throws InputError.
PipelineTrace trace_from_json(std::string_view line);

/// One trace_to_json line per trace, each terminated by '\n'.
std::string format_traces(std::span<const PipelineTrace> traces);

/// Re-applies every recorded bag to the procedure stage preceding it and
/// compares with the recorded successor, ending at `final`. Returns the
/// first mismatch, or nothing when the trace is consistent.
std::optional<std::string> check_trace_replay(const PipelineTrace& trace);

} // namespace procedit
