#include "procedit/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "procedit/agents.hpp"
#include "procedit/dataset.hpp"
#include "procedit/edit_dsl.hpp"
#include "procedit/eval.hpp"

namespace procedit::cli {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Mode mode) {
  switch (mode) {
  case Mode::live: return "live";
  case Mode::record: return "record";
  case Mode::replay: return "replay";
  case Mode::mock: return "mock";
  }
  return "?";
}

std::optional<Mode> mode_from_string(std::string_view name) {
  for (auto mode : {Mode::live, Mode::record, Mode::replay, Mode::mock})
    if (to_string(mode) == name) return mode;
  return std::nullopt;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"endpoint",     "credential_env", "model",       "topology",
                                             "templates",    "cache",          "mock_fixtures", "mode",
                                             "parallelism",  "max_in_flight",  "merge_policy", "verify_sees_hint"};
  return keys;
}

namespace {

int parse_positive(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    int parsed = std::stoi(value, &used);
    if (used == value.size() && parsed >= 1) return parsed;
  } catch (const std::exception&) {
  }
  throw InputError(key + " must be a positive integer, got '" + value + "'");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InputError(key + " must be true or false, got '" + value + "'");
}

} // namespace

CliConfig resolve_config(const ConfigLayer& flags, const ConfigLayer& environment, const ConfigLayer& file) {
  ConfigLayer merged;
  for (const ConfigLayer* layer : {&file, &environment, &flags}) {
    for (const auto& [key, value] : *layer) {
      if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end())
        throw InputError("unknown config key '" + key + "'");
      merged[key] = value;
    }
  }

  CliConfig config;
  for (const auto& [key, value] : merged) {
    if (key == "endpoint") {
      config.endpoint = value;
    } else if (key == "credential_env") {
      config.credential_env = value;
    } else if (key == "model") {
      config.model = value;
    } else if (key == "topology") {
      auto topology = topology_from_string(value);
      if (!topology) throw InputError("unknown topology '" + value + "'");
      config.topology = *topology;
    } else if (key == "templates") {
      config.templates = value;
    } else if (key == "cache") {
      config.cache = value;
    } else if (key == "mock_fixtures") {
      config.mock_fixtures = value;
    } else if (key == "mode") {
      auto mode = mode_from_string(value);
      if (!mode) throw InputError("unknown mode '" + value + "'");
      config.mode = *mode;
    } else if (key == "parallelism") {
      config.parallelism = parse_positive(key, value);
    } else if (key == "max_in_flight") {
      config.max_in_flight = static_cast<std::size_t>(parse_positive(key, value));
    } else if (key == "merge_policy") {
      auto policy = merge_policy_from_string(value);
      if (!policy) throw InputError("unknown merge policy '" + value + "'");
      config.merge_policy = *policy;
    } else if (key == "verify_sees_hint") {
      config.verify_sees_hint = parse_bool(key, value);
    }
  }

  if (config.mode == Mode::mock && !config.mock_fixtures) throw InputError("mock mode needs --mock-fixtures");
  if ((config.mode == Mode::replay || config.mode == Mode::record) && !config.cache)
    throw InputError(std::string(to_string(config.mode)) + " mode needs --cache");
  return config;
}

ConfigLayer load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path.string());
  json object = json::parse(in, nullptr, false);
  if (object.is_discarded() || !object.is_object()) throw InputError("config file must hold a JSON object");
  ConfigLayer layer;
  for (const auto& [key, value] : object.items()) {
    if (value.is_string())
      layer[key] = value.get<std::string>();
    else if (value.is_boolean())
      layer[key] = value.get<bool>() ? "true" : "false";
    else if (value.is_number_integer())
      layer[key] = std::to_string(value.get<long long>());
    else
      throw InputError("config key '" + key + "' must be a string, boolean or integer");
  }
  return layer;
}

std::string format_config(const CliConfig& config) {
  auto path_or_null = [](const std::optional<std::filesystem::path>& p) {
    return p ? ordered_json(p->string()) : ordered_json(nullptr);
  };
  ordered_json out;
  out["endpoint"] = config.endpoint;
  out["credential_env"] = config.credential_env;
  out["model"] = config.model;
  out["topology"] = procedit::to_string(config.topology);
  out["templates"] = path_or_null(config.templates);
  out["cache"] = path_or_null(config.cache);
  out["mock_fixtures"] = path_or_null(config.mock_fixtures);
  out["mode"] = to_string(config.mode);
  out["parallelism"] = config.parallelism;
  out["max_in_flight"] = config.max_in_flight;
  out["merge_policy"] = procedit::to_string(config.merge_policy);
  out["verify_sees_hint"] = config.verify_sees_hint;
  return out.dump(2);
}

CliIo default_io() {
  return CliIo{std::cin, std::cout, std::cerr,
               [](const std::string& name) -> std::optional<std::string> {
                 const char* value = std::getenv(name.c_str());
                 if (value == nullptr) return std::nullopt;
                 return std::string(value);
               },
               [](const std::string& base_url) -> std::shared_ptr<Transport> { return make_http_transport(base_url); }};
}

namespace {

std::string read_text(const std::string& path, std::istream& in) {
  if (path == "-") {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot read " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw InputError("cannot write " + path);
  file << text;
}

/// Options shared by the subcommands that run agents.
struct RunOptions {
  ConfigLayer flags;
  std::string config_file;
  bool show_config = false;

  void attach(CLI::App& sub) {
    for (const std::string& key : config_keys()) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (key == "verify_sees_hint") {
        sub.add_flag_callback(flag, [this] { flags["verify_sees_hint"] = "true"; },
                              "Give the verify agent the customization hint");
        continue;
      }
      sub.add_option_function<std::string>(flag, [this, key](const std::string& v) { flags[key] = v; },
                                           "Overrides PROCEDIT_" + upper(key));
    }
    sub.add_option("--config", config_file, "JSON config file (lowest precedence)");
    sub.add_flag("--show-config", show_config, "Print the resolved configuration to stderr");
  }

  CliConfig resolve(const CliIo& io) const {
    ConfigLayer environment;
    for (const std::string& key : config_keys())
      if (auto value = io.env("PROCEDIT_" + upper(key))) environment[key] = *value;
    ConfigLayer file = config_file.empty() ? ConfigLayer{} : load_config_file(config_file);
    return resolve_config(flags, environment, file);
  }

  static std::string upper(std::string text) {
    for (char& c : text) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return text;
  }
};

Agents build_agents(const CliConfig& config, const CliIo& io) {
  TemplateSet templates = config.templates ? TemplateSet::load(*config.templates) : TemplateSet::defaults();
  AgentOptions options{config.verify_sees_hint, config.merge_policy};

  if (config.mode == Mode::mock) {
    auto backend = std::make_shared<ScriptedBackend>(ScriptedBackend::load(*config.mock_fixtures));
    return Agents(std::move(backend), std::move(templates), options);
  }

  GenerationSettings settings;
  settings.model = config.model;
  std::shared_ptr<Gateway> gateway;
  if (config.mode == Mode::replay) {
    if (!std::filesystem::exists(*config.cache)) throw InputError("cache file not found: " + config.cache->string());
    Gateway::Options gateway_options;
    gateway_options.replay = true;
    gateway = std::make_shared<Gateway>(nullptr, std::make_shared<ResponseCache>(*config.cache), gateway_options);
  } else {
    if (config.model.empty()) throw InputError("--model is required in live and record modes");
    auto credential = io.env(config.credential_env);
    if (!credential || credential->empty())
      throw InputError("credential variable " + config.credential_env + " is not set");
    Gateway::Options gateway_options;
    gateway_options.api_key = *credential;
    gateway_options.max_in_flight = config.max_in_flight;
    std::shared_ptr<ResponseCache> cache;
    if (config.cache) cache = std::make_shared<ResponseCache>(*config.cache);
    gateway = std::make_shared<Gateway>(io.transport_factory(config.endpoint), std::move(cache), gateway_options);
  }
  return Agents(std::make_shared<GatewayBackend>(std::move(gateway), settings), std::move(templates), options);
}

int exit_code_for(const TraceFailure& failure) {
  return failure.kind == FailureKind::endpoint ? kEndpointFailure : kInvalidInput;
}

struct CustomizeArgs {
  std::string goal;
  std::string procedure_file;
  std::string hint;
  std::string record_id = "cli";
  std::string constraint_subtype = "none";
  std::string expertise = "unspecified";
  std::string critical_type = "unspecified";
  std::string trace_out;
};

int run_customize(const CustomizeArgs& args, const RunOptions& run, CliIo& io) {
  CliConfig config = run.resolve(io);
  if (run.show_config) io.err << format_config(config) << '\n';

  CustomizationRecord record;
  record.id = args.record_id;
  record.goal = Goal(args.goal);
  record.procedure = parse_numbered_text(read_text(args.procedure_file, io.in));
  auto subtype = constraint_subtype_from_string(args.constraint_subtype);
  auto expertise = expertise_from_string(args.expertise);
  auto critical = critical_type_from_string(args.critical_type);
  if (!subtype || !expertise || !critical) throw InputError("invalid hint metadata");
  record.hint = make_hint(args.hint, *subtype, *expertise, *critical);

  Agents agents = build_agents(config, io);
  PipelineTrace trace = run_pipeline(config.topology, record, agents);
  if (!args.trace_out.empty()) write_text(args.trace_out, trace_to_json(trace) + "\n", io.out);
  for (const auto& dropped : trace.dropped_edits)
    io.err << "dropped " << serialize_edit(dropped.edit) << " at " << dropped.stage << ": " << dropped.reason << '\n';
  if (trace.failure) {
    io.err << "record '" << trace.record_id << "' failed: " << trace.failure->message << '\n';
    return exit_code_for(*trace.failure);
  }
  io.out << to_numbered_text(*trace.final) << '\n';
  return kOk;
}

struct BatchArgs {
  std::string dataset;
  std::string traces_out;
  bool strict = false;
};

int run_batch_command(const BatchArgs& args, const RunOptions& run, CliIo& io) {
  CliConfig config = run.resolve(io);
  if (run.show_config) io.err << format_config(config) << '\n';
  auto entries = load_entries(args.dataset, args.strict ? LoadMode::strict : LoadMode::lenient);
  Agents agents = build_agents(config, io);
  auto traces = run_batch(config.topology, entries, agents, config.parallelism);
  write_text(args.traces_out, format_traces(traces), io.out);

  std::size_t failed = 0;
  for (const auto& trace : traces) {
    if (!trace.failure) continue;
    ++failed;
    io.err << "record '" << trace.record_id << "' failed: " << trace.failure->message << '\n';
  }
  io.err << traces.size() - failed << " of " << traces.size() << " records customized\n";
  return kOk;
}

int run_apply_edits(const std::string& procedure_file, const std::string& edits_file, bool strict, CliIo& io) {
  Procedure procedure = parse_numbered_text(read_text(procedure_file, io.in));
  auto parsed = parse_edit_bag(read_text(edits_file, io.in));
  for (const auto& d : parsed.diagnostics)
    io.err << "edits line " << d.line_number << ": " << d.reason << ": " << d.raw_line << '\n';
  ApplyResult result = apply_edits(parsed.edits, procedure);
  for (const auto& rejected : result.dropped)
    io.err << "dropped " << serialize_edit(rejected.edit) << ": " << to_string(rejected.reason) << '\n';
  if (strict && (!parsed.diagnostics.empty() || !result.dropped.empty())) return kInvalidInput;
  io.out << to_numbered_text(result.procedure);
  if (!result.procedure.empty()) io.out << '\n';
  return kOk;
}

int run_parse_edits(const std::string& edits_file, bool strict, CliIo& io) {
  auto parsed = parse_edit_bag(read_text(edits_file, io.in));
  for (const Edit& edit : parsed.edits) io.out << serialize_edit(edit) << '\n';
  for (const auto& d : parsed.diagnostics)
    io.err << "line " << d.line_number << ": " << d.reason << ": " << d.raw_line << '\n';
  return strict && !parsed.diagnostics.empty() ? kInvalidInput : kOk;
}

int run_diff(const std::string& from_file, const std::string& to_file, bool stats, CliIo& io) {
  Procedure from = parse_numbered_text(read_text(from_file, io.in));
  Procedure to = parse_numbered_text(read_text(to_file, io.in));
  EditBag bag = diff(from, to);
  for (const Edit& edit : bag) io.out << serialize_edit(edit) << '\n';
  if (stats) {
    EditCounts counts = count_edits(bag);
    io.err << counts.inserts << " inserts, " << counts.replacements << " replacements, " << counts.deletions
           << " deletions (" << counts.total() << " edits)\n";
  }
  return kOk;
}

int run_stats(const std::string& dataset, bool strict, bool as_json, CliIo& io) {
  LoadResult loaded = load_records(dataset, strict ? LoadMode::strict : LoadMode::lenient);
  for (const auto& d : loaded.diagnostics) io.err << "line " << d.line_number << ": " << d.message << '\n';
  DatasetStats stats = dataset_stats(loaded.records);
  if (!as_json) {
    io.out << format_stats(stats);
    return kOk;
  }
  auto shares = [](const std::vector<CategoryShare>& rows) {
    ordered_json out = ordered_json::object();
    for (const auto& row : rows) out[row.name] = ordered_json{{"count", row.count}, {"percent", row.percent}};
    return out;
  };
  ordered_json out;
  out["records"] = stats.records;
  out["unique_goals"] = stats.unique_goals;
  out["unique_hints"] = stats.unique_hints;
  out["constraint_subtype"] = shares(stats.constraint_subtype);
  out["expertise"] = shares(stats.expertise);
  out["critical_type"] = shares(stats.critical_type);
  out["source"] = shares(stats.source);
  io.out << out.dump() << '\n';
  return kOk;
}

struct ReportArgs {
  std::string judgments;
  std::string group_by;
  std::string dataset;
  std::string tie_rule = "refuse";
  bool as_json = false;
  bool errors = false;
};

int run_report(const ReportArgs& args, CliIo& io) {
  auto judgments = load_judgments(args.judgments);
  TieRule tie_rule = TieRule::refuse;
  if (args.tie_rule == "negative")
    tie_rule = TieRule::negative;
  else if (args.tie_rule == "positive")
    tie_rule = TieRule::positive;
  else if (args.tie_rule != "refuse")
    throw InputError("unknown tie rule '" + args.tie_rule + "'");

  std::optional<Grouping> grouping;
  if (!args.group_by.empty()) {
    auto dimension = group_dimension_from_string(args.group_by);
    if (!dimension) throw InputError("cannot group by '" + args.group_by + "'");
    if (args.dataset.empty()) throw InputError("--group-by needs --dataset for hint metadata");
    grouping = Grouping{*dimension, {}};
    for (auto& record : load_records(args.dataset).records) grouping->hints.emplace(record.id, record.hint);
  }

  MetricsReport report = aggregate(judgments, grouping ? &*grouping : nullptr, tie_rule);
  io.out << (args.as_json ? format_metrics_json(report) : format_metrics_table(report));
  if (args.errors) {
    for (const auto& method : methods_of(judgments)) {
      io.out << '\n' << format_error_distribution(error_distribution(judgments, method));
    }
  }
  return kOk;
}

} // namespace

int dispatch(const std::vector<std::string>& argv, CliIo& io) {
  CLI::App app{"Customize how-to procedures with validated edit scripts", "procedit"};
  app.require_subcommand(1);

  RunOptions customize_run;
  CustomizeArgs customize;
  auto* customize_cmd = app.add_subcommand("customize", "Customize one procedure and print the result");
  customize_cmd->add_option("--goal", customize.goal, "Goal of the procedure")->required();
  customize_cmd->add_option("--procedure", customize.procedure_file, "Numbered procedure file, or - for stdin")
      ->required();
  customize_cmd->add_option("--hint", customize.hint, "Customization hint")->required();
  customize_cmd->add_option("--record-id", customize.record_id, "Id used for traces and mock fixtures");
  customize_cmd->add_option("--constraint-subtype", customize.constraint_subtype);
  customize_cmd->add_option("--expertise", customize.expertise);
  customize_cmd->add_option("--critical-type", customize.critical_type);
  customize_cmd->add_option("--trace-out", customize.trace_out, "Write the trace line here (- for stdout)");
  customize_run.attach(*customize_cmd);

  RunOptions batch_run;
  BatchArgs batch;
  auto* batch_cmd = app.add_subcommand("batch", "Customize every record of a dataset file");
  batch_cmd->add_option("--dataset", batch.dataset, "Dataset file")->required();
  batch_cmd->add_option("--traces-out", batch.traces_out, "Trace file, one line per record (- for stdout)")
      ->required();
  batch_cmd->add_flag("--strict", batch.strict, "Abort on the first malformed dataset line");
  batch_run.attach(*batch_cmd);

  std::string procedure_file;
  std::string edits_file;
  bool strict = false;
  auto* apply_cmd = app.add_subcommand("apply-edits", "Apply an edit file to a procedure file");
  apply_cmd->add_option("--procedure", procedure_file, "Numbered procedure file")->required();
  apply_cmd->add_option("--edits", edits_file, "Edit file, one edit per line")->required();
  apply_cmd->add_flag("--strict", strict, "Fail when any edit line is malformed or rejected");

  auto* parse_cmd = app.add_subcommand("parse-edits", "Print edits in canonical form");
  parse_cmd->add_option("edits", edits_file, "Edit file, or - for stdin")->required();
  parse_cmd->add_flag("--strict", strict, "Fail when any line is malformed");

  std::string from_file;
  std::string to_file;
  bool diff_stats = false;
  auto* diff_cmd = app.add_subcommand("diff", "Edits that turn one procedure into another");
  diff_cmd->add_option("from", from_file, "Original procedure file")->required();
  diff_cmd->add_option("to", to_file, "Edited procedure file")->required();
  diff_cmd->add_flag("--stats", diff_stats, "Print edit counts to stderr");

  std::string dataset_file;
  bool as_json = false;
  auto* stats_cmd = app.add_subcommand("stats", "Summarize a dataset file");
  stats_cmd->add_option("dataset", dataset_file, "Dataset file")->required();
  stats_cmd->add_flag("--strict", strict, "Fail on the first malformed line");
  stats_cmd->add_flag("--json", as_json, "Machine-readable output");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Aggregate annotator judgments into metrics");
  report_cmd->add_option("--judgments", report.judgments, "Judgments file")->required();
  report_cmd->add_option("--group-by", report.group_by, "constraint_subtype, expertise or critical_type");
  report_cmd->add_option("--dataset", report.dataset, "Dataset file supplying hint metadata for grouping");
  report_cmd->add_option("--tie-rule", report.tie_rule, "refuse, negative or positive");
  report_cmd->add_flag("--json", report.as_json, "One JSON object per row");
  report_cmd->add_flag("--errors", report.errors, "Also print error-category distributions");

  std::vector<const char*> raw;
  raw.reserve(argv.size());
  for (const auto& arg : argv) raw.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, io.out, io.err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*customize_cmd) return run_customize(customize, customize_run, io);
    if (*batch_cmd) return run_batch_command(batch, batch_run, io);
    if (*apply_cmd) return run_apply_edits(procedure_file, edits_file, strict, io);
    if (*parse_cmd) return run_parse_edits(edits_file, strict, io);
    if (*diff_cmd) return run_diff(from_file, to_file, diff_stats, io);
    if (*stats_cmd) return run_stats(dataset_file, strict, as_json, io);
    if (*report_cmd) return run_report(report, io);
  } catch (const GatewayError& e) {
    io.err << "error: " << e.what() << '\n';
    return kEndpointFailure;
  } catch (const InputError& e) {
    io.err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  return kUsage;
}

} // namespace procedit::cli
